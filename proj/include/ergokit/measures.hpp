#pragma once

// State spaces, weight functions, signed measures and the two weighted norms
//
//   ||g||_f  = sup_x |g(x)| / f(x)          (functions)
//   ||mu||_f = sup_{|g| <= f} |mu(g)|       (signed measures)
//
// On a finite space the measure norm has the closed form sum_x f(x)|mu(x)|.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ergokit/fields.hpp"

namespace ergokit {

class FiniteStateSpace {
public:
  explicit FiniteStateSpace(std::size_t n, std::vector<std::string> labels = {});

  std::size_t size() const { return n_; }
  const std::vector<std::string>& labels() const { return labels_; }
  // Label if present, else the decimal index.
  std::string label(std::size_t i) const;

private:
  std::size_t n_;
  std::vector<std::string> labels_;
};

// f >= 1 tabulated on a finite space.
class WeightTable {
public:
  explicit WeightTable(std::vector<double> values);
  static WeightTable ones(std::size_t n) { return WeightTable(std::vector<double>(n, 1.0)); }

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }

private:
  std::vector<double> values_;
};

class FiniteSignedMeasure {
public:
  explicit FiniteSignedMeasure(std::vector<double> mass) : mass_(std::move(mass)) {}
  static FiniteSignedMeasure dirac(std::size_t n, std::size_t at);

  std::size_t size() const { return mass_.size(); }
  double operator[](std::size_t i) const { return mass_[i]; }
  std::span<const double> mass() const { return mass_; }
  double total() const;
  // mu(g) = sum_x mu(x) g(x).
  double integrate(std::span<const double> g) const;

private:
  std::vector<double> mass_;
};

// Sorted, duplicate-free subset of {0..n-1}.
class FiniteSet {
public:
  FiniteSet(std::size_t n, std::vector<std::size_t> members);
  static FiniteSet all(std::size_t n);

  std::size_t universe() const { return n_; }
  const std::vector<std::size_t>& members() const { return members_; }
  bool empty() const { return members_.empty(); }
  bool contains(std::size_t i) const { return mask_[i]; }
  std::vector<std::size_t> complement() const;
  // 1_C as a 0/1 table.
  std::vector<double> indicator() const;

private:
  std::size_t n_;
  std::vector<std::size_t> members_;
  std::vector<bool> mask_;
};

// Exact on finite spaces.
double f_norm_of_function(std::span<const double> g, const WeightTable& f);

// Continuous case: the sup is replaced by a max over the supplied sample, so
// the result is a lower bound. The maximizing point is returned with it.
struct SampledNorm {
  double value = 0.0;
  Point argmax;
  std::size_t sample_size = 0;
};
SampledNorm f_norm_of_function(const ScalarField& g, const ScalarField& f,
                               std::span<const Point> sample);

double f_norm_of_measure(const FiniteSignedMeasure& mu, const WeightTable& f);

// sum_x w(x)|mu(x)| for any nonnegative w; used where the weight can dip
// below one (f_Delta with Delta < 1).
double weighted_norm(const FiniteSignedMeasure& mu, std::span<const double> w);

struct JordanDecomposition {
  FiniteSignedMeasure positive;
  FiniteSignedMeasure negative;
};
JordanDecomposition jordan_decompose(const FiniteSignedMeasure& mu);

}  // namespace ergokit
