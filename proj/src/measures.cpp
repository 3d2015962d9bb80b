#include "ergokit/measures.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ergokit/errors.hpp"

namespace ergokit {

FiniteStateSpace::FiniteStateSpace(std::size_t n, std::vector<std::string> labels)
    : n_(n), labels_(std::move(labels)) {
  if (n_ == 0) throw InvalidArgument("state space needs at least one state");
  if (!labels_.empty()) {
    if (labels_.size() != n_) throw InvalidArgument("label count does not match state count");
    std::set<std::string> seen(labels_.begin(), labels_.end());
    if (seen.size() != labels_.size()) throw InvalidArgument("state labels must be unique");
  }
}

std::string FiniteStateSpace::label(std::size_t i) const {
  return labels_.empty() ? std::to_string(i) : labels_.at(i);
}

WeightTable::WeightTable(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidArgument("weight table is empty");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= 1.0) || !std::isfinite(values_[i])) {
      throw InvalidArgument("weight f must be finite and >= 1 (state " + std::to_string(i) + ")");
    }
  }
}

FiniteSignedMeasure FiniteSignedMeasure::dirac(std::size_t n, std::size_t at) {
  std::vector<double> mass(n, 0.0);
  mass.at(at) = 1.0;
  return FiniteSignedMeasure(std::move(mass));
}

double FiniteSignedMeasure::total() const {
  double s = 0.0;
  for (double m : mass_) s += m;
  return s;
}

double FiniteSignedMeasure::integrate(std::span<const double> g) const {
  if (g.size() != mass_.size()) throw InvalidArgument("measure/function length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += mass_[i] * g[i];
  return s;
}

FiniteSet::FiniteSet(std::size_t n, std::vector<std::size_t> members)
    : n_(n), members_(std::move(members)), mask_(n, false) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  for (std::size_t m : members_) {
    if (m >= n_) throw InvalidArgument("set member " + std::to_string(m) + " outside state space");
    mask_[m] = true;
  }
}

FiniteSet FiniteSet::all(std::size_t n) {
  std::vector<std::size_t> members(n);
  for (std::size_t i = 0; i < n; ++i) members[i] = i;
  return FiniteSet(n, std::move(members));
}

std::vector<std::size_t> FiniteSet::complement() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n_; ++i) {
    if (!mask_[i]) out.push_back(i);
  }
  return out;
}

std::vector<double> FiniteSet::indicator() const {
  std::vector<double> out(n_, 0.0);
  for (std::size_t m : members_) out[m] = 1.0;
  return out;
}

double f_norm_of_function(std::span<const double> g, const WeightTable& f) {
  if (g.size() != f.size()) throw InvalidArgument("f-norm: function and weight lengths differ");
  double best = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) best = std::max(best, std::abs(g[i]) / f[i]);
  return best;
}

SampledNorm f_norm_of_function(const ScalarField& g, const ScalarField& f,
                               std::span<const Point> sample) {
  if (g.dimension() != f.dimension()) throw InvalidArgument("f-norm: field dimensions differ");
  if (sample.empty()) throw InvalidArgument("f-norm: continuous case needs a nonempty sample");
  SampledNorm out;
  out.sample_size = sample.size();
  out.argmax = sample.front();
  for (const auto& x : sample) {
    const double w = f(x);
    if (!(w >= 1.0)) throw InvalidArgument("weight f must be >= 1 at every sample point");
    const double ratio = std::abs(g(x)) / w;
    if (ratio > out.value) {
      out.value = ratio;
      out.argmax = x;
    }
  }
  return out;
}

double f_norm_of_measure(const FiniteSignedMeasure& mu, const WeightTable& f) {
  return weighted_norm(mu, f.values());
}

double weighted_norm(const FiniteSignedMeasure& mu, std::span<const double> w) {
  if (mu.size() != w.size()) throw InvalidArgument("f-norm: measure and weight lengths differ");
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (w[i] < 0.0) throw InvalidArgument("f-norm: weight must be nonnegative");
    s += w[i] * std::abs(mu[i]);
  }
  return s;
}

JordanDecomposition jordan_decompose(const FiniteSignedMeasure& mu) {
  std::vector<double> pos(mu.size(), 0.0);
  std::vector<double> neg(mu.size(), 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] > 0.0) pos[i] = mu[i];
    if (mu[i] < 0.0) neg[i] = -mu[i];
  }
  return {FiniteSignedMeasure(std::move(pos)), FiniteSignedMeasure(std::move(neg))};
}

}  // namespace ergokit
