#pragma once

// Euler-Maruyama backend for dPhi = u(Phi) dt + M(Phi) dB on R^d with k-dimensional
// Brownian noise, plus the generator
//
//   Dh(x) = sum_i u_i(x) d_i h(x) + 1/2 sum_ij Sigma_ij(x) d_i d_j h(x),  Sigma = M M^T
//
// and Monte Carlo estimators of hitting integrals, the exponential-clock
// Lyapunov function and ergodic averages.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ergokit/fields.hpp"
#include "ergokit/kernels.hpp"
#include "ergokit/monte_carlo.hpp"

namespace ergokit::diffusion {

inline constexpr double kDefaultTimeCap = 1e3;

class DiffusionModel {
public:
  using VectorFn = std::function<void(std::span<const double>, std::span<double>)>;

  // `dispersion` writes M(x) row-major into a d*k buffer.
  DiffusionModel(std::size_t d, std::size_t k, VectorFn drift, VectorFn dispersion,
                 std::string name = {});

  static DiffusionModel from_expressions(std::size_t d, std::size_t k,
                                         const std::vector<std::string>& drift,
                                         const std::vector<std::vector<std::string>>& dispersion);
  // "ou": du = -x dt + sqrt(2) dB.  "double-well": du = (x - x^3) dt + sqrt(2) dB.
  static DiffusionModel builtin(std::string_view name);

  std::size_t state_dimension() const { return d_; }
  std::size_t noise_dimension() const { return k_; }
  const std::string& name() const { return name_; }

  void drift(std::span<const double> x, std::span<double> out) const { drift_(x, out); }
  void dispersion(std::span<const double> x, std::span<double> out) const { dispersion_(x, out); }
  // Sigma(x) = M(x) M(x)^T, row-major d*d.
  void covariance(std::span<const double> x, std::span<double> out) const;

private:
  std::size_t d_;
  std::size_t k_;
  VectorFn drift_;
  VectorFn dispersion_;
  std::string name_;
};

struct PathSample {
  std::vector<double> times;
  std::vector<Point> states;
  // int_0^t 1_C(Phi_s) ds by the left-endpoint rule; empty without C.
  std::vector<double> occupation;
};

PathSample simulate_path(const DiffusionModel& model, const Point& x0, double dt, double horizon,
                         std::uint64_t seed, const std::optional<Region>& c = std::nullopt);

// Closed-form derivatives when h supplies both gradient and Hessian, central
// differences otherwise with step fd_step (default 1e-4 (1 + |x|)).
double generator_apply(const DiffusionModel& model, const ScalarField& h, std::span<const double> x,
                       std::optional<double> fd_step = std::nullopt);

struct FieldCertificate {
  ScalarField V;
  ScalarField f;
  Region C;
  double b = 0.0;
  double delta = 1.0;
};

struct DriftReport {
  std::vector<double> margins;  // DV + delta f - b 1_C per grid point
  double max_margin = 0.0;
  Point worst_point;
  double tolerance = 0.0;
  bool valid = false;
};

inline constexpr double kDriftTolerance = 1e-6;

DriftReport drift_condition_check(const DiffusionModel& model, const FieldCertificate& cert,
                                  std::span<const Point> grid,
                                  double tolerance = kDriftTolerance,
                                  kernels::Execution exec = kernels::Execution::Parallel);

// Points lower, lower + step, ... up to upper (inclusive within rounding) on a
// tensor grid.
std::vector<Point> uniform_grid(const Point& lower, const Point& upper, double step);

struct McOptions {
  std::size_t n_paths = 10000;
  double dt = 1e-2;
  std::uint64_t seed = 1;
  double time_cap = kDefaultTimeCap;
  kernels::Execution execution = kernels::Execution::Parallel;
};

// E_x0 int_0^{tau_C(r)} f dt with left-endpoint quadrature and left-endpoint
// membership tests on the time grid.
McEstimate mc_hitting_functional(const DiffusionModel& model, const ScalarField& f, const Region& c,
                                 double r, const Point& x0, const McOptions& options);

// E_x0 int_0^{tilde tau_C} f dt with an independent Exp(1) clock on the
// occupation time of C.
McEstimate mc_lyapunov(const DiffusionModel& model, const ScalarField& f, const Region& c,
                       const Point& x0, const McOptions& options);

// The same quantity as E_x0 int_0^inf f(Phi_t) exp(-occupation_C(t)) dt, truncated
// once the discount falls below 1e-12 or at the time cap.
McEstimate mc_lyapunov_integral_form(const DiffusionModel& model, const ScalarField& f,
                                     const Region& c, const Point& x0, const McOptions& options);

// E_x0 g(Phi_t) on a time grid, all times from the same paths.
std::vector<McEstimate> mc_semigroup(const DiffusionModel& model, const ScalarField& g,
                                     const Point& x0, std::span<const double> t_grid,
                                     const McOptions& options);

struct ErgodicAverage {
  double estimate = 0.0;
  double std_error = 0.0;  // batch means
  std::size_t n_batches = 0;
  std::size_t samples = 0;
};
ErgodicAverage ergodic_average(const DiffusionModel& model, const ScalarField& g, const Point& x0,
                               double horizon, double dt, double burn_in, std::uint64_t seed,
                               std::size_t n_batches = 50);

}  // namespace ergokit::diffusion
