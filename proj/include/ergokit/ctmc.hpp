#pragma once

// Exact finite-state engine. Every functional of a continuous-time chain that
// the toolkit reasons about (semigroup, resolvents, hitting integrals, skeleton
// sums, weighted-norm decay) is computed here by dense linear algebra, and
// serves as the oracle for the Monte Carlo side.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ergokit/measures.hpp"
#include "ergokit/numerics.hpp"

namespace ergokit::ctmc {

using numerics::Matrix;
using numerics::Vector;
using Table = std::vector<double>;

inline constexpr double kIdentityTolerance = 1e-10;
inline constexpr double kCertificateTolerance = 1e-9;
inline constexpr double kQuadratureTolerance = 1e-6;

// Generator Q of a chain on n states: off-diagonal rates >= 0, rows summing to
// zero up to 1e-12 relative to the row's exit rate.
class RateMatrix {
public:
  explicit RateMatrix(Matrix q, std::vector<std::string> labels = {});
  static RateMatrix from_rows(const std::vector<std::vector<double>>& rows,
                              std::vector<std::string> labels = {});

  std::size_t size() const { return static_cast<std::size_t>(q_.rows()); }
  const Matrix& matrix() const { return q_; }
  double operator()(std::size_t i, std::size_t j) const { return q_(i, j); }
  double exit_rate(std::size_t i) const { return -q_(i, i); }
  const FiniteStateSpace& space() const { return space_; }

  // reachable(i)[j]: j can be reached from i through positive rates (i reaches i).
  const std::vector<std::vector<bool>>& reachability() const { return reach_; }
  bool irreducible() const;

  RateMatrix permuted(std::span<const std::size_t> perm) const;

private:
  Matrix q_;
  FiniteStateSpace space_;
  std::vector<std::vector<bool>> reach_;
};

class TransitionKernel {
public:
  TransitionKernel(Matrix p, double horizon);

  const Matrix& matrix() const { return p_; }
  double horizon() const { return horizon_; }
  std::size_t size() const { return static_cast<std::size_t>(p_.rows()); }
  double operator()(std::size_t i, std::size_t j) const { return p_(i, j); }

private:
  Matrix p_;
  double horizon_;
};

// (V, f, C, b, delta) asserting QV <= -delta f + b 1_C where V is finite.
// V entries lie in (0, +inf]; at least one is finite.
class DriftCertificate {
public:
  DriftCertificate(Table v, WeightTable f, FiniteSet c, double b, double delta = 1.0);

  const Table& V() const { return v_; }
  const WeightTable& f() const { return f_; }
  const FiniteSet& C() const { return c_; }
  double b() const { return b_; }
  double delta() const { return delta_; }

  DriftCertificate scaled(double factor) const;

private:
  Table v_;
  WeightTable f_;
  FiniteSet c_;
  double b_;
  double delta_;
};

// ---- semigroup and stationary law ----------------------------------------

TransitionKernel transition_semigroup(const RateMatrix& q, double t);
Table stationary_distribution(const RateMatrix& q);
double pi_f(const RateMatrix& q, const WeightTable& f);

// Second-largest real part of the spectrum, negated: the decay rate of P^t - Pi.
double spectral_gap(const RateMatrix& q);

// ---- resolvents ------------------------------------------------------------

// (alpha I - Q)^{-1}.
Matrix resolvent(const RateMatrix& q, double alpha);
// (diag(h) - Q)^{-1}; throws NumericalError when h vanishes on a closed class.
Matrix generalized_resolvent(const RateMatrix& q, std::span<const double> h);
// max |R_h - R_g - R_g I_{g-h} R_h| for g >= h >= 0.
double verify_resolvent_equation(const RateMatrix& q, std::span<const double> g,
                                 std::span<const double> h);
// max |Q(Rg) - (Rg - g)| with R the unit resolvent.
double generator_of_resolvent_check(const RateMatrix& q, std::span<const double> g);

// ---- hitting functionals and the converse Lyapunov function ----------------

// E_x int_0^{tau_B(r)} g(Phi_t) dt with tau_B(r) = inf{t >= r : Phi_t in B}, for
// any nonnegative g.
Table hitting_functional(const RateMatrix& q, std::span<const double> g, const FiniteSet& b,
                         double r);
inline Table hitting_functional(const RateMatrix& q, const WeightTable& f, const FiniteSet& b,
                                double r) {
  return hitting_functional(q, f.values(), b, r);
}

// V = R_{1_C} f with b = max_C V and delta = 1.
DriftCertificate lyapunov_from_resolvent(const RateMatrix& q, const WeightTable& f,
                                         const FiniteSet& c);
// max |QV + f - 1_C V|, which vanishes exactly for the resolvent construction.
double drift_identity_residual(const RateMatrix& q, const WeightTable& f, const FiniteSet& c,
                               std::span<const double> v);

struct CertificateMargins {
  // (QV)(x) + delta f(x) - b 1_C(x); empty where V(x) is infinite.
  std::vector<std::optional<double>> margin;
  double max_margin = 0.0;
  std::size_t worst_state = 0;
  bool valid = false;
};
CertificateMargins validate_certificate(const RateMatrix& q, const DriftCertificate& cert,
                                        double tolerance = kCertificateTolerance);

// ---- skeletons -------------------------------------------------------------

struct Skeleton {
  TransitionKernel kernel;
  // Proofs about skeletons conventionally take Delta >= 1; smaller values are
  // accepted and flagged here.
  bool below_unit_interval = false;
};
Skeleton skeleton_kernel(const RateMatrix& q, double interval);

// f_Delta = int_0^Delta P^t f dt.
Table f_delta(const RateMatrix& q, const WeightTable& f, double interval);

// E_x sum_{i=0}^{tau} g(X(i)) with tau = min{i >= 1 : X(i) in B} for the skeleton.
Table skeleton_hitting_sum(const RateMatrix& q, double interval, std::span<const double> g,
                           const FiniteSet& b);
// Same with the entrance time sigma = min{i >= 0 : X(i) in B}.
Table skeleton_entrance_sum(const RateMatrix& q, double interval, std::span<const double> g,
                            const FiniteSet& b);

// P_x{tau_C <= t} through the chain absorbed on C.
Table entrance_probability(const RateMatrix& q, const FiniteSet& c, double t);

struct SkeletonLyapunov {
  double interval = 0.0;
  bool below_unit_interval = false;
  Table f_delta;
  Table hitting;          // V0 = G_C(., f; 0)
  Table hitting_r1;       // G_C(., f; 1), reported alongside
  Table entrance_prob;    // s(x) = P_x{tau_C <= Delta}
  Table entrance_sum;     // U(x) = E_x sum_{i=0}^{sigma_C} s(X(i))
  double b0 = 0.0;        // max_{y in C} G_C(y, f; Delta)
  Table v_delta;          // V0 + b0 U
  double b = 0.0;         // smallest b making the skeleton drift inequality hold
  Table margins;          // P^Delta V - V + f_Delta - b 1_C
  double max_margin = 0.0;
  double distance_to_hitting = 0.0;  // max |V_Delta - G_C(., f)|

  std::size_t k0 = 0;
  double eps_grid = 0.0;  // min over y in C and an r-grid of P^{k0 Delta - r}(y, C)
  double eps_exact = 0.0; // min_x P^{k0 Delta}(x, C) / s(x)
  double eps0 = 0.0;
  double min_minorization_margin = 0.0;  // min_x P^{k0 Delta}(x,C) - eps0 s(x)
  double textbook_b = 0.0;               // b0 (k0 + 1) / eps0

  // Alternative constructions, reported as data: worst margin off C.
  double off_c_margin_hitting_sum_variant = 0.0;  // b0 G^Delta_C(., s) with tau >= 1
  double off_c_margin_r1_variant = 0.0;           // V0 replaced by G_C(., f; 1)
};
SkeletonLyapunov construct_skeleton_lyapunov(const RateMatrix& q, const WeightTable& f,
                                             double interval, const FiniteSet& c);

// ---- ergodicity ------------------------------------------------------------

struct DecayCurve {
  std::vector<double> t;
  std::vector<double> f_norm;  // ||P^t(x,.) - pi||_f
  std::vector<double> tv;      // ||P^t(x,.) - pi||_1
  bool tv_non_increasing = true;
};
DecayCurve fnorm_decay_curve(const RateMatrix& q, const WeightTable& f, std::size_t x,
                             std::span<const double> t_grid);

struct PairIntegral {
  std::size_t x = 0;
  std::size_t y = 0;
  double integral = 0.0;  // int_0^inf ||P^t(x,.) - P^t(y,.)||_f dt
  double error = 0.0;     // quadrature error estimate + tail estimate
  double ratio = 0.0;     // integral / (V(x) + V(y) + 1)
};
struct StateIntegral {
  std::size_t x = 0;
  double integral = 0.0;  // int_0^inf ||P^t(x,.) - pi||_f dt
  double error = 0.0;
  double ratio = 0.0;     // integral / (V(x) + 1)
};
struct ConvergenceIntegrals {
  double gap = 0.0;
  double t_max = 0.0;
  std::vector<PairIntegral> pairs;
  std::vector<StateIntegral> states;
  double pair_constant = 0.0;   // max pair ratio
  double state_constant = 0.0;  // max state ratio
};
// Truncates at t_max and adds the tail estimate integrand(t_max) / gap. Throws
// InvalidArgument when gap * t_max < 5 (the tail is not resolved).
ConvergenceIntegrals theorem2_bound(const RateMatrix& q, const WeightTable& f,
                                    std::span<const double> v, double t_max,
                                    std::span<const std::pair<std::size_t, std::size_t>> pairs);

struct PairSum {
  std::size_t x = 0;
  std::size_t y = 0;
  double sum = 0.0;  // sum_k ||P^{k Delta}(x,.) - P^{k Delta}(y,.)||_{f_Delta}
  double ratio = 0.0;
};
struct StateSum {
  std::size_t x = 0;
  double sum = 0.0;  // sum_k ||P^{k Delta}(x,.) - pi||_{f_Delta}
  double ratio = 0.0;
};
struct SkeletonSums {
  double interval = 0.0;
  std::size_t terms = 0;
  std::vector<PairSum> pairs;
  std::vector<StateSum> states;
  double pair_constant = 0.0;
  double state_constant = 0.0;
};
SkeletonSums skeleton_sums(const RateMatrix& q, const WeightTable& f, double interval,
                           std::span<const double> v,
                           std::span<const std::pair<std::size_t, std::size_t>> pairs);

struct NormEquivalence {
  double lhs = 0.0;  // ||mu||_{f_Delta}
  double rhs = 0.0;  // int_0^Delta ||mu P^t||_f dt
  double quadrature_error = 0.0;
};
NormEquivalence norm_equiv_check(const RateMatrix& q, const FiniteSignedMeasure& mu,
                                 const WeightTable& f, double interval);

struct Minorization {
  double epsilon = 0.0;
  Table nu;  // empty when epsilon == 0
};
Minorization minorization_certificate(const RateMatrix& q, const FiniteSet& c, double t);

struct IrreducibilityReport {
  bool irreducible = false;
  bool aperiodic = false;
  std::size_t communicating_classes = 0;
  std::size_t closed_classes = 0;
  std::string summary;
};
IrreducibilityReport irreducibility_aperiodicity_check(const RateMatrix& q);

struct DominationReport {
  double max_ratio = 0.0;  // max_{t,x} (P^t f)(x) / (beta e^{beta t} f(x))
  double worst_t = 0.0;
  std::size_t worst_state = 0;
  bool holds = false;
};
DominationReport exponential_domination_check(const RateMatrix& q, const WeightTable& f,
                                              double beta, std::span<const double> t_grid);

}  // namespace ergokit::ctmc
