#include <algorithm>
#include <cmath>
#include <limits>

#include "ergokit/ctmc.hpp"
#include "ergokit/errors.hpp"

namespace ergokit::ctmc {

namespace {

constexpr std::size_t kMaxMinorizationHorizon = 10000;
constexpr std::size_t kMinorizationGrid = 64;

Vector to_vector(std::span<const double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

Table to_table(const Vector& v) { return Table(v.data(), v.data() + v.size()); }

void require_interval(double interval) {
  if (!(interval > 0.0) || !std::isfinite(interval)) {
    throw InvalidArgument("skeleton interval must be positive and finite");
  }
}

// Solves U = g + P 1_{B^c} U off B for the skeleton kernel P; returns U on B^c
// (zero on B).
Vector solve_off_target(const Matrix& p, const Vector& rhs, const FiniteSet& b) {
  const auto outside = b.complement();
  const auto m = static_cast<Eigen::Index>(outside.size());
  Vector out = Vector::Zero(p.rows());
  if (m == 0) return out;
  Matrix a(m, m);
  Vector r(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    r(i) = rhs(static_cast<Eigen::Index>(outside[i]));
    for (Eigen::Index j = 0; j < m; ++j) {
      a(i, j) = (i == j ? 1.0 : 0.0) - p(outside[i], outside[j]);
    }
  }
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) throw NumericalError("skeleton target set is unreachable");
  const Vector sol = lu.solve(r);
  for (Eigen::Index i = 0; i < m; ++i) out(static_cast<Eigen::Index>(outside[i])) = sol(i);
  return out;
}

void require_reachable(const RateMatrix& q, const FiniteSet& b) {
  if (b.empty()) throw InvalidArgument("skeleton target set is empty");
  if (b.universe() != q.size()) throw InvalidArgument("skeleton target set universe mismatch");
  const auto& reach = q.reachability();
  for (std::size_t x : b.complement()) {
    bool ok = false;
    for (std::size_t y : b.members()) ok = ok || reach[x][y];
    if (!ok) throw NumericalError("skeleton target set is unreachable from state " + std::to_string(x));
  }
}

double min_entry_on(const Matrix& p, const FiniteSet& c, const Vector& ind) {
  double best = std::numeric_limits<double>::infinity();
  const Vector pc = p * ind;
  for (std::size_t y : c.members()) best = std::min(best, pc(static_cast<Eigen::Index>(y)));
  return best;
}

}  // namespace

Skeleton skeleton_kernel(const RateMatrix& q, double interval) {
  require_interval(interval);
  return {transition_semigroup(q, interval), interval < 1.0};
}

Table f_delta(const RateMatrix& q, const WeightTable& f, double interval) {
  require_interval(interval);
  if (f.size() != q.size()) throw InvalidArgument("f_delta: weight length mismatch");
  const auto e = numerics::exp_with_integral(q.matrix(), to_vector(f.values()), interval);
  return to_table(e.integral);
}

Table skeleton_hitting_sum(const RateMatrix& q, double interval, std::span<const double> g,
                           const FiniteSet& b) {
  require_interval(interval);
  require_reachable(q, b);
  if (g.size() != q.size()) throw InvalidArgument("skeleton sum: weight length mismatch");
  const Matrix p = transition_semigroup(q, interval).matrix();
  const Vector gv = to_vector(g);
  const Vector ind_b = to_vector(b.indicator());
  // G = g + P[1_{B^c} G + 1_B g]; first solve on B^c, then read off on B.
  const Vector on_b = gv.cwiseProduct(ind_b);
  const Vector rhs = gv + p * on_b;
  const Vector off = solve_off_target(p, rhs, b);
  const Vector g_all = gv + p * (off + on_b);
  return to_table(g_all);
}

Table skeleton_entrance_sum(const RateMatrix& q, double interval, std::span<const double> g,
                            const FiniteSet& b) {
  require_interval(interval);
  require_reachable(q, b);
  if (g.size() != q.size()) throw InvalidArgument("skeleton sum: weight length mismatch");
  const Matrix p = transition_semigroup(q, interval).matrix();
  const Vector gv = to_vector(g);
  const Vector ind_b = to_vector(b.indicator());
  // U = g on B, U = g + P U off B.
  const Vector on_b = gv.cwiseProduct(ind_b);
  const Vector rhs = gv + p * on_b;
  const Vector off = solve_off_target(p, rhs, b);
  return to_table(off + on_b);
}

Table entrance_probability(const RateMatrix& q, const FiniteSet& c, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("entrance probability: t must be nonnegative");
  Matrix absorbed = q.matrix();
  for (std::size_t x : c.members()) absorbed.row(static_cast<Eigen::Index>(x)).setZero();
  const Vector s = numerics::expm(t * absorbed) * to_vector(c.indicator());
  Table out = to_table(s);
  for (auto& v : out) v = std::clamp(v, 0.0, 1.0);
  // tau_C = 0 from inside C.
  for (std::size_t x : c.members()) out[x] = 1.0;
  return out;
}

SkeletonLyapunov construct_skeleton_lyapunov(const RateMatrix& q, const WeightTable& f,
                                             double interval, const FiniteSet& c) {
  require_interval(interval);
  require_reachable(q, c);
  const auto n = static_cast<Eigen::Index>(q.size());
  SkeletonLyapunov out;
  out.interval = interval;
  out.below_unit_interval = interval < 1.0;
  out.f_delta = f_delta(q, f, interval);
  out.hitting = hitting_functional(q, f, c, 0.0);
  out.hitting_r1 = hitting_functional(q, f, c, 1.0);
  out.entrance_prob = entrance_probability(q, c, interval);

  const auto g_delta = hitting_functional(q, f, c, interval);
  for (std::size_t y : c.members()) out.b0 = std::max(out.b0, g_delta[y]);

  out.entrance_sum = skeleton_entrance_sum(q, interval, out.entrance_prob, c);

  const Matrix p = transition_semigroup(q, interval).matrix();
  const Vector fd = to_vector(out.f_delta);
  const Vector ind_c = to_vector(c.indicator());

  // Drift of a candidate without the b 1_C term: P V - V + f_Delta.
  auto drift = [&](const Vector& v) -> Vector { return p * v - v + fd; };

  const Vector v_delta = to_vector(out.hitting) + out.b0 * to_vector(out.entrance_sum);
  out.v_delta = to_table(v_delta);
  const Vector d = drift(v_delta);
  for (std::size_t x : c.members()) out.b = std::max(out.b, d(static_cast<Eigen::Index>(x)));
  const Vector margins = d - out.b * ind_c;
  out.margins = to_table(margins);
  out.max_margin = margins.maxCoeff();
  out.distance_to_hitting = (v_delta - to_vector(out.hitting)).cwiseAbs().maxCoeff();

  auto off_c_max = [&](const Vector& v) {
    const Vector dv = drift(v);
    double worst = -std::numeric_limits<double>::infinity();
    for (Eigen::Index x = 0; x < n; ++x) {
      if (!c.contains(static_cast<std::size_t>(x))) worst = std::max(worst, dv(x));
    }
    return worst;
  };
  const auto tau_sum = skeleton_hitting_sum(q, interval, out.entrance_prob, c);
  out.off_c_margin_hitting_sum_variant =
      off_c_max(to_vector(out.hitting) + out.b0 * to_vector(tau_sum));
  out.off_c_margin_r1_variant =
      off_c_max(to_vector(out.hitting_r1) + out.b0 * to_vector(out.entrance_sum));

  // Smallest k with eps(k) = min_{y in C, r in [0, Delta]} P^{k Delta - r}(y, C) > 0.
  for (std::size_t k = 1; k <= kMaxMinorizationHorizon; ++k) {
    double eps = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j <= kMinorizationGrid; ++j) {
      const double r = interval * static_cast<double>(j) / static_cast<double>(kMinorizationGrid);
      const double t = static_cast<double>(k) * interval - r;
      eps = std::min(eps, min_entry_on(numerics::expm(t * q.matrix()), c, ind_c));
    }
    if (eps > 0.0) {
      out.k0 = k;
      out.eps_grid = eps;
      break;
    }
  }
  if (out.k0 == 0) throw NumericalError("no minorization horizon found for the skeleton");

  const Vector pk = numerics::expm(static_cast<double>(out.k0) * interval * q.matrix()) * ind_c;
  out.eps_exact = std::numeric_limits<double>::infinity();
  for (Eigen::Index x = 0; x < n; ++x) {
    const double s = out.entrance_prob[static_cast<std::size_t>(x)];
    if (s > 0.0) out.eps_exact = std::min(out.eps_exact, pk(x) / s);
  }
  out.eps0 = std::min(out.eps_grid, out.eps_exact);
  out.min_minorization_margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index x = 0; x < n; ++x) {
    out.min_minorization_margin =
        std::min(out.min_minorization_margin,
                 pk(x) - out.eps0 * out.entrance_prob[static_cast<std::size_t>(x)]);
  }
  out.textbook_b = out.b0 * static_cast<double>(out.k0 + 1) / out.eps0;
  return out;
}

}  // namespace ergokit::ctmc
