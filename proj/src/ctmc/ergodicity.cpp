#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ergokit/ctmc.hpp"
#include "ergokit/errors.hpp"

namespace ergokit::ctmc {

namespace {

constexpr double kTailResolution = 5.0;
constexpr std::size_t kMaxSkeletonTerms = 1000000;
constexpr double kRelativeCutoff = 1e-14;

double weighted_row_distance(const Matrix& p, Eigen::Index x, const Vector& other,
                             std::span<const double> w) {
  double s = 0.0;
  for (Eigen::Index y = 0; y < p.cols(); ++y) s += w[static_cast<std::size_t>(y)] * std::abs(p(x, y) - other(y));
  return s;
}

Vector as_vector(std::span<const double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

void require_finite_v(const RateMatrix& q, std::span<const double> v) {
  if (v.size() != q.size()) throw InvalidArgument("V has the wrong length");
  for (double x : v) {
    if (!std::isfinite(x) || x < 0.0) throw InvalidArgument("V must be finite and nonnegative everywhere");
  }
}

void require_pairs(const RateMatrix& q, std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  for (const auto& [x, y] : pairs) {
    if (x >= q.size() || y >= q.size()) throw InvalidArgument("state pair outside the state space");
  }
}

}  // namespace

DecayCurve fnorm_decay_curve(const RateMatrix& q, const WeightTable& f, std::size_t x,
                             std::span<const double> t_grid) {
  if (x >= q.size()) throw InvalidArgument("decay curve: initial state outside the state space");
  if (f.size() != q.size()) throw InvalidArgument("decay curve: weight length mismatch");
  const Vector pi = as_vector(stationary_distribution(q));
  const std::vector<double> ones(q.size(), 1.0);
  DecayCurve out;
  for (double t : t_grid) {
    const Matrix p = transition_semigroup(q, t).matrix();
    const auto xi = static_cast<Eigen::Index>(x);
    out.t.push_back(t);
    out.f_norm.push_back(weighted_row_distance(p, xi, pi, f.values()));
    out.tv.push_back(weighted_row_distance(p, xi, pi, ones));
  }
  // Compare in grid order of increasing t; rounding noise near zero is tolerated.
  std::vector<std::size_t> order(out.t.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return out.t[a] < out.t[b]; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (out.tv[order[i]] > out.tv[order[i - 1]] + 1e-12) out.tv_non_increasing = false;
  }
  return out;
}

ConvergenceIntegrals theorem2_bound(const RateMatrix& q, const WeightTable& f,
                                    std::span<const double> v, double t_max,
                                    std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  require_finite_v(q, v);
  require_pairs(q, pairs);
  if (f.size() != q.size()) throw InvalidArgument("theorem2_bound: weight length mismatch");
  ConvergenceIntegrals out;
  out.gap = spectral_gap(q);
  out.t_max = t_max;
  if (!(out.gap > 0.0)) throw InvalidArgument("theorem2_bound: chain has no spectral gap");
  if (!(out.gap * t_max >= kTailResolution)) {
    throw InvalidArgument("theorem2_bound: T_max too small to resolve the tail (gap * T_max = " +
                          std::to_string(out.gap * t_max) + ")");
  }
  const Vector pi = as_vector(stationary_distribution(q));
  const auto& w = f.values();

  auto integrate_tail = [&](const std::function<double(double)>& integrand, double& value,
                            double& error) {
    const auto quad = numerics::integrate(integrand, 0.0, t_max);
    const double tail = integrand(t_max) / out.gap;
    value = quad.value + tail;
    error = quad.error + tail;
  };

  for (const auto& [x, y] : pairs) {
    PairIntegral pr{x, y};
    if (x != y) {
      integrate_tail(
          [&, x = x, y = y](double t) {
            const Matrix p = numerics::expm(t * q.matrix());
            return weighted_row_distance(p, static_cast<Eigen::Index>(x),
                                         p.row(static_cast<Eigen::Index>(y)).transpose(), w);
          },
          pr.integral, pr.error);
    }
    pr.ratio = pr.integral / (v[x] + v[y] + 1.0);
    out.pair_constant = std::max(out.pair_constant, pr.ratio);
    out.pairs.push_back(pr);
  }
  for (std::size_t x = 0; x < q.size(); ++x) {
    StateIntegral st{x};
    integrate_tail(
        [&](double t) {
          const Matrix p = numerics::expm(t * q.matrix());
          return weighted_row_distance(p, static_cast<Eigen::Index>(x), pi, w);
        },
        st.integral, st.error);
    st.ratio = st.integral / (v[x] + 1.0);
    out.state_constant = std::max(out.state_constant, st.ratio);
    out.states.push_back(st);
  }
  if (!std::isfinite(out.pair_constant) || !std::isfinite(out.state_constant)) {
    throw NumericalError("theorem2_bound: non-finite convergence integral");
  }
  return out;
}

SkeletonSums skeleton_sums(const RateMatrix& q, const WeightTable& f, double interval,
                           std::span<const double> v,
                           std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  require_finite_v(q, v);
  require_pairs(q, pairs);
  const auto fd = f_delta(q, f, interval);
  const Matrix p = transition_semigroup(q, interval).matrix();
  const Vector pi = as_vector(stationary_distribution(q));
  const double gap = spectral_gap(q);
  const double rho = std::isfinite(gap) ? std::exp(-gap * interval) : 0.0;
  const auto n = static_cast<Eigen::Index>(q.size());

  SkeletonSums out;
  out.interval = interval;

  // Rows of P^{k Delta} advance together; all sums share the same horizon.
  Matrix pk = Matrix::Identity(n, n);
  std::vector<double> pair_sum(pairs.size(), 0.0);
  std::vector<double> state_sum(q.size(), 0.0);
  std::vector<double> pair_last(pairs.size(), 0.0);
  std::vector<double> state_last(q.size(), 0.0);
  std::size_t k = 0;
  for (; k < kMaxSkeletonTerms; ++k) {
    double largest = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto [x, y] = pairs[i];
      const double term = weighted_row_distance(pk, static_cast<Eigen::Index>(x),
                                                pk.row(static_cast<Eigen::Index>(y)).transpose(), fd);
      pair_sum[i] += term;
      pair_last[i] = term;
      largest = std::max(largest, term);
    }
    for (Eigen::Index x = 0; x < n; ++x) {
      const double term = weighted_row_distance(pk, x, pi, fd);
      state_sum[static_cast<std::size_t>(x)] += term;
      state_last[static_cast<std::size_t>(x)] = term;
      largest = std::max(largest, term);
    }
    // Terms level off at round-off size, so the cutoff is relative to the sums.
    double scale = 0.0;
    for (double v : pair_sum) scale = std::max(scale, v);
    for (double v : state_sum) scale = std::max(scale, v);
    if (largest <= kRelativeCutoff * scale) break;
    pk = pk * p;
  }
  out.terms = k + 1;
  const double tail_factor = rho < 1.0 ? rho / (1.0 - rho) : 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [x, y] = pairs[i];
    PairSum ps{x, y, pair_sum[i] + pair_last[i] * tail_factor};
    ps.ratio = ps.sum / (v[x] + v[y] + 1.0);
    out.pair_constant = std::max(out.pair_constant, ps.ratio);
    out.pairs.push_back(ps);
  }
  for (std::size_t x = 0; x < q.size(); ++x) {
    StateSum ss{x, state_sum[x] + state_last[x] * tail_factor};
    ss.ratio = ss.sum / (v[x] + 1.0);
    out.state_constant = std::max(out.state_constant, ss.ratio);
    out.states.push_back(ss);
  }
  return out;
}

NormEquivalence norm_equiv_check(const RateMatrix& q, const FiniteSignedMeasure& mu,
                                 const WeightTable& f, double interval) {
  if (mu.size() != q.size()) throw InvalidArgument("norm_equiv_check: measure length mismatch");
  const auto fd = f_delta(q, f, interval);
  NormEquivalence out;
  out.lhs = weighted_norm(mu, fd);
  const Vector m = as_vector(mu.mass());
  const auto& w = f.values();
  const auto quad = numerics::integrate(
      [&](double t) {
        const Vector moved = (m.transpose() * numerics::expm(t * q.matrix())).transpose();
        double s = 0.0;
        for (Eigen::Index y = 0; y < moved.size(); ++y) s += w[static_cast<std::size_t>(y)] * std::abs(moved(y));
        return s;
      },
      0.0, interval);
  out.rhs = quad.value;
  out.quadrature_error = quad.error;
  return out;
}

Minorization minorization_certificate(const RateMatrix& q, const FiniteSet& c, double t) {
  if (!(t > 0.0)) throw InvalidArgument("minorization horizon must be positive");
  if (c.empty()) throw InvalidArgument("minorization set is empty");
  if (c.universe() != q.size()) throw InvalidArgument("minorization set universe mismatch");
  const Matrix p = transition_semigroup(q, t).matrix();
  Table raw(q.size(), std::numeric_limits<double>::infinity());
  for (std::size_t x : c.members()) {
    for (std::size_t y = 0; y < q.size(); ++y) raw[y] = std::min(raw[y], p(x, y));
  }
  Minorization out;
  for (double r : raw) out.epsilon += r;
  if (out.epsilon > 0.0) {
    out.nu = raw;
    for (auto& r : out.nu) r /= out.epsilon;
  } else {
    out.epsilon = 0.0;
  }
  return out;
}

IrreducibilityReport irreducibility_aperiodicity_check(const RateMatrix& q) {
  const auto n = q.size();
  const auto& reach = q.reachability();
  std::vector<std::size_t> class_of(n, n);
  IrreducibilityReport out;
  for (std::size_t i = 0; i < n; ++i) {
    if (class_of[i] != n) continue;
    const std::size_t id = out.communicating_classes++;
    bool closed = true;
    for (std::size_t j = 0; j < n; ++j) {
      if (reach[i][j] && reach[j][i]) class_of[j] = id;
      if (reach[i][j] && !reach[j][i]) closed = false;
    }
    if (closed) ++out.closed_classes;
  }
  out.irreducible = out.communicating_classes == 1;
  // In continuous time P^t(x,y) > 0 for every t > 0 once y is reachable from
  // x, so irreducibility already gives aperiodicity.
  out.aperiodic = out.irreducible;
  std::ostringstream s;
  if (out.irreducible) {
    s << "irreducible with psi = counting measure; aperiodic (P^t > 0 entrywise for all t > 0)";
  } else {
    s << "reducible: " << out.communicating_classes << " communicating classes, "
      << out.closed_classes << " closed";
  }
  out.summary = s.str();
  return out;
}

DominationReport exponential_domination_check(const RateMatrix& q, const WeightTable& f,
                                              double beta, std::span<const double> t_grid) {
  if (!(beta > 0.0)) throw InvalidArgument("domination check: beta must be positive");
  if (f.size() != q.size()) throw InvalidArgument("domination check: weight length mismatch");
  const Vector fv = as_vector(f.values());
  DominationReport out;
  out.max_ratio = -std::numeric_limits<double>::infinity();
  for (double t : t_grid) {
    const Vector pf = transition_semigroup(q, t).matrix() * fv;
    const double scale = beta * std::exp(beta * t);
    for (Eigen::Index x = 0; x < pf.size(); ++x) {
      const double ratio = pf(x) / (scale * fv(x));
      if (ratio > out.max_ratio) {
        out.max_ratio = ratio;
        out.worst_t = t;
        out.worst_state = static_cast<std::size_t>(x);
      }
    }
  }
  out.holds = out.max_ratio <= 1.0 + 1e-12;
  return out;
}

}  // namespace ergokit::ctmc
