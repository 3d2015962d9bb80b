#include <algorithm>
#include <cmath>
#include <limits>

#include "ergokit/ctmc.hpp"
#include "ergokit/errors.hpp"

namespace ergokit::ctmc {

namespace {

// Every state outside `target` must be able to reach it, else the
// killed generator restricted to the complement is singular.
void require_reachable(const RateMatrix& q, const FiniteSet& target) {
  const auto& reach = q.reachability();
  for (std::size_t x : target.complement()) {
    bool ok = false;
    for (std::size_t y : target.members()) ok = ok || reach[x][y];
    if (!ok) {
      throw NumericalError("target set is unreachable from state " + std::to_string(x));
    }
  }
}

}  // namespace

Table hitting_functional(const RateMatrix& q, std::span<const double> g, const FiniteSet& b,
                         double r) {
  const auto n = q.size();
  if (g.size() != n) throw InvalidArgument("hitting functional: weight length mismatch");
  if (b.universe() != n) throw InvalidArgument("hitting functional: set universe mismatch");
  if (b.empty()) throw InvalidArgument("hitting functional: target set is empty");
  if (!(r >= 0.0)) throw InvalidArgument("hitting functional: r must be nonnegative");
  for (double v : g) {
    if (!(v >= 0.0)) throw InvalidArgument("hitting functional: weight must be nonnegative");
  }
  require_reachable(q, b);

  // r = 0: G = 0 on B, (QG)(x) = -g(x) off B.
  const auto outside = b.complement();
  const auto m = static_cast<Eigen::Index>(outside.size());
  Vector g0 = Vector::Zero(static_cast<Eigen::Index>(n));
  if (m > 0) {
    Matrix sub(m, m);
    Vector rhs(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      rhs(i) = -g[outside[i]];
      for (Eigen::Index j = 0; j < m; ++j) sub(i, j) = q(outside[i], outside[j]);
    }
    const Vector sol = sub.partialPivLu().solve(rhs);
    for (Eigen::Index i = 0; i < m; ++i) g0(static_cast<Eigen::Index>(outside[i])) = sol(i);
  }
  if (r > 0.0) {
    // Markov property at time r: G(.;r) = int_0^r P^s g ds + P^r G(.;0).
    Vector gv(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) gv(static_cast<Eigen::Index>(i)) = g[i];
    const auto e = numerics::exp_with_integral(q.matrix(), gv, r);
    g0 = e.integral + e.exp * g0;
  }
  Table out(g0.data(), g0.data() + g0.size());
  for (auto& v : out) v = std::max(v, 0.0);
  return out;
}

DriftCertificate lyapunov_from_resolvent(const RateMatrix& q, const WeightTable& f,
                                         const FiniteSet& c) {
  if (f.size() != q.size() || c.universe() != q.size()) {
    throw InvalidArgument("lyapunov construction: size mismatch");
  }
  if (c.empty()) throw InvalidArgument("lyapunov construction: C is empty");
  const auto kill = c.indicator();
  const Matrix r = generalized_resolvent(q, kill);
  Vector fv(static_cast<Eigen::Index>(f.size()));
  for (std::size_t i = 0; i < f.size(); ++i) fv(static_cast<Eigen::Index>(i)) = f[i];
  const Vector v = r * fv;
  double b = 0.0;
  for (std::size_t x : c.members()) b = std::max(b, v(static_cast<Eigen::Index>(x)));
  return DriftCertificate(Table(v.data(), v.data() + v.size()), f, c, b, 1.0);
}

double drift_identity_residual(const RateMatrix& q, const WeightTable& f, const FiniteSet& c,
                               std::span<const double> v) {
  const auto n = q.size();
  if (v.size() != n || f.size() != n) throw InvalidArgument("drift identity: size mismatch");
  double worst = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    double qv = 0.0;
    for (std::size_t y = 0; y < n; ++y) qv += q(x, y) * v[y];
    const double r = qv + f[x] - (c.contains(x) ? v[x] : 0.0);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

CertificateMargins validate_certificate(const RateMatrix& q, const DriftCertificate& cert,
                                        double tolerance) {
  const auto n = q.size();
  if (cert.V().size() != n) throw InvalidArgument("certificate dimension does not match the chain");
  const auto& v = cert.V();
  CertificateMargins out;
  out.margin.resize(n);
  out.max_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < n; ++x) {
    if (!std::isfinite(v[x])) continue;
    double qv = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      if (y != x && q(x, y) > 0.0 && !std::isfinite(v[y])) {
        throw InvalidArgument("malformed certificate: state " + std::to_string(x) +
                              " has finite V but jumps to state " + std::to_string(y) +
                              " where V is infinite");
      }
      if (q(x, y) != 0.0) qv += q(x, y) * v[y];
    }
    const double m = qv + cert.delta() * cert.f()[x] - (cert.C().contains(x) ? cert.b() : 0.0);
    out.margin[x] = m;
    if (m > out.max_margin) {
      out.max_margin = m;
      out.worst_state = x;
    }
  }
  out.valid = out.max_margin <= tolerance;
  return out;
}

}  // namespace ergokit::ctmc
