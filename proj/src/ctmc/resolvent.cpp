#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "ergokit/ctmc.hpp"
#include "ergokit/errors.hpp"

namespace ergokit::ctmc {

namespace {

Vector to_vector(std::span<const double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

void require_size(const RateMatrix& q, std::span<const double> v, const char* what) {
  if (v.size() != q.size()) {
    throw InvalidArgument(std::string(what) + " has length " + std::to_string(v.size()) +
                          ", expected " + std::to_string(q.size()));
  }
}

}  // namespace

TransitionKernel transition_semigroup(const RateMatrix& q, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("semigroup time must be nonnegative");
  return TransitionKernel(numerics::expm(t * q.matrix()), t);
}

Table stationary_distribution(const RateMatrix& q) {
  if (!q.irreducible()) throw InvalidArgument("stationary distribution requires an irreducible chain");
  const auto n = static_cast<Eigen::Index>(q.size());
  Matrix a = q.matrix().transpose();
  a.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs(n - 1) = 1.0;
  const Vector pi = a.fullPivLu().solve(rhs);
  Table out(pi.data(), pi.data() + n);
  for (double p : out) {
    if (!(p > 0.0)) throw NumericalError("stationary distribution solve lost positivity");
  }
  return out;
}

double pi_f(const RateMatrix& q, const WeightTable& f) {
  if (f.size() != q.size()) throw InvalidArgument("weight length does not match the chain");
  const auto pi = stationary_distribution(q);
  double s = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) s += pi[i] * f[i];
  return s;
}

double spectral_gap(const RateMatrix& q) {
  if (q.size() == 1) return std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Matrix> solver(q.matrix(), false);
  std::vector<double> re;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) re.push_back(solver.eigenvalues()(i).real());
  std::sort(re.begin(), re.end(), std::greater<>());
  return -re[1];
}

Matrix resolvent(const RateMatrix& q, double alpha) {
  if (!(alpha > 0.0)) throw InvalidArgument("resolvent parameter must be positive");
  const auto n = static_cast<Eigen::Index>(q.size());
  const Matrix a = alpha * Matrix::Identity(n, n) - q.matrix();
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) throw NumericalError("resolvent system is singular");
  return lu.inverse();
}

Matrix generalized_resolvent(const RateMatrix& q, std::span<const double> h) {
  require_size(q, h, "killing rate h");
  for (double x : h) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidArgument("killing rate h must be finite and >= 0");
  }
  // diag(h) - Q is singular exactly when h vanishes on a closed communicating class.
  const auto n = q.size();
  const auto& reach = q.reachability();
  for (std::size_t i = 0; i < n; ++i) {
    bool in_closed_class = true;
    for (std::size_t j = 0; j < n && in_closed_class; ++j) {
      if (reach[i][j] && !reach[j][i]) in_closed_class = false;
    }
    if (!in_closed_class) continue;
    bool killed = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (reach[i][j] && h[j] > 0.0) killed = true;
    }
    if (!killed) {
      throw NumericalError("generalized resolvent is singular: h vanishes on the closed class of state " +
                           std::to_string(i));
    }
  }
  const Matrix a = Matrix(to_vector(h).asDiagonal()) - q.matrix();
  return a.fullPivLu().inverse();
}

double verify_resolvent_equation(const RateMatrix& q, std::span<const double> g,
                                 std::span<const double> h) {
  require_size(q, g, "g");
  require_size(q, h, "h");
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(g[i] >= h[i]) || !(h[i] >= 0.0)) {
      throw InvalidArgument("resolvent equation needs g >= h >= 0 (violated at state " +
                            std::to_string(i) + ")");
    }
  }
  const Matrix rh = generalized_resolvent(q, h);
  const Matrix rg = generalized_resolvent(q, g);
  const Vector diff = to_vector(g) - to_vector(h);
  const Matrix residual = rh - rg - rg * diff.asDiagonal() * rh;
  return residual.cwiseAbs().maxCoeff();
}

double generator_of_resolvent_check(const RateMatrix& q, std::span<const double> g) {
  require_size(q, g, "g");
  for (double x : g) {
    if (!(x >= 0.0)) throw InvalidArgument("g must be nonnegative");
  }
  const Vector gv = to_vector(g);
  const Vector gamma = resolvent(q, 1.0) * gv;
  const Vector residual = q.matrix() * gamma - (gamma - gv);
  return residual.cwiseAbs().maxCoeff();
}

}  // namespace ergokit::ctmc
