#include <algorithm>
#include <cmath>
#include <deque>

#include "ergokit/ctmc.hpp"
#include "ergokit/errors.hpp"

namespace ergokit::ctmc {

namespace {

std::vector<std::vector<bool>> transitive_closure(const Matrix& q) {
  const auto n = static_cast<std::size_t>(q.rows());
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t s = 0; s < n; ++s) {
    std::deque<std::size_t> queue{s};
    reach[s][s] = true;
    while (!queue.empty()) {
      const auto i = queue.front();
      queue.pop_front();
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i && q(i, j) > 0.0 && !reach[s][j]) {
          reach[s][j] = true;
          queue.push_back(j);
        }
      }
    }
  }
  return reach;
}

}  // namespace

RateMatrix::RateMatrix(Matrix q, std::vector<std::string> labels)
    : q_(std::move(q)), space_(static_cast<std::size_t>(q_.rows()), std::move(labels)) {
  if (q_.rows() != q_.cols()) throw InvalidArgument("rate matrix must be square");
  const auto n = size();
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    double scale = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = q_(i, j);
      if (!std::isfinite(v)) throw InvalidArgument("rate matrix has a non-finite entry");
      if (i != j && v < 0.0) {
        throw InvalidArgument("negative off-diagonal rate at (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
      }
      row += v;
      scale = std::max(scale, std::abs(v));
    }
    if (std::abs(row) > 1e-12 * scale) {
      throw InvalidArgument("row " + std::to_string(i) + " of the rate matrix does not sum to zero");
    }
  }
  reach_ = transitive_closure(q_);
}

RateMatrix RateMatrix::from_rows(const std::vector<std::vector<double>>& rows,
                                 std::vector<std::string> labels) {
  const auto n = rows.size();
  if (n == 0) throw InvalidArgument("rate matrix needs at least one state");
  Matrix q(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) throw InvalidArgument("rate matrix row " + std::to_string(i) + " has wrong length");
    for (std::size_t j = 0; j < n; ++j) q(i, j) = rows[i][j];
  }
  return RateMatrix(std::move(q), std::move(labels));
}

bool RateMatrix::irreducible() const {
  for (const auto& row : reach_) {
    for (bool r : row) {
      if (!r) return false;
    }
  }
  return true;
}

RateMatrix RateMatrix::permuted(std::span<const std::size_t> perm) const {
  const auto n = size();
  if (perm.size() != n) throw InvalidArgument("permutation has wrong length");
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out(perm[i], perm[j]) = q_(i, j);
  }
  return RateMatrix(std::move(out));
}

TransitionKernel::TransitionKernel(Matrix p, double horizon) : p_(std::move(p)), horizon_(horizon) {
  for (Eigen::Index i = 0; i < p_.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < p_.cols(); ++j) {
      // Pade round-off can leave entries of order -1e-17 where the true value is 0.
      if (p_(i, j) < 0.0 && p_(i, j) > -1e-12) p_(i, j) = 0.0;
      if (p_(i, j) < 0.0) throw NumericalError("transition kernel has a negative entry");
      row += p_(i, j);
    }
    if (std::abs(row - 1.0) > 1e-10) throw NumericalError("transition kernel row is not stochastic");
  }
}

DriftCertificate::DriftCertificate(Table v, WeightTable f, FiniteSet c, double b, double delta)
    : v_(std::move(v)), f_(std::move(f)), c_(std::move(c)), b_(b), delta_(delta) {
  if (v_.size() != f_.size() || c_.universe() != v_.size()) {
    throw InvalidArgument("certificate components have inconsistent sizes");
  }
  bool any_finite = false;
  for (double x : v_) {
    if (!(x > 0.0)) throw InvalidArgument("certificate V must be positive (possibly +inf)");
    any_finite = any_finite || std::isfinite(x);
  }
  if (!any_finite) throw InvalidArgument("certificate V must be finite at some state");
  if (!std::isfinite(b_)) throw InvalidArgument("certificate b must be finite");
  if (!(delta_ > 0.0)) throw InvalidArgument("certificate delta must be positive");
}

DriftCertificate DriftCertificate::scaled(double factor) const {
  if (!(factor > 0.0)) throw InvalidArgument("certificate scale factor must be positive");
  Table v = v_;
  for (auto& x : v) x *= factor;
  std::vector<double> f(f_.values().begin(), f_.values().end());
  for (auto& x : f) x *= factor;
  return DriftCertificate(std::move(v), WeightTable(std::move(f)), c_, b_ * factor, delta_);
}

}  // namespace ergokit::ctmc
