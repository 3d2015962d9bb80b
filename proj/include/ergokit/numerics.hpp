#pragma once

#include <functional>

#include <Eigen/Dense>

namespace ergokit::numerics {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// exp(A) by scaling and squaring with a Pade approximant.
Matrix expm(const Matrix& a);

// exp(tA) together with int_0^t exp(sA) v ds, read off the block
// exponential of [[A, v], [0, 0]] so no quadrature error enters.
struct ExpWithIntegral {
  Matrix exp;
  Vector integral;
};
ExpWithIntegral exp_with_integral(const Matrix& a, const Vector& v, double t);

struct Quadrature {
  double value = 0.0;
  double error = 0.0;
};

// Adaptive Gauss-Kronrod on [a, b] to the requested relative tolerance.
Quadrature integrate(const std::function<double(double)>& fn, double a, double b,
                     double relative_tolerance = 1e-10);

}  // namespace ergokit::numerics
