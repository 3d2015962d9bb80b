#include "ergokit/numerics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <unsupported/Eigen/MatrixFunctions>

namespace ergokit::numerics {

Matrix expm(const Matrix& a) { return a.exp(); }

ExpWithIntegral exp_with_integral(const Matrix& a, const Vector& v, double t) {
  const auto n = a.rows();
  Matrix augmented = Matrix::Zero(n + 1, n + 1);
  augmented.topLeftCorner(n, n) = t * a;
  augmented.topRightCorner(n, 1) = t * v;
  const Matrix e = expm(augmented);
  return {e.topLeftCorner(n, n), e.topRightCorner(n, 1)};
}

Quadrature integrate(const std::function<double(double)>& fn, double a, double b,
                     double relative_tolerance) {
  if (b <= a) return {};
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      fn, a, b, 25, relative_tolerance, &error);
  return {value, error};
}

}  // namespace ergokit::numerics
