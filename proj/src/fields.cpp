#include "ergokit/fields.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "ergokit/errors.hpp"

namespace ergokit {

ScalarField::ScalarField(std::size_t dimension, ValueFn value, GradientFn gradient,
                         HessianFn hessian, std::string description)
    : dimension_(dimension),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      hessian_(std::move(hessian)),
      description_(std::move(description)) {
  if (dimension_ == 0) throw InvalidArgument("scalar field dimension must be positive");
  if (!value_) throw InvalidArgument("scalar field needs a value function");
}

ScalarField ScalarField::constant(std::size_t dimension, double c) {
  return ScalarField(
      dimension, [c](std::span<const double>) { return c; },
      [](std::span<const double>, std::span<double> g) {
        for (auto& v : g) v = 0.0;
      },
      [](std::span<const double>, std::span<double> h) {
        for (auto& v : h) v = 0.0;
      },
      "constant");
}

ScalarField ScalarField::from_expr(dsl::Expr e) {
  const std::size_t d = e.dimension();
  std::string text = e.to_string();
  return ScalarField(
      d, [e = std::move(e)](std::span<const double> x) { return e.evaluate(x); }, {}, {},
      std::move(text));
}

ScalarField ScalarField::from_source(std::string_view source, std::size_t dimension) {
  return from_expr(dsl::Expr::parse(source, dimension));
}

ScalarField ScalarField::scaled(double c) const {
  GradientFn g;
  HessianFn h;
  if (gradient_) {
    g = [inner = gradient_, c](std::span<const double> x, std::span<double> out) {
      inner(x, out);
      for (auto& v : out) v *= c;
    };
  }
  if (hessian_) {
    h = [inner = hessian_, c](std::span<const double> x, std::span<double> out) {
      inner(x, out);
      for (auto& v : out) v *= c;
    };
  }
  return ScalarField(
      dimension_, [inner = value_, c](std::span<const double> x) { return c * inner(x); },
      std::move(g), std::move(h), description_);
}

Region Region::whole(std::size_t dimension) {
  Region r(Kind::Whole, dimension);
  r.lower_.assign(dimension, -std::numeric_limits<double>::infinity());
  r.upper_.assign(dimension, std::numeric_limits<double>::infinity());
  return r;
}

Region Region::box(Point lower, Point upper) {
  if (lower.empty() || lower.size() != upper.size()) {
    throw InvalidArgument("box bounds must be nonempty and of equal length");
  }
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!(lower[i] <= upper[i])) throw InvalidArgument("box lower bound exceeds upper bound");
  }
  Region r(Kind::Box, lower.size());
  r.lower_ = std::move(lower);
  r.upper_ = std::move(upper);
  return r;
}

Region Region::ball(Point center, double radius) {
  if (center.empty()) throw InvalidArgument("ball center must be nonempty");
  if (!(radius >= 0.0)) throw InvalidArgument("ball radius must be nonnegative");
  Region r(Kind::Ball, center.size());
  for (double c : center) {
    r.lower_.push_back(c - radius);
    r.upper_.push_back(c + radius);
  }
  r.center_ = std::move(center);
  r.radius_ = radius;
  return r;
}

Region Region::sublevel(ScalarField g, double level, Point bound_lower, Point bound_upper) {
  if (bound_lower.size() != g.dimension() || bound_upper.size() != g.dimension()) {
    throw InvalidArgument("sublevel bounding box has the wrong dimension");
  }
  Region r(Kind::Sublevel, g.dimension());
  r.level_fn_.emplace(std::move(g));
  r.level_ = level;
  r.lower_ = std::move(bound_lower);
  r.upper_ = std::move(bound_upper);
  return r;
}

bool Region::contains(std::span<const double> x) const {
  if (x.size() != dimension_) throw InvalidArgument("region membership: dimension mismatch");
  switch (kind_) {
    case Kind::Whole:
      return true;
    case Kind::Box:
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < lower_[i] || x[i] > upper_[i]) return false;
      }
      return true;
    case Kind::Ball: {
      double r2 = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - center_[i]) * (x[i] - center_[i]);
      return r2 <= radius_ * radius_;
    }
    case Kind::Sublevel:
      return (*level_fn_)(x) <= level_;
  }
  return false;
}

}  // namespace ergokit
