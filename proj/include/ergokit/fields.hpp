#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ergokit/expr.hpp"

namespace ergokit {

using Point = std::vector<double>;

// Evaluable function R^d -> R with optional closed-form derivatives.
// The Hessian is written row-major into a d*d buffer.
class ScalarField {
public:
  using ValueFn = std::function<double(std::span<const double>)>;
  using GradientFn = std::function<void(std::span<const double>, std::span<double>)>;
  using HessianFn = std::function<void(std::span<const double>, std::span<double>)>;

  ScalarField(std::size_t dimension, ValueFn value, GradientFn gradient = {},
              HessianFn hessian = {}, std::string description = {});

  static ScalarField constant(std::size_t dimension, double c);
  static ScalarField from_expr(dsl::Expr e);
  static ScalarField from_source(std::string_view source, std::size_t dimension);

  std::size_t dimension() const { return dimension_; }
  const std::string& description() const { return description_; }
  bool has_gradient() const { return static_cast<bool>(gradient_); }
  bool has_hessian() const { return static_cast<bool>(hessian_); }

  double operator()(std::span<const double> x) const { return value_(x); }
  void gradient(std::span<const double> x, std::span<double> out) const { gradient_(x, out); }
  void hessian(std::span<const double> x, std::span<double> out) const { hessian_(x, out); }

  // Returns a field equal to c * this, carrying scaled derivatives.
  ScalarField scaled(double c) const;

private:
  std::size_t dimension_;
  ValueFn value_;
  GradientFn gradient_;
  HessianFn hessian_;
  std::string description_;
};

// A set in R^d used for C and B on continuous state spaces. Boxes, closed
// balls and sublevel sets {g <= c} are closed by construction; `closed()`
// records the declaration, it is not verified.
class Region {
public:
  enum class Kind { Whole, Box, Ball, Sublevel };

  static Region whole(std::size_t dimension);
  static Region box(Point lower, Point upper);
  static Region ball(Point center, double radius);
  static Region sublevel(ScalarField g, double level, Point bound_lower, Point bound_upper);

  Kind kind() const { return kind_; }
  std::size_t dimension() const { return dimension_; }
  bool closed() const { return true; }
  bool contains(std::span<const double> x) const;

  // Bounding box for sampling; infinite for Whole.
  const Point& lower() const { return lower_; }
  const Point& upper() const { return upper_; }

private:
  Region(Kind kind, std::size_t dimension) : kind_(kind), dimension_(dimension) {}

  Kind kind_;
  std::size_t dimension_;
  Point lower_;
  Point upper_;
  Point center_;
  double radius_ = 0.0;
  std::optional<ScalarField> level_fn_;
  double level_ = 0.0;
};

}  // namespace ergokit
