#include "ergokit/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ergokit/errors.hpp"

namespace ergokit::diffusion {

namespace {

using kernels::PathOutcome;

constexpr double kDiscountFloor = 1e-12;

class EulerStepper {
public:
  EulerStepper(const DiffusionModel& model, std::mt19937_64 rng)
      : model_(model),
        rng_(std::move(rng)),
        drift_(model.state_dimension()),
        disp_(model.state_dimension() * model.noise_dimension()),
        noise_(model.noise_dimension()) {}

  // Advances x in place by one Euler-Maruyama step of length h.
  void step(std::vector<double>& x, double h, double t) {
    const auto d = model_.state_dimension();
    const auto k = model_.noise_dimension();
    model_.drift(x, drift_);
    model_.dispersion(x, disp_);
    const double sq = std::sqrt(h);
    for (auto& z : noise_) z = normal_(rng_) * sq;
    for (std::size_t i = 0; i < d; ++i) {
      double dx = drift_[i] * h;
      for (std::size_t j = 0; j < k; ++j) dx += disp_[i * k + j] * noise_[j];
      x[i] += dx;
      if (!std::isfinite(x[i])) {
        throw NumericalError("Euler-Maruyama path exploded near t = " + std::to_string(t));
      }
    }
  }

private:
  const DiffusionModel& model_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::vector<double> drift_;
  std::vector<double> disp_;
  std::vector<double> noise_;
};

void check_point(const DiffusionModel& model, const Point& x) {
  if (x.size() != model.state_dimension()) throw InvalidArgument("initial point has the wrong dimension");
}

void check_options(const McOptions& options) {
  if (options.n_paths < 2) throw InvalidArgument("Monte Carlo needs at least two paths");
  if (!(options.dt > 0.0)) throw InvalidArgument("time step must be positive");
  if (!(options.time_cap > 0.0)) throw InvalidArgument("time cap must be positive");
}

std::size_t steps_for(double t, double dt) {
  // First step index n with n dt >= t, tolerant to representation error in t/dt.
  return static_cast<std::size_t>(std::ceil(t / dt - 1e-9));
}

double finite_or_throw(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string(what) + " is not finite along the path");
  return v;
}

}  // namespace

DiffusionModel::DiffusionModel(std::size_t d, std::size_t k, VectorFn drift, VectorFn dispersion,
                               std::string name)
    : d_(d), k_(k), drift_(std::move(drift)), dispersion_(std::move(dispersion)), name_(std::move(name)) {
  if (d_ == 0 || k_ == 0) throw InvalidArgument("diffusion dimensions must be positive");
  if (!drift_ || !dispersion_) throw InvalidArgument("diffusion needs drift and dispersion fields");
}

DiffusionModel DiffusionModel::from_expressions(std::size_t d, std::size_t k,
                                                const std::vector<std::string>& drift,
                                                const std::vector<std::vector<std::string>>& dispersion) {
  if (drift.size() != d) throw InvalidArgument("drift needs one expression per state component");
  if (dispersion.size() != d) throw InvalidArgument("dispersion needs d rows");
  std::vector<dsl::Expr> u;
  std::vector<dsl::Expr> m;
  for (const auto& s : drift) u.push_back(dsl::Expr::parse(s, d));
  for (const auto& row : dispersion) {
    if (row.size() != k) throw InvalidArgument("dispersion rows need k entries");
    for (const auto& s : row) m.push_back(dsl::Expr::parse(s, d));
  }
  return DiffusionModel(
      d, k,
      [u](std::span<const double> x, std::span<double> out) {
        for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i].evaluate(x);
      },
      [m](std::span<const double> x, std::span<double> out) {
        for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i].evaluate(x);
      },
      "expressions");
}

DiffusionModel DiffusionModel::builtin(std::string_view name) {
  const double s = std::sqrt(2.0);
  auto constant_noise = [s](std::span<const double>, std::span<double> out) { out[0] = s; };
  if (name == "ou") {
    return DiffusionModel(
        1, 1, [](std::span<const double> x, std::span<double> out) { out[0] = -x[0]; },
        constant_noise, "ou");
  }
  if (name == "double-well") {
    return DiffusionModel(
        1, 1,
        [](std::span<const double> x, std::span<double> out) { out[0] = x[0] - x[0] * x[0] * x[0]; },
        constant_noise, "double-well");
  }
  throw InvalidArgument("unknown built-in model '" + std::string(name) + "'");
}

void DiffusionModel::covariance(std::span<const double> x, std::span<double> out) const {
  std::vector<double> m(d_ * k_);
  dispersion_(x, m);
  for (std::size_t i = 0; i < d_; ++i) {
    for (std::size_t j = 0; j < d_; ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < k_; ++l) s += m[i * k_ + l] * m[j * k_ + l];
      out[i * d_ + j] = s;
    }
  }
}

PathSample simulate_path(const DiffusionModel& model, const Point& x0, double dt, double horizon,
                         std::uint64_t seed, const std::optional<Region>& c) {
  check_point(model, x0);
  if (!(dt > 0.0) || !(horizon > 0.0)) throw InvalidArgument("dt and T must be positive");
  if (c && c->dimension() != model.state_dimension()) throw InvalidArgument("set has the wrong dimension");
  EulerStepper stepper(model, kernels::make_stream(seed, 0, kernels::Stream::Increments));
  const std::size_t n = steps_for(horizon, dt);
  PathSample out;
  out.times.reserve(n + 1);
  out.states.reserve(n + 1);
  std::vector<double> x = x0;
  double occupation = 0.0;
  out.times.push_back(0.0);
  out.states.push_back(x);
  if (c) out.occupation.push_back(0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    const double t0 = static_cast<double>(i - 1) * dt;
    const double h = std::min(dt, horizon - t0);
    if (c && c->contains(x)) occupation += h;
    stepper.step(x, h, t0);
    out.times.push_back(i == n ? horizon : static_cast<double>(i) * dt);
    out.states.push_back(x);
    if (c) out.occupation.push_back(occupation);
  }
  return out;
}

double generator_apply(const DiffusionModel& model, const ScalarField& h, std::span<const double> x,
                       std::optional<double> fd_step) {
  const auto d = model.state_dimension();
  if (h.dimension() != d || x.size() != d) throw InvalidArgument("generator: dimension mismatch");
  std::vector<double> u(d);
  std::vector<double> sigma(d * d);
  model.drift(x, u);
  model.covariance(x, sigma);
  std::vector<double> grad(d);
  std::vector<double> hess(d * d);
  if (h.has_gradient() && h.has_hessian()) {
    h.gradient(x, grad);
    h.hessian(x, hess);
  } else {
    double norm = 0.0;
    for (double v : x) norm += v * v;
    const double step = fd_step.value_or(1e-4 * (1.0 + std::sqrt(norm)));
    if (!(step > 0.0)) throw InvalidArgument("finite-difference step must be positive");
    std::vector<double> p(x.begin(), x.end());
    const double center = h(p);
    auto at = [&](std::size_t i, double di, std::size_t j, double dj) {
      p[i] += di;
      p[j] += dj;
      const double v = h(p);
      p[i] = x[i];
      p[j] = x[j];
      return v;
    };
    for (std::size_t i = 0; i < d; ++i) {
      const double up = at(i, step, i, 0.0);
      const double down = at(i, -step, i, 0.0);
      grad[i] = (up - down) / (2.0 * step);
      hess[i * d + i] = (up - 2.0 * center + down) / (step * step);
      for (std::size_t j = 0; j < i; ++j) {
        const double v = (at(i, step, j, step) - at(i, step, j, -step) - at(i, -step, j, step) +
                          at(i, -step, j, -step)) /
                         (4.0 * step * step);
        hess[i * d + j] = v;
        hess[j * d + i] = v;
      }
    }
  }
  double out = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    out += u[i] * grad[i];
    for (std::size_t j = 0; j < d; ++j) out += 0.5 * sigma[i * d + j] * hess[i * d + j];
  }
  if (!std::isfinite(out)) throw NumericalError("generator evaluation is not finite");
  return out;
}

DriftReport drift_condition_check(const DiffusionModel& model, const FieldCertificate& cert,
                                  std::span<const Point> grid, double tolerance,
                                  kernels::Execution exec) {
  if (grid.empty()) throw InvalidArgument("drift check needs a nonempty grid");
  DriftReport out;
  out.tolerance = tolerance;
  out.margins.resize(grid.size());
  kernels::run_points(exec, out.margins, [&](std::size_t i) {
    const auto& x = grid[i];
    return generator_apply(model, cert.V, x) + cert.delta * cert.f(x) -
           (cert.C.contains(x) ? cert.b : 0.0);
  });
  const auto worst = std::max_element(out.margins.begin(), out.margins.end());
  out.max_margin = *worst;
  out.worst_point = grid[static_cast<std::size_t>(worst - out.margins.begin())];
  out.valid = out.max_margin <= tolerance;
  return out;
}

std::vector<Point> uniform_grid(const Point& lower, const Point& upper, double step) {
  if (lower.empty() || lower.size() != upper.size()) throw InvalidArgument("grid bounds mismatch");
  if (!(step > 0.0)) throw InvalidArgument("grid step must be positive");
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!(upper[i] >= lower[i])) throw InvalidArgument("grid upper bound below lower bound");
    counts.push_back(static_cast<std::size_t>(std::floor((upper[i] - lower[i]) / step + 1e-9)) + 1);
  }
  std::vector<Point> out;
  std::vector<std::size_t> idx(lower.size(), 0);
  while (true) {
    Point p(lower.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = lower[i] + static_cast<double>(idx[i]) * step;
    out.push_back(std::move(p));
    std::size_t axis = 0;
    while (axis < idx.size() && ++idx[axis] == counts[axis]) idx[axis++] = 0;
    if (axis == idx.size()) break;
  }
  return out;
}

McEstimate mc_hitting_functional(const DiffusionModel& model, const ScalarField& f, const Region& c,
                                 double r, const Point& x0, const McOptions& options) {
  check_point(model, x0);
  check_options(options);
  if (!(r >= 0.0)) throw InvalidArgument("r must be nonnegative");
  const std::size_t first_allowed = steps_for(r, options.dt);
  const std::size_t cap = steps_for(options.time_cap, options.dt);
  std::vector<PathOutcome> out(options.n_paths);
  kernels::run_paths(options.execution, out, [&](std::size_t path) {
    EulerStepper stepper(model, kernels::make_stream(options.seed, path, kernels::Stream::Increments));
    std::vector<double> x = x0;
    double acc = 0.0;
    for (std::size_t n = 0; n < cap; ++n) {
      if (n >= first_allowed && c.contains(x)) return PathOutcome{acc, false};
      acc += finite_or_throw(f(x), "f") * options.dt;
      stepper.step(x, options.dt, static_cast<double>(n) * options.dt);
    }
    return PathOutcome{acc, true};
  });
  return summarize(out);
}

McEstimate mc_lyapunov(const DiffusionModel& model, const ScalarField& f, const Region& c,
                       const Point& x0, const McOptions& options) {
  check_point(model, x0);
  check_options(options);
  const std::size_t cap = steps_for(options.time_cap, options.dt);
  std::vector<PathOutcome> out(options.n_paths);
  kernels::run_paths(options.execution, out, [&](std::size_t path) {
    EulerStepper stepper(model, kernels::make_stream(options.seed, path, kernels::Stream::Increments));
    auto clock_rng = kernels::make_stream(options.seed, path, kernels::Stream::Clock);
    const double clock = std::exponential_distribution<double>(1.0)(clock_rng);
    std::vector<double> x = x0;
    double acc = 0.0;
    double occupation = 0.0;
    for (std::size_t n = 0; n < cap; ++n) {
      if (occupation >= clock) return PathOutcome{acc, false};
      acc += finite_or_throw(f(x), "f") * options.dt;
      if (c.contains(x)) occupation += options.dt;
      stepper.step(x, options.dt, static_cast<double>(n) * options.dt);
    }
    return PathOutcome{acc, true};
  });
  return summarize(out);
}

McEstimate mc_lyapunov_integral_form(const DiffusionModel& model, const ScalarField& f,
                                     const Region& c, const Point& x0, const McOptions& options) {
  check_point(model, x0);
  check_options(options);
  const std::size_t cap = steps_for(options.time_cap, options.dt);
  const double occupation_limit = -std::log(kDiscountFloor);
  std::vector<PathOutcome> out(options.n_paths);
  kernels::run_paths(options.execution, out, [&](std::size_t path) {
    EulerStepper stepper(model, kernels::make_stream(options.seed, path, kernels::Stream::Increments));
    std::vector<double> x = x0;
    double acc = 0.0;
    double occupation = 0.0;
    for (std::size_t n = 0; n < cap; ++n) {
      if (occupation >= occupation_limit) return PathOutcome{acc, false};
      acc += finite_or_throw(f(x), "f") * std::exp(-occupation) * options.dt;
      if (c.contains(x)) occupation += options.dt;
      stepper.step(x, options.dt, static_cast<double>(n) * options.dt);
    }
    return PathOutcome{acc, true};
  });
  return summarize(out);
}

std::vector<McEstimate> mc_semigroup(const DiffusionModel& model, const ScalarField& g,
                                     const Point& x0, std::span<const double> t_grid,
                                     const McOptions& options) {
  check_point(model, x0);
  check_options(options);
  std::vector<std::size_t> target(t_grid.size());
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    if (!(t_grid[k] >= 0.0)) throw InvalidArgument("time grid must be nonnegative");
    target[k] = static_cast<std::size_t>(std::llround(t_grid[k] / options.dt));
  }
  const std::size_t last = target.empty() ? 0 : *std::max_element(target.begin(), target.end());
  // values[k * n_paths + path]
  std::vector<kernels::PathOutcome> values(t_grid.size() * options.n_paths);
  std::vector<PathOutcome> unused(options.n_paths);
  kernels::run_paths(options.execution, unused, [&](std::size_t path) {
    EulerStepper stepper(model, kernels::make_stream(options.seed, path, kernels::Stream::Increments));
    std::vector<double> x = x0;
    for (std::size_t n = 0; n <= last; ++n) {
      for (std::size_t k = 0; k < target.size(); ++k) {
        if (target[k] == n) values[k * options.n_paths + path] = {finite_or_throw(g(x), "g"), false};
      }
      if (n < last) stepper.step(x, options.dt, static_cast<double>(n) * options.dt);
    }
    return PathOutcome{};
  });
  std::vector<McEstimate> out;
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    out.push_back(summarize(std::span(values).subspan(k * options.n_paths, options.n_paths)));
  }
  return out;
}

ErgodicAverage ergodic_average(const DiffusionModel& model, const ScalarField& g, const Point& x0,
                               double horizon, double dt, double burn_in, std::uint64_t seed,
                               std::size_t n_batches) {
  check_point(model, x0);
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  if (!(burn_in >= 0.0) || !(horizon > burn_in)) throw InvalidArgument("need T > burn_in >= 0");
  if (n_batches < 2) throw InvalidArgument("batch means need at least two batches");
  const std::size_t start = steps_for(burn_in, dt);
  const std::size_t end = steps_for(horizon, dt);
  const std::size_t samples = end - start;
  const std::size_t batch = samples / n_batches;
  if (batch == 0) throw InvalidArgument("too few samples for the requested number of batches");

  EulerStepper stepper(model, kernels::make_stream(seed, 0, kernels::Stream::Increments));
  std::vector<double> x = x0;
  for (std::size_t n = 0; n < start; ++n) stepper.step(x, dt, static_cast<double>(n) * dt);

  std::vector<double> means(n_batches, 0.0);
  for (std::size_t bi = 0; bi < n_batches; ++bi) {
    double s = 0.0;
    for (std::size_t j = 0; j < batch; ++j) {
      const std::size_t n = start + bi * batch + j;
      s += finite_or_throw(g(x), "g");
      stepper.step(x, dt, static_cast<double>(n) * dt);
    }
    means[bi] = s / static_cast<double>(batch);
  }
  ErgodicAverage out;
  out.n_batches = n_batches;
  out.samples = batch * n_batches;
  double mean = 0.0;
  for (double m : means) mean += m;
  mean /= static_cast<double>(n_batches);
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  var /= static_cast<double>(n_batches - 1);
  out.estimate = mean;
  out.std_error = std::sqrt(var / static_cast<double>(n_batches));
  return out;
}

}  // namespace ergokit::diffusion
