#include <cmath>
#include <vector>

#include "ergokit/ctmc_sim.hpp"
#include "ergokit/errors.hpp"

namespace ergokit::ctmc {

namespace {

using kernels::PathOutcome;

struct JumpTable {
  // Cumulative jump probabilities per state.
  std::vector<std::vector<double>> cumulative;
  std::vector<double> exit_rate;
};

JumpTable jump_table(const RateMatrix& q) {
  const auto n = q.size();
  JumpTable t{std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)),
              std::vector<double>(n, 0.0)};
  for (std::size_t x = 0; x < n; ++x) {
    t.exit_rate[x] = q.exit_rate(x);
    double acc = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      if (y != x && t.exit_rate[x] > 0.0) acc += q(x, y) / t.exit_rate[x];
      t.cumulative[x][y] = acc;
    }
  }
  return t;
}

std::size_t sample_row(const std::vector<double>& cumulative, double u) {
  for (std::size_t y = 0; y < cumulative.size(); ++y) {
    if (u < cumulative[y]) return y;
  }
  // u landed in the rounding gap below 1: take the last state with mass.
  for (std::size_t y = cumulative.size(); y-- > 0;) {
    if (y == 0 || cumulative[y] > cumulative[y - 1]) return y;
  }
  return 0;
}

void check_common(const RateMatrix& q, std::span<const double> g, std::size_t x0,
                  const SimulationOptions& options) {
  if (g.size() != q.size()) throw InvalidArgument("simulation: weight length mismatch");
  if (x0 >= q.size()) throw InvalidArgument("simulation: initial state outside the state space");
  if (options.n_paths < 2) throw InvalidArgument("simulation: need at least two paths");
  if (!(options.time_cap > 0.0)) throw InvalidArgument("simulation: time cap must be positive");
}

}  // namespace

McEstimate mc_hitting_functional(const RateMatrix& q, std::span<const double> g,
                                 const FiniteSet& b, double r, std::size_t x0,
                                 const SimulationOptions& options) {
  check_common(q, g, x0, options);
  if (b.empty()) throw InvalidArgument("simulation: target set is empty");
  if (!(r >= 0.0)) throw InvalidArgument("simulation: r must be nonnegative");
  const auto table = jump_table(q);
  std::vector<PathOutcome> out(options.n_paths);
  kernels::run_paths(options.execution, out, [&](std::size_t path) {
    auto rng = kernels::make_stream(options.seed, path, kernels::Stream::Jumps);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    double t = 0.0;
    double acc = 0.0;
    std::size_t x = x0;
    while (true) {
      if (t >= r && b.contains(x)) return PathOutcome{acc, false};
      const double rate = table.exit_rate[x];
      double hold = std::numeric_limits<double>::infinity();
      if (rate > 0.0) hold = -std::log1p(-uniform(rng)) / rate;
      if (b.contains(x) && t + hold >= r) {
        // Still in B at time r, so tau_B(r) = r.
        return PathOutcome{acc + g[x] * (r - t), false};
      }
      if (t + hold >= options.time_cap) return PathOutcome{acc + g[x] * (options.time_cap - t), true};
      acc += g[x] * hold;
      t += hold;
      x = sample_row(table.cumulative[x], uniform(rng));
    }
  });
  return summarize(out);
}

McEstimate mc_lyapunov(const RateMatrix& q, std::span<const double> f, const FiniteSet& c,
                       std::size_t x0, const SimulationOptions& options) {
  check_common(q, f, x0, options);
  if (c.empty()) throw InvalidArgument("simulation: C is empty");
  const auto table = jump_table(q);
  std::vector<PathOutcome> out(options.n_paths);
  kernels::run_paths(options.execution, out, [&](std::size_t path) {
    auto rng = kernels::make_stream(options.seed, path, kernels::Stream::Jumps);
    auto clock_rng = kernels::make_stream(options.seed, path, kernels::Stream::Clock);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double clock = std::exponential_distribution<double>(1.0)(clock_rng);
    double t = 0.0;
    double occupation = 0.0;
    double acc = 0.0;
    std::size_t x = x0;
    while (true) {
      const double rate = table.exit_rate[x];
      double hold = std::numeric_limits<double>::infinity();
      if (rate > 0.0) hold = -std::log1p(-uniform(rng)) / rate;
      if (c.contains(x) && occupation + hold >= clock) {
        return PathOutcome{acc + f[x] * (clock - occupation), false};
      }
      if (t + hold >= options.time_cap) return PathOutcome{acc + f[x] * (options.time_cap - t), true};
      if (c.contains(x)) occupation += hold;
      acc += f[x] * hold;
      t += hold;
      x = sample_row(table.cumulative[x], uniform(rng));
    }
  });
  return summarize(out);
}

McEstimate mc_skeleton_hitting_sum(const RateMatrix& q, double interval, std::span<const double> g,
                                   const FiniteSet& b, std::size_t x0,
                                   const SimulationOptions& options) {
  check_common(q, g, x0, options);
  if (b.empty()) throw InvalidArgument("simulation: target set is empty");
  const Matrix p = skeleton_kernel(q, interval).kernel.matrix();
  const auto n = q.size();
  std::vector<std::vector<double>> cumulative(n, std::vector<double>(n, 0.0));
  for (std::size_t x = 0; x < n; ++x) {
    double acc = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      acc += p(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
      cumulative[x][y] = acc;
    }
  }
  const auto max_steps = static_cast<std::size_t>(std::ceil(options.time_cap / interval));
  std::vector<PathOutcome> out(options.n_paths);
  kernels::run_paths(options.execution, out, [&](std::size_t path) {
    auto rng = kernels::make_stream(options.seed, path, kernels::Stream::Jumps);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::size_t x = x0;
    double acc = g[x];
    for (std::size_t i = 1; i <= max_steps; ++i) {
      x = sample_row(cumulative[x], uniform(rng));
      acc += g[x];
      if (b.contains(x)) return PathOutcome{acc, false};
    }
    return PathOutcome{acc, true};
  });
  return summarize(out);
}

}  // namespace ergokit::ctmc
