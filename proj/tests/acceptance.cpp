// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ergokit/cli.hpp"
#include "ergokit/ctmc.hpp"
#include "ergokit/ctmc_sim.hpp"
#include "ergokit/diffusion.hpp"
#include "ergokit/random_instances.hpp"

namespace fs = std::filesystem;
using namespace ergokit;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Instance {
  ctmc::RateMatrix q;
  WeightTable f;
  FiniteSet c;
};

// 100 random irreducible chains with n in 2..8, shared by several criteria.
std::vector<Instance> random_instances(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> size(2, 8);
  std::vector<Instance> out;
  for (std::size_t i = 0; i < count; ++i) {
    const auto n = size(rng);
    auto q = ctmc::random_rate_matrix(n, rng);
    auto f = ctmc::random_weight(n, rng);
    auto c = ctmc::random_subset(n, rng);
    out.push_back({std::move(q), std::move(f), std::move(c)});
  }
  return out;
}

const std::vector<Instance>& instances() {
  static const auto v = random_instances(100, 20261017);
  return v;
}

ctmc::RateMatrix two_state() { return ctmc::RateMatrix::from_rows({{-1, 1}, {2, -2}}); }

Outcome ac1() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  double worst = 0.0;
  for (const auto& in : instances()) {
    std::vector<double> h(in.q.size()), g(in.q.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
      h[i] = u(rng);
      g[i] = h[i] + u(rng);
    }
    worst = std::max(worst, ctmc::verify_resolvent_equation(in.q, g, h));
  }
  return {worst <= 1e-10, "max residual " + fmt(worst) + " over 100 chains"};
}

Outcome ac2() {
  double worst = 0.0;
  for (const auto& in : instances()) {
    const auto cert = ctmc::lyapunov_from_resolvent(in.q, in.f, in.c);
    worst = std::max(worst, ctmc::drift_identity_residual(in.q, in.f, in.c, cert.V()));
  }
  return {worst <= 1e-10, "max residual " + fmt(worst) + " over 100 (Q, f, C)"};
}

Outcome ac3() {
  double worst = 0.0;
  for (const auto& in : instances()) {
    worst = std::max(worst, ctmc::generator_of_resolvent_check(in.q, in.f.values()));
  }
  return {worst <= 1e-10, "max residual " + fmt(worst) + " over 100 chains"};
}

Outcome ac4() {
  const auto q = two_state();
  const WeightTable ones(std::vector<double>{1.0, 1.0});
  const FiniteSet c(2, {0});
  double err = 0.0;
  const auto r1 = ctmc::resolvent(q, 1.0);
  const double expected_r1[2][2] = {{0.75, 0.25}, {0.5, 0.5}};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) err = std::max(err, std::abs(r1(i, j) - expected_r1[i][j]));
  }
  const auto v = ctmc::lyapunov_from_resolvent(q, ones, c).V();
  err = std::max({err, std::abs(v[0] - 1.5), std::abs(v[1] - 2.0)});
  const auto pi = ctmc::stationary_distribution(q);
  err = std::max({err, std::abs(pi[0] - 2.0 / 3.0), std::abs(pi[1] - 1.0 / 3.0)});
  std::vector<double> grid;
  for (int k = 0; k <= 100; ++k) grid.push_back(0.05 * k);
  const auto curve = ctmc::fnorm_decay_curve(q, ones, 0, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    err = std::max(err, std::abs(curve.tv[k] - 2.0 / 3.0 * std::exp(-3.0 * grid[k])));
  }
  const std::vector<std::pair<std::size_t, std::size_t>> none;
  const auto ci = ctmc::theorem2_bound(q, ones, v, 40.0 / ctmc::spectral_gap(q), none);
  const double integral_err = std::abs(ci.states[0].integral - 2.0 / 9.0);
  return {err <= 1e-8 && integral_err <= 1e-6,
          "closed-form error " + fmt(err) + ", integral error " + fmt(integral_err)};
}

Outcome ac5() {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_gap = INFINITY;
  double worst_equality = 0.0;
  for (const auto& in : instances()) {
    const auto mu = ctmc::random_zero_mass_measure(in.q.size(), rng);
    const auto r = ctmc::norm_equiv_check(in.q, mu, in.f, 1.0);
    worst_gap = std::min(worst_gap, r.lhs - r.rhs);
    std::vector<double> mass(in.q.size());
    for (auto& m : mass) m = u(rng);
    const auto e = ctmc::norm_equiv_check(in.q, FiniteSignedMeasure(mass), in.f, 1.0);
    worst_equality = std::max(worst_equality, std::abs(e.lhs - e.rhs));
  }
  return {worst_gap >= -1e-6 && worst_equality <= 1e-6,
          "min lhs - rhs " + fmt(worst_gap) + ", max equality gap " + fmt(worst_equality)};
}

Outcome ac6() {
  double worst_slack = INFINITY;
  double largest_ratio = 0.0;
  bool finite = true;
  for (std::size_t i = 0; i < 20; ++i) {
    const auto& in = instances()[i];
    const auto v = ctmc::lyapunov_from_resolvent(in.q, in.f, in.c).V();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t x = 0; x < in.q.size(); ++x) {
      for (std::size_t y = x + 1; y < in.q.size(); ++y) pairs.emplace_back(x, y);
    }
    const auto ci = ctmc::theorem2_bound(in.q, in.f, v, 40.0 / ctmc::spectral_gap(in.q), pairs);
    const auto sums = ctmc::skeleton_sums(in.q, in.f, 1.0, v, pairs);
    finite = finite && std::isfinite(ci.pair_constant) && std::isfinite(ci.state_constant);
    largest_ratio = std::max({largest_ratio, ci.pair_constant, ci.state_constant});
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      worst_slack = std::min(worst_slack, sums.pairs[k].sum - ci.pairs[k].integral + ci.pairs[k].error);
    }
    for (std::size_t x = 0; x < in.q.size(); ++x) {
      worst_slack = std::min(worst_slack, sums.states[x].sum - ci.states[x].integral + ci.states[x].error);
    }
  }
  return {finite && worst_slack >= 0.0,
          "largest ratio " + fmt(largest_ratio) + ", min sum - integral + error " + fmt(worst_slack)};
}

Outcome ac7() {
  double worst_margin = -INFINITY;
  double worst_minorization = INFINITY;
  double smallest_eps = INFINITY;
  for (std::size_t i = 0; i < 20; ++i) {
    const auto& in = instances()[i];
    const auto sk = ctmc::construct_skeleton_lyapunov(in.q, in.f, 1.0, in.c);
    worst_margin = std::max(worst_margin, sk.max_margin);
    worst_minorization = std::min(worst_minorization, sk.min_minorization_margin);
    smallest_eps = std::min(smallest_eps, sk.eps0);
  }
  return {worst_margin <= 1e-9 && worst_minorization >= -1e-12 && smallest_eps > 0.0,
          "max drift margin " + fmt(worst_margin) + ", min minorization margin " + fmt(worst_minorization) +
              ", min eps0 " + fmt(smallest_eps)};
}

Outcome ac8() {
  std::mt19937_64 rng(808);
  std::vector<Instance> chains;
  chains.push_back({ctmc::RateMatrix::from_rows({{-2, 1, 1}, {1, -3, 2}, {0.5, 0.5, -1}}),
                    WeightTable(std::vector<double>{1, 2, 3}), FiniteSet(3, {0})});
  for (int i = 0; i < 2; ++i) {
    auto q = ctmc::random_rate_matrix(3, rng);
    auto f = ctmc::random_weight(3, rng);
    auto c = ctmc::random_subset(3, rng);
    chains.push_back({std::move(q), std::move(f), std::move(c)});
  }
  ctmc::SimulationOptions opts;
  opts.n_paths = 100000;
  double worst = 0.0;
  std::size_t comparisons = 0;
  for (const auto& in : chains) {
    const auto g = ctmc::hitting_functional(in.q, in.f, in.c, 1.0);
    const auto v = ctmc::lyapunov_from_resolvent(in.q, in.f, in.c).V();
    for (std::size_t x = 0; x < 3; ++x) {
      opts.seed = 1000 + 10 * comparisons;
      const auto eg = ctmc::mc_hitting_functional(in.q, in.f.values(), in.c, 1.0, x, opts);
      const auto ev = ctmc::mc_lyapunov(in.q, in.f.values(), in.c, x, opts);
      worst = std::max({worst, std::abs(eg.estimate - g[x]) / eg.std_error,
                        std::abs(ev.estimate - v[x]) / ev.std_error});
      comparisons += 2;
    }
  }
  return {worst <= 3.0, "max |z| " + fmt(worst) + " over " + std::to_string(comparisons) + " estimates"};
}

Outcome ac9() {
  const auto ou = diffusion::DiffusionModel::builtin("ou");
  const double root3 = std::sqrt(3.0);
  const diffusion::FieldCertificate cert{ScalarField::from_source("x1^2", 1),
                                         ScalarField::from_source("x1^2 + 1", 1),
                                         Region::box({-root3}, {root3}), 3.0, 1.0};
  const auto grid = diffusion::uniform_grid({-10.0}, {10.0}, 0.01);
  const auto drift = diffusion::drift_condition_check(ou, cert, grid);

  const auto avg = diffusion::ergodic_average(ou, ScalarField::from_source("x1^2", 1), {0.0}, 1e4, 1e-2,
                                              100.0, 909);
  const double z = std::abs(avg.estimate - 1.0) / avg.std_error;

  const auto h = ScalarField::from_source("x1^4 + tanh(x1)", 1);
  const double x = 0.7;
  const double th = std::tanh(x);
  const double sech2 = 1.0 - th * th;
  const double exact = -x * (4 * x * x * x + sech2) + (12 * x * x - 2 * th * sech2);
  const std::vector<double> p{x};
  const double e1 = std::abs(diffusion::generator_apply(ou, h, p, 0.1) - exact);
  const double e2 = std::abs(diffusion::generator_apply(ou, h, p, 0.05) - exact);
  const double ratio = e1 / e2;

  return {drift.valid && z <= 3.0 && std::abs(ratio - 4.0) <= 0.5,
          "grid max margin " + fmt(drift.max_margin) + " on " + std::to_string(grid.size()) +
              " points, ergodic mean " + fmt(avg.estimate) + " (|z| " + fmt(z) + "), Richardson ratio " +
              fmt(ratio)};
}

Outcome ac10() {
  std::vector<double> grid;
  for (int k = 0; k <= 400; ++k) grid.push_back(0.025 * k);
  std::size_t curves = 0;
  bool monotone = true;
  auto sweep = [&](const ctmc::RateMatrix& q, const WeightTable& f) {
    for (std::size_t x = 0; x < q.size(); ++x) {
      monotone = monotone && ctmc::fnorm_decay_curve(q, f, x, grid).tv_non_increasing;
      ++curves;
    }
  };
  sweep(two_state(), WeightTable(std::vector<double>{1.0, 1.0}));
  for (const auto& in : instances()) sweep(in.q, in.f);
  return {monotone, std::to_string(curves) + " curves on " + std::to_string(grid.size()) + " times"};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome ac11() {
  const fs::path root = fs::temp_directory_path() / ("ergokit_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(root);
  const std::vector<std::pair<std::string, std::string>> configs{
      {"three_state.json",
       R"({"model": {"kind": "ctmc", "rates": [[-2, 1, 1], [1, -3, 2], [0.5, 0.5, -1]]},
           "f": [1, 2, 3], "C": [0], "B": [[1], [2]],
           "params": {"t_grid": {"start": 0, "stop": 4, "step": 0.5}, "r": 1,
                      "monte_carlo": true, "n_paths": 5000, "seed": 11}})"},
      {"ou.json",
       R"({"model": {"kind": "diffusion", "builtin": "ou"}, "f": "x1^2 + 1", "V": "x1^2",
           "C": {"box": {"lower": [-1.7320508075688772], "upper": [1.7320508075688772]}}, "b": 3,
           "params": {"grid": {"lower": [-10], "upper": [10], "step": 0.1}, "starts": [[0], [2]],
                      "n_paths": 500, "horizon": 200, "burn_in": 10, "reference": 2,
                      "domination_times": [0.5, 1, 2], "seed": 3}})"}};
  const std::vector<std::pair<std::string, std::vector<std::string>>> runs{
      {"three_state.json", {"hitting", "lyapunov", "decay", "theorem2", "equivalence", "skeleton"}},
      {"ou.json", {"drift-check", "hitting", "diffusion"}}};
  for (const auto& [name, text] : configs) std::ofstream(root / name) << text;

  std::size_t files = 0;
  std::string mismatch;
  for (const auto& [config, subs] : runs) {
    for (const auto& sub : subs) {
      for (const char* tag : {"a", "b"}) {
        const auto dir = root / tag / sub;
        cli::run({"ergokit", sub, "--config", (root / config).string(), "--out", dir.string(), "--seed", "42",
                  "--quiet"});
      }
      for (const auto& entry : fs::directory_iterator(root / "a" / sub)) {
        const auto other = root / "b" / sub / entry.path().filename();
        ++files;
        if (!fs::exists(other) || read_file(entry.path()) != read_file(other)) {
          mismatch = sub + "/" + entry.path().filename().string();
        }
      }
    }
  }
  fs::remove_all(root);
  if (files == 0) return {false, "no output files produced"};
  return {mismatch.empty(), mismatch.empty() ? std::to_string(files) + " files byte-identical"
                                             : "differs: " + mismatch};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1 resolvent equation", ac1},
      {"AC2 drift identity", ac2},
      {"AC3 generator of the resolvent", ac3},
      {"AC4 two-state closed forms", ac4},
      {"AC5 skeleton norm equivalence", ac5},
      {"AC6 convergence integrals and skeleton sums", ac6},
      {"AC7 skeleton Lyapunov and minorization", ac7},
      {"AC8 Monte Carlo against linear algebra", ac8},
      {"AC9 Ornstein-Uhlenbeck diffusion", ac9},
      {"AC10 monotone total-variation decay", ac10},
      {"AC11 deterministic outputs", ac11},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s: %s [%.1f s]\n", o.passed ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.passed ? 0 : 1;
  }
  return failed;
}
