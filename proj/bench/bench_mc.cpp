// Serial reference against the OpenMP kernels on the Monte Carlo workloads.
// Prints wall time per policy and whether the estimates agree bit for bit.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "ergokit/ctmc_sim.hpp"
#include "ergokit/diffusion.hpp"

using namespace ergokit;

namespace {

struct Timed {
  McEstimate estimate;
  double seconds = 0.0;
};

Timed timed(const std::function<McEstimate()>& fn) {
  const auto start = std::chrono::steady_clock::now();
  Timed t{fn(), 0.0};
  t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return t;
}

bool same(const McEstimate& a, const McEstimate& b) {
  return a.estimate == b.estimate && a.std_error == b.std_error && a.censored == b.censored;
}

bool report(const std::string& name, const std::function<McEstimate(kernels::Execution)>& run) {
  const auto s = timed([&] { return run(kernels::Execution::Serial); });
  const auto p = timed([&] { return run(kernels::Execution::Parallel); });
  const bool ok = same(s.estimate, p.estimate);
  std::printf("%-28s serial %8.3f s  omp %8.3f s  speedup %5.2f  estimate %.10g  %s\n", name.c_str(),
              s.seconds, p.seconds, s.seconds / p.seconds, s.estimate.estimate, ok ? "identical" : "MISMATCH");
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t scale = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 1;
  std::printf("omp threads: %d\n", kernels::omp::max_threads());
  bool ok = true;

  const auto q = ctmc::RateMatrix::from_rows({{-2, 1, 1}, {1, -3, 2}, {0.5, 0.5, -1}});
  const std::vector<double> f{1, 2, 3};
  const FiniteSet c(3, {0});
  ok &= report("ctmc hitting (r = 1)", [&](kernels::Execution e) {
    ctmc::SimulationOptions o;
    o.n_paths = 200000 * scale;
    o.execution = e;
    return ctmc::mc_hitting_functional(q, f, c, 1.0, 2, o);
  });
  ok &= report("ctmc exponential clock", [&](kernels::Execution e) {
    ctmc::SimulationOptions o;
    o.n_paths = 200000 * scale;
    o.execution = e;
    return ctmc::mc_lyapunov(q, f, c, 2, o);
  });

  const auto ou = diffusion::DiffusionModel::builtin("ou");
  const auto fx = ScalarField::from_source("x1^2 + 1", 1);
  const auto box = Region::box({-std::sqrt(3.0)}, {std::sqrt(3.0)});
  ok &= report("ou hitting (r = 1)", [&](kernels::Execution e) {
    diffusion::McOptions o;
    o.n_paths = 5000 * scale;
    o.execution = e;
    return diffusion::mc_hitting_functional(ou, fx, box, 1.0, {2.0}, o);
  });
  ok &= report("ou exponential clock", [&](kernels::Execution e) {
    diffusion::McOptions o;
    o.n_paths = 2000 * scale;
    o.execution = e;
    return diffusion::mc_lyapunov(ou, fx, box, {2.0}, o);
  });
  return ok ? 0 : 1;
}
