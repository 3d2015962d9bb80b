#include <doctest.h>

#include <cstring>
#include <stdexcept>

#include "ergokit/ctmc_sim.hpp"
#include "ergokit/diffusion.hpp"
#include "ergokit/kernels.hpp"

using namespace ergokit;

namespace {

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("serial and parallel kernels fill identical slots") {
  std::vector<kernels::PathOutcome> s(1000), p(1000);
  auto task = [](std::size_t i) {
    auto rng = kernels::make_stream(9, i, kernels::Stream::Increments);
    return kernels::PathOutcome{std::uniform_real_distribution<double>()(rng), i % 7 == 0};
  };
  kernels::serial::run_paths(s, task);
  kernels::omp::run_paths(p, task);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(bit_equal(s[i].value, p[i].value));
    CHECK(s[i].censored == p[i].censored);
  }
  std::vector<double> a(500), b(500);
  kernels::serial::run_points(a, [](std::size_t i) { return 1.0 / (1.0 + i); });
  kernels::omp::run_points(b, [](std::size_t i) { return 1.0 / (1.0 + i); });
  CHECK(a == b);
  CHECK(kernels::omp::max_threads() >= 1);
}

TEST_CASE("exceptions escape the parallel kernel") {
  std::vector<kernels::PathOutcome> out(100);
  CHECK_THROWS_AS(kernels::omp::run_paths(out,
                                          [](std::size_t i) -> kernels::PathOutcome {
                                            if (i == 37) throw std::runtime_error("boom");
                                            return {};
                                          }),
                  std::runtime_error);
}

TEST_CASE("streams differ by task and purpose") {
  auto a = kernels::make_stream(1, 0, kernels::Stream::Increments);
  auto b = kernels::make_stream(1, 1, kernels::Stream::Increments);
  auto c = kernels::make_stream(1, 0, kernels::Stream::Clock);
  auto d = kernels::make_stream(1, 0, kernels::Stream::Increments);
  const auto x = a();
  CHECK(x != b());
  CHECK(x != c());
  CHECK(x == d());
}

TEST_CASE("Monte Carlo estimators do not depend on the execution policy") {
  const auto q = ctmc::RateMatrix::from_rows({{-1.0, 1.0, 0.0}, {0.5, -1.0, 0.5}, {0.0, 2.0, -2.0}});
  const std::vector<double> f{1.0, 2.0, 3.0};
  const FiniteSet c(3, {0});
  ctmc::SimulationOptions serial{5000, 3, 1e3, kernels::Execution::Serial};
  auto parallel = serial;
  parallel.execution = kernels::Execution::Parallel;
  const auto hs = ctmc::mc_hitting_functional(q, f, c, 0.5, 2, serial);
  const auto hp = ctmc::mc_hitting_functional(q, f, c, 0.5, 2, parallel);
  CHECK(bit_equal(hs.estimate, hp.estimate));
  CHECK(bit_equal(hs.std_error, hp.std_error));
  const auto ls = ctmc::mc_lyapunov(q, f, c, 2, serial);
  const auto lp = ctmc::mc_lyapunov(q, f, c, 2, parallel);
  CHECK(bit_equal(ls.estimate, lp.estimate));

  const auto ou = diffusion::DiffusionModel::builtin("ou");
  diffusion::McOptions ds;
  ds.n_paths = 500;
  ds.execution = kernels::Execution::Serial;
  auto dp = ds;
  dp.execution = kernels::Execution::Parallel;
  const auto g = ScalarField::from_source("x1^2 + 1", 1);
  const auto region = Region::box({-1.0}, {1.0});
  CHECK(bit_equal(diffusion::mc_lyapunov(ou, g, region, {2.0}, ds).estimate,
                  diffusion::mc_lyapunov(ou, g, region, {2.0}, dp).estimate));
  const auto grid = diffusion::uniform_grid({-5.0}, {5.0}, 0.1);
  diffusion::FieldCertificate cert{ScalarField::from_source("x1^2", 1), g, region, 3.0, 1.0};
  CHECK(diffusion::drift_condition_check(ou, cert, grid, 1e-6, kernels::Execution::Serial).margins ==
        diffusion::drift_condition_check(ou, cert, grid, 1e-6, kernels::Execution::Parallel).margins);
}

TEST_CASE("summaries") {
  std::vector<kernels::PathOutcome> out{{1.0, false}, {3.0, false}, {5.0, true}};
  const auto s = summarize(out);
  CHECK(s.estimate == doctest::Approx(3.0));
  CHECK(s.std_error == doctest::Approx(2.0 / std::sqrt(3.0)));
  CHECK(s.censored == 1);
  std::vector<kernels::PathOutcome> all{{1.0, true}, {2.0, true}};
  CHECK_THROWS(summarize(all));
}
