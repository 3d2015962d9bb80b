#include <doctest.h>

#include <cmath>
#include <random>

#include "ergokit/analysis.hpp"
#include "ergokit/errors.hpp"
#include "ergokit/random_instances.hpp"

using namespace ergokit;
using namespace ergokit::analysis;

namespace {

ctmc::RateMatrix two_state() { return ctmc::RateMatrix::from_rows({{-1.0, 1.0}, {2.0, -2.0}}); }

double constant_of(const ExperimentReport& r, const std::string& name) {
  return r.to_json()["constants"][name].get<double>();
}

void require_all_pass(const ExperimentReport& r) {
  for (const auto& c : r.checks()) CHECK_MESSAGE(c.passed, r.name(), ": ", c.name, " = ", c.value);
}

}  // namespace

TEST_CASE("report records are recomputable and sorted") {
  ExperimentReport r("demo");
  r.check("zeta", 1.0, Relation::LessEqual, 2.0);
  r.check("alpha", 3.0, Relation::LessEqual, 2.0);
  r.check("mid", 0.0, Relation::Greater, 0.0);
  r.constant("x", INFINITY);
  const auto j = r.to_json();
  CHECK(j["checks"][0]["name"] == "alpha");
  CHECK(j["checks"][2]["name"] == "zeta");
  CHECK(j["constants"]["x"] == "inf");
  CHECK_FALSE(r.passed());
  CHECK(r.failures() == 2);
  for (const auto& c : j["checks"]) {
    const std::string rel = c["relation"];
    const double v = c["value"], t = c["threshold"];
    const bool expected = rel == "<=" ? v <= t : rel == ">=" ? v >= t : rel == "<" ? v < t : v > t;
    CHECK(c["passed"].get<bool>() == expected);
  }
}

TEST_CASE("sha256 known answer") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("equivalence suite on the two-state chain") {
  const auto r = equivalence_suite(two_state(), WeightTable::ones(2), FiniteSet(2, {0}));
  require_all_pass(r);
  const auto j = r.to_json();
  CHECK(j["constants"]["V"][0].get<double>() == doctest::Approx(1.5));
  CHECK(j["constants"]["V"][1].get<double>() == doctest::Approx(2.0));
  CHECK(j["constants"]["pi"][0].get<double>() == doctest::Approx(2.0 / 3));
  CHECK(constant_of(r, "pi_S_V") == doctest::Approx(1.0));
  CHECK(r.inputs_digest().size() == 64);
}

TEST_CASE("equivalence suite with C the whole space") {
  const auto q = two_state();
  const auto r = equivalence_suite(q, WeightTable::ones(2), FiniteSet::all(2));
  require_all_pass(r);
  const auto v = r.to_json()["constants"]["V"];
  CHECK(v[0].get<double>() == doctest::Approx(1.0));
  CHECK(v[1].get<double>() == doctest::Approx(1.0));
  CHECK(std::isfinite(constant_of(r, "b_f")));
}

TEST_CASE("equivalence suite on random chains") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 50; ++trial) {
    const auto q = ctmc::random_rate_matrix(6, rng);
    require_all_pass(equivalence_suite(q, ctmc::random_weight(6, rng), ctmc::random_subset(6, rng)));
  }
  CHECK_THROWS_AS(equivalence_suite(ctmc::RateMatrix::from_rows({{-1, 1}, {0, 0}}), WeightTable::ones(2),
                                    FiniteSet(2, {0})),
                  InvalidArgument);
}

TEST_CASE("regularity transfer") {
  const auto q = two_state();
  const auto f = WeightTable({1.0, 2.0});
  const FiniteSet c(2, {0});
  const auto r = regularity_transfer_check(q, f, c, {FiniteSet(2, {1}), c}, 2.5);
  require_all_pass(r);
  CHECK(std::isfinite(constant_of(r, "B0.c_B")));
  // B = C: G^Delta_C(f_Delta) - G_C(f) is still finite.
  CHECK(std::isfinite(constant_of(r, "B1.c_B")));
  // r = r0 leaves slack b_C r0 >= 0.
  const auto at_r0 = regularity_transfer_check(q, f, c, {c}, 1.0);
  CHECK(at_r0.find("self_regularity_slack")->value >= 0.0);
  CHECK(at_r0.find("self_regularity_slack")->value ==
        doctest::Approx(constant_of(at_r0, "b_C")).epsilon(1e-9));

  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 10; ++trial) {
    const auto qr = ctmc::random_rate_matrix(5, rng);
    const auto fr = ctmc::random_weight(5, rng);
    require_all_pass(regularity_transfer_check(qr, fr, ctmc::random_subset(5, rng),
                                               {ctmc::random_subset(5, rng)}, 3.0));
  }
}

TEST_CASE("skeleton suite") {
  const auto r = skeleton_suite(two_state(), WeightTable::ones(2), 1.0, FiniteSet(2, {0}));
  require_all_pass(r);
  for (const auto& v : r.to_json()["constants"]["f_delta"]) CHECK(v.get<double>() == doctest::Approx(1.0));
  const auto half = skeleton_suite(two_state(), WeightTable::ones(2), 0.5, FiniteSet(2, {0}));
  CHECK(half.to_json()["constants"]["below_unit_interval"] == true);

  std::mt19937_64 rng(57);
  for (int trial = 0; trial < 20; ++trial) {
    const auto q = ctmc::random_rate_matrix(3 + trial % 4, rng);
    require_all_pass(skeleton_suite(q, ctmc::random_weight(q.size(), rng), 1.0,
                                    ctmc::random_subset(q.size(), rng)));
  }
}

TEST_CASE("diffusion suite on the OU certificate") {
  const auto ou = diffusion::DiffusionModel::builtin("ou");
  diffusion::FieldCertificate cert{ScalarField::from_source("x1^2", 1),
                                   ScalarField::from_source("x1^2 + 1", 1),
                                   Region::box({-std::sqrt(3.0)}, {std::sqrt(3.0)}), 3.0, 1.0};
  DiffusionSuiteOptions opts;
  opts.grid = {{-10.0}, {10.0}, 0.01};
  opts.mc.n_paths = 4000;
  opts.mc.seed = 3;
  opts.starts = {{0.0}, {2.5}};
  opts.ergodic_start = {0.0};
  opts.horizon = 2000.0;
  opts.reference = 2.0;
  opts.domination_times = {0.0, 0.5, 1.0};
  const auto r = diffusion_suite(ou, cert, opts);
  require_all_pass(r);
  CHECK(r.find("drift_max_margin")->value <= 1e-6);
  const auto j = r.to_json();
  CHECK(j["constants"].contains("domination_max_ratio"));
  CHECK(j["provenance"]["mc"]["seed"] == 3);

  auto failing = cert;
  failing.b = 0.0;
  DiffusionSuiteOptions drift_only;
  drift_only.grid = opts.grid;
  drift_only.horizon = 0.0;
  CHECK_FALSE(diffusion_suite(ou, failing, drift_only).passed());
  auto doubled = cert;
  doubled.V = cert.V.scaled(2.0);
  doubled.f = cert.f.scaled(2.0);
  doubled.b = 6.0;
  CHECK(diffusion_suite(ou, doubled, drift_only).passed());
}
