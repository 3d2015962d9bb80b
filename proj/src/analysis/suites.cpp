#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ergokit/analysis.hpp"
#include "ergokit/errors.hpp"

namespace ergokit::analysis {

namespace {

using ctmc::RateMatrix;
using ctmc::Table;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlackTolerance = 1e-10;
constexpr double kMinorizationTolerance = 1e-12;
constexpr double kDecayRatio = 1e-6;

double max_of(std::span<const double> v) { return *std::max_element(v.begin(), v.end()); }
double min_of(std::span<const double> v) { return *std::min_element(v.begin(), v.end()); }

std::string indexed(const std::string& prefix, std::size_t i, const std::string& suffix) {
  return prefix + std::to_string(i) + "." + suffix;
}

nlohmann::json members(const FiniteSet& s) { return s.members(); }

void require_irreducible(const RateMatrix& q, const char* suite) {
  if (!q.irreducible()) throw InvalidArgument(std::string(suite) + " requires an irreducible chain");
}

}  // namespace

nlohmann::json describe(const RateMatrix& q, const WeightTable& f, const FiniteSet& c) {
  auto rows = nlohmann::json::array();
  for (std::size_t i = 0; i < q.size(); ++i) {
    auto row = nlohmann::json::array();
    for (std::size_t j = 0; j < q.size(); ++j) row.push_back(q(i, j));
    rows.push_back(std::move(row));
  }
  return {{"rates", std::move(rows)}, {"f", numbers(f.values())}, {"C", members(c)}};
}

ExperimentReport equivalence_suite(const RateMatrix& q, const WeightTable& f, const FiniteSet& c) {
  require_irreducible(q, "equivalence suite");
  if (c.empty()) throw InvalidArgument("equivalence suite: C is empty");
  ExperimentReport rep("equivalence");
  rep.set_inputs(describe(q, f, c));

  const auto pi = ctmc::stationary_distribution(q);
  const double pif = ctmc::pi_f(q, f);
  rep.constant("pi", pi);
  rep.constant("pi_f", pif);
  rep.check_true("pi_f_finite", std::isfinite(pif));

  const auto g1 = ctmc::hitting_functional(q, f, c, 1.0);
  double sup_c = 0.0;
  for (std::size_t x : c.members()) sup_c = std::max(sup_c, g1[x]);
  rep.constant("G_C_r1", g1);
  rep.constant("sup_C_G_C_r1", sup_c);
  rep.check_true("self_regularity_finite", std::isfinite(sup_c));

  const auto cert = ctmc::lyapunov_from_resolvent(q, f, c);
  rep.constant("V", cert.V());
  rep.constant("b", cert.b());
  rep.check("drift_identity_residual", ctmc::drift_identity_residual(q, f, c, cert.V()),
            Relation::LessEqual, ctmc::kIdentityTolerance);
  const auto margins = ctmc::validate_certificate(q, cert);
  rep.check("drift_max_margin", margins.max_margin, Relation::LessEqual, ctmc::kCertificateTolerance);

  double b_f = 0.0;
  for (std::size_t x = 0; x < q.size(); ++x) b_f = std::max(b_f, g1[x] / (cert.V()[x] + 1.0));
  rep.constant("b_f", b_f);
  rep.check_true("b_f_finite", std::isfinite(b_f));

  double mass = 0.0;
  for (std::size_t x = 0; x < q.size(); ++x) {
    if (std::isfinite(cert.V()[x])) mass += pi[x];
  }
  rep.constant("pi_S_V", mass);
  rep.check("pi_S_V_deficit", std::abs(1.0 - mass), Relation::LessEqual, 1e-12);

  // f-ergodicity: the f-norm distance to pi decays from every state.
  const double gap = ctmc::spectral_gap(q);
  if (std::isfinite(gap)) {
    const double horizon = 40.0 / gap;
    const std::vector<double> times{0.0, horizon};
    double worst = 0.0;
    for (std::size_t x = 0; x < q.size(); ++x) {
      const auto curve = ctmc::fnorm_decay_curve(q, f, x, times);
      if (curve.f_norm[0] > 0.0) worst = std::max(worst, curve.f_norm[1] / curve.f_norm[0]);
    }
    rep.check("f_norm_decay_ratio", worst, Relation::LessEqual, kDecayRatio);
    rep.provenance("decay_horizon", horizon);
  }
  rep.constant("spectral_gap", gap);
  return rep;
}

ExperimentReport regularity_transfer_check(const RateMatrix& q, const WeightTable& f,
                                           const FiniteSet& c, const std::vector<FiniteSet>& targets,
                                           double r, const RegularityOptions& options) {
  if (!(r >= 0.0) || !(options.r0 > 0.0)) throw InvalidArgument("regularity check needs r >= 0 and r0 > 0");
  if (options.slope_grid == 0) throw InvalidArgument("regularity check needs a nonempty r-grid");
  ExperimentReport rep("regularity_transfer");
  auto inputs = describe(q, f, c);
  auto bs = nlohmann::json::array();
  for (const auto& b : targets) bs.push_back(members(b));
  inputs["B"] = std::move(bs);
  inputs["r"] = r;
  inputs["r0"] = options.r0;
  inputs["interval"] = options.interval;
  rep.set_inputs(inputs);

  const auto g0 = ctmc::hitting_functional(q, f, c, 0.0);
  const auto gr0 = ctmc::hitting_functional(q, f, c, options.r0);
  const auto gr = ctmc::hitting_functional(q, f, c, r);
  rep.constant("G_C_r0", gr0);
  rep.constant("G_C_r", gr);

  // b_C: the largest slope (G(x; s) - G(x; r0)) / s over the grid.
  const double r_max = std::max(r, 2.0 * options.r0);
  double b_c = 0.0;
  bool monotone = true;
  Table previous = g0;
  for (std::size_t j = 1; j <= options.slope_grid; ++j) {
    const double s = r_max * static_cast<double>(j) / static_cast<double>(options.slope_grid);
    const auto gs = ctmc::hitting_functional(q, f, c, s);
    for (std::size_t x = 0; x < q.size(); ++x) {
      b_c = std::max(b_c, (gs[x] - gr0[x]) / s);
      monotone = monotone && gs[x] >= previous[x] - kSlackTolerance * (1.0 + previous[x]);
    }
    previous = gs;
  }
  rep.constant("b_C", b_c);
  rep.provenance("b_C_grid", {{"points", options.slope_grid}, {"r_max", r_max}});
  rep.check_true("G_C_nondecreasing_in_r", monotone);
  // G(x; s) <= s max f + max G0 and G(x; r0) >= min G0 bound every slope for s >= r0,
  // and slopes below r0 are nonpositive.
  rep.check("b_C_within_analytic_bound", b_c, Relation::LessEqual,
            max_of(f.values()) + (max_of(g0) - min_of(g0)) / options.r0);
  double slack = kInf;
  for (std::size_t x = 0; x < q.size(); ++x) slack = std::min(slack, gr0[x] + b_c * r - gr[x]);
  rep.check("self_regularity_slack", slack, Relation::GreaterEqual, -kSlackTolerance);

  const auto fd = ctmc::f_delta(q, f, options.interval);
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const auto& b = targets[k];
    std::size_t violations = 0;
    const auto gb0 = ctmc::hitting_functional(q, f, b, 0.0);
    const auto gbr = ctmc::hitting_functional(q, f, b, r);
    for (std::size_t x = 0; x < q.size(); ++x) {
      if (std::isfinite(g0[x]) && !std::isfinite(gb0[x])) ++violations;
      if (std::isfinite(gr[x]) && !std::isfinite(gbr[x])) ++violations;
    }
    rep.check(indexed("B", k, "transfer_violations"), static_cast<double>(violations),
              Relation::LessEqual, 0.0);
    const auto gd = ctmc::skeleton_hitting_sum(q, options.interval, fd, b);
    double c_b = -kInf;
    for (std::size_t x = 0; x < q.size(); ++x) c_b = std::max(c_b, gd[x] - g0[x]);
    rep.constant(indexed("B", k, "c_B"), c_b);
    rep.constant(indexed("B", k, "G_B"), gb0);
    rep.check_true(indexed("B", k, "c_B_finite"), std::isfinite(c_b));
  }
  return rep;
}

ExperimentReport skeleton_suite(const RateMatrix& q, const WeightTable& f, double interval,
                                const FiniteSet& c, const SkeletonSuiteOptions& options) {
  require_irreducible(q, "skeleton suite");
  ExperimentReport rep("skeleton");
  auto inputs = describe(q, f, c);
  inputs["interval"] = interval;
  rep.set_inputs(inputs);

  const auto sk = ctmc::construct_skeleton_lyapunov(q, f, interval, c);
  rep.constant("interval", interval);
  rep.constant_json("below_unit_interval", sk.below_unit_interval);
  rep.constant("f_delta", sk.f_delta);
  rep.constant("V_delta", sk.v_delta);
  rep.constant("margins", sk.margins);
  rep.constant("b", sk.b);
  rep.constant("b0", sk.b0);
  rep.constant("k0", static_cast<double>(sk.k0));
  rep.constant("eps0", sk.eps0);
  rep.constant("eps_grid", sk.eps_grid);
  rep.constant("eps_exact", sk.eps_exact);
  rep.constant("textbook_b", sk.textbook_b);
  rep.constant_json("textbook_b_dominates", sk.textbook_b >= sk.b);
  rep.constant("distance_to_hitting", sk.distance_to_hitting);
  rep.constant("off_c_margin_hitting_sum_variant", sk.off_c_margin_hitting_sum_variant);
  rep.constant("off_c_margin_r1_variant", sk.off_c_margin_r1_variant);

  rep.check("skeleton_drift_max_margin", sk.max_margin, Relation::LessEqual, ctmc::kCertificateTolerance);
  rep.check("minorization_min_margin", sk.min_minorization_margin, Relation::GreaterEqual,
            -kMinorizationTolerance);
  rep.check("eps0", sk.eps0, Relation::Greater, 0.0);
  rep.check_true("V_delta_minus_G_C_bounded", std::isfinite(sk.distance_to_hitting));

  if (q.size() < 2) return rep;

  const auto v = ctmc::lyapunov_from_resolvent(q, f, c).V();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t x = 0; x < q.size(); ++x) {
    for (std::size_t y = x + 1; y < q.size(); ++y) pairs.emplace_back(x, y);
  }
  const double gap = ctmc::spectral_gap(q);
  const double t_max = options.t_max > 0.0 ? options.t_max : 40.0 / gap;
  const auto integrals = ctmc::theorem2_bound(q, f, v, t_max, pairs);
  const auto sums = ctmc::skeleton_sums(q, f, interval, v, pairs);

  double slack = kInf;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    slack = std::min(slack, sums.pairs[i].sum - integrals.pairs[i].integral + integrals.pairs[i].error);
  }
  for (std::size_t x = 0; x < q.size(); ++x) {
    slack = std::min(slack, sums.states[x].sum - integrals.states[x].integral + integrals.states[x].error);
  }
  rep.check("discrete_sum_minus_integral", slack, Relation::GreaterEqual, 0.0);
  rep.check_true("convergence_constants_finite",
                 std::isfinite(integrals.pair_constant) && std::isfinite(integrals.state_constant) &&
                     std::isfinite(sums.pair_constant) && std::isfinite(sums.state_constant));
  rep.constant("B_f", integrals.pair_constant);
  rep.constant("B_f0", integrals.state_constant);
  rep.constant("M_f", sums.pair_constant);
  rep.constant("M_f0", sums.state_constant);
  rep.constant("V", v);
  rep.provenance("t_max", t_max);
  rep.provenance("skeleton_terms", sums.terms);
  return rep;
}

ExperimentReport diffusion_suite(const diffusion::DiffusionModel& model,
                                 const diffusion::FieldCertificate& cert,
                                 const DiffusionSuiteOptions& options) {
  ExperimentReport rep("diffusion");
  nlohmann::json inputs{{"model", model.name()},
                        {"d", model.state_dimension()},
                        {"k", model.noise_dimension()},
                        {"V", cert.V.description()},
                        {"f", cert.f.description()},
                        {"C_lower", numbers(cert.C.lower())},
                        {"C_upper", numbers(cert.C.upper())},
                        {"b", cert.b},
                        {"delta", cert.delta}};
  rep.set_inputs(inputs);

  const auto grid = diffusion::uniform_grid(options.grid.lower, options.grid.upper, options.grid.step);
  const auto drift = diffusion::drift_condition_check(model, cert, grid, options.tolerance,
                                                      options.mc.execution);
  rep.check("drift_max_margin", drift.max_margin, Relation::LessEqual, options.tolerance);
  rep.constant("drift_worst_point", std::span<const double>(drift.worst_point));
  rep.provenance("grid", {{"lower", options.grid.lower},
                          {"upper", options.grid.upper},
                          {"step", options.grid.step},
                          {"points", grid.size()}});
  rep.provenance("mc", {{"seed", options.mc.seed},
                        {"n_paths", options.mc.n_paths},
                        {"dt", options.mc.dt},
                        {"time_cap", options.mc.time_cap}});

  if (!options.starts.empty()) {
    double worst_z = 0.0;
    std::vector<double> clock_values, integral_values, clock_se, integral_se;
    std::vector<double> clock_censored, integral_censored;
    for (const auto& x0 : options.starts) {
      const auto clock = diffusion::mc_lyapunov(model, cert.f, cert.C, x0, options.mc);
      const auto integral = diffusion::mc_lyapunov_integral_form(model, cert.f, cert.C, x0, options.mc);
      const double se = std::hypot(clock.std_error, integral.std_error);
      const double diff = std::abs(clock.estimate - integral.estimate);
      worst_z = std::max(worst_z, se > 0.0 ? diff / se : (diff > 0.0 ? kInf : 0.0));
      clock_values.push_back(clock.estimate);
      clock_se.push_back(clock.std_error);
      integral_values.push_back(integral.estimate);
      integral_se.push_back(integral.std_error);
      clock_censored.push_back(static_cast<double>(clock.censored) / static_cast<double>(clock.n_paths));
      integral_censored.push_back(static_cast<double>(integral.censored) /
                                  static_cast<double>(integral.n_paths));
    }
    rep.check("lyapunov_estimators_z", worst_z, Relation::LessEqual, 3.0);
    rep.constant("V_clock", clock_values);
    rep.constant("V_clock_se", clock_se);
    rep.constant("V_integral", integral_values);
    rep.constant("V_integral_se", integral_se);
    rep.constant("censored_fraction_clock", clock_censored);
    rep.constant("censored_fraction_integral", integral_censored);
    auto starts = nlohmann::json::array();
    for (const auto& x0 : options.starts) starts.push_back(x0);
    rep.provenance("starts", std::move(starts));
  }

  if (options.horizon > 0.0) {
    const auto avg = diffusion::ergodic_average(model, cert.f, options.ergodic_start, options.horizon,
                                                options.mc.dt, options.burn_in, options.mc.seed,
                                                options.n_batches);
    rep.constant("ergodic_average", avg.estimate);
    rep.constant("ergodic_average_se", avg.std_error);
    rep.provenance("ergodic", {{"start", options.ergodic_start},
                               {"horizon", options.horizon},
                               {"burn_in", options.burn_in},
                               {"batches", avg.n_batches},
                               {"samples", avg.samples}});
    if (options.reference) {
      const double diff = std::abs(avg.estimate - *options.reference);
      const double z = avg.std_error > 0.0 ? diff / avg.std_error : (diff > 0.0 ? kInf : 0.0);
      rep.check("ergodic_average_z", z, Relation::LessEqual, 3.0);
      rep.constant("reference", *options.reference);
    }
  }

  if (!options.domination_times.empty()) {
    const auto& x0 = options.ergodic_start;
    const auto est = diffusion::mc_semigroup(model, cert.f, x0, options.domination_times, options.mc);
    const double f0 = cert.f(x0);
    double worst = -kInf;
    std::vector<double> curve;
    for (std::size_t i = 0; i < est.size(); ++i) {
      const double t = options.domination_times[i];
      const double ratio = est[i].estimate / (options.beta * std::exp(options.beta * t) * f0);
      curve.push_back(est[i].estimate);
      worst = std::max(worst, ratio);
    }
    // Reported as data: the bound is a hypothesis of a separate result, not
    // part of the drift certificate.
    rep.constant("domination_max_ratio", worst);
    rep.constant_json("domination_holds", worst <= 1.0);
    rep.constant("semigroup_f", curve);
    rep.provenance("domination", {{"beta", options.beta}, {"times", options.domination_times}});
  }
  return rep;
}

}  // namespace ergokit::analysis
