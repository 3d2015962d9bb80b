#include "ergokit/cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <unistd.h>

#include "ergokit/analysis.hpp"
#include "ergokit/config.hpp"
#include "ergokit/ctmc_sim.hpp"

namespace ergokit::cli {

namespace {

namespace fs = std::filesystem;
using analysis::ExperimentReport;
using analysis::Relation;
using nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 1;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

class Output {
public:
  Output(fs::path dir, std::string digest, bool quiet)
      : dir_(std::move(dir)), digest_(std::move(digest)), quiet_(quiet) {
    fs::create_directories(dir_);
  }

  void report(const std::string& subcommand, const ExperimentReport& rep, std::optional<std::uint64_t> seed,
              const std::string& status, const std::string& error = {}) {
    json j = rep.to_json();
    j["subcommand"] = subcommand;
    j["config_digest"] = digest_;
    j["tool"] = {{"name", "ergokit"}, {"version", kVersion}};
    j["status"] = status;
    if (seed) j["seed"] = *seed;
    if (!error.empty()) j["error"] = error;
    write(rep.name() + ".json", j.dump(2) + "\n");
    if (!quiet_) {
      for (const auto& c : rep.checks()) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << rep.name() << "." << c.name << " = "
                  << format_number(c.value) << " " << analysis::relation_symbol(c.relation) << " "
                  << format_number(c.threshold) << "\n";
      }
    }
  }

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows) {
    std::string text = "# config_digest=" + digest_ + " version=" + kVersion + "\n";
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) text += (i ? "," : "") + cells[i];
      text += "\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
    write(name + ".csv", text);
  }

private:
  void write(const std::string& name, const std::string& text) {
    const fs::path target = dir_ / name;
    const fs::path tmp = dir_ / (name + ".tmp." + std::to_string(::getpid()));
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << text;
      out.flush();
      if (!out) throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, target);
    if (!quiet_) std::cout << "wrote " << target.string() << "\n";
  }

  fs::path dir_;
  std::string digest_;
  bool quiet_;
};

struct Context {
  ModelConfig& cfg;
  Output& out;
  std::optional<std::uint64_t> seed_override;
  std::string subcommand;

  std::uint64_t seed() const { return seed_override.value_or(cfg.params.seed(kDefaultSeed)); }
  const Params& params() const { return cfg.params; }
};

using Handler = std::function<std::vector<ExperimentReport>(Context&)>;

const ctmc::RateMatrix& chain(const Context& ctx) {
  if (ctx.cfg.kind != ModelConfig::Kind::Ctmc) {
    throw ConfigError("model.kind", ctx.subcommand + " requires a ctmc model");
  }
  return *ctx.cfg.chain;
}

const FiniteSet& set_c(const Context& ctx) {
  if (!ctx.cfg.c_set) throw ConfigError("C", "missing required field");
  return *ctx.cfg.c_set;
}

const Region& region_c(const Context& ctx) {
  if (!ctx.cfg.c_region) throw ConfigError("C", "missing required field");
  return *ctx.cfg.c_region;
}

double required_b(const Context& ctx) {
  if (!ctx.cfg.b) throw ConfigError("b", "missing required field");
  return *ctx.cfg.b;
}

std::vector<double> table_param(const Context& ctx, const std::string& key, std::vector<double> fallback) {
  auto v = ctx.params().numbers(key).value_or(std::move(fallback));
  if (v.size() != ctx.cfg.chain->size()) {
    throw ConfigError("params." + key, "expected " + std::to_string(ctx.cfg.chain->size()) + " entries");
  }
  return v;
}

std::size_t state_param(const Context& ctx, const std::string& key) {
  const auto x = ctx.params().count(key, 0);
  if (x >= ctx.cfg.chain->size()) throw ConfigError("params." + key, "state index out of range");
  return x;
}

std::vector<Point> starts(const Context& ctx, std::size_t d) {
  auto pts = ctx.params().points("starts").value_or(std::vector<Point>{Point(d, 0.0)});
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].size() != d) throw ConfigError("params.starts[" + std::to_string(i) + "]", "wrong dimension");
  }
  return pts;
}

analysis::GridSpec grid_param(const Context& ctx, std::size_t d) {
  const auto& raw = ctx.params().raw();
  if (!raw.contains("grid")) throw ConfigError("params.grid", "missing required field");
  const auto& g = raw["grid"];
  if (!g.is_object()) throw ConfigError("params.grid", "expected {lower, upper, step}");
  const Params sub(g);
  analysis::GridSpec spec;
  auto lower = sub.numbers("lower");
  auto upper = sub.numbers("upper");
  auto step = sub.number("step");
  if (!lower || lower->size() != d) throw ConfigError("params.grid.lower", "expected " + std::to_string(d) + " numbers");
  if (!upper || upper->size() != d) throw ConfigError("params.grid.upper", "expected " + std::to_string(d) + " numbers");
  if (!step || !(*step > 0.0)) throw ConfigError("params.grid.step", "expected a positive number");
  spec.lower = *lower;
  spec.upper = *upper;
  spec.step = *step;
  return spec;
}

diffusion::McOptions mc_options(const Context& ctx) {
  diffusion::McOptions o;
  const auto& p = ctx.params();
  o.n_paths = p.count("n_paths", o.n_paths);
  o.dt = p.number("dt", o.dt);
  o.time_cap = p.number("time_cap", o.time_cap);
  o.seed = ctx.seed();
  return o;
}

ctmc::SimulationOptions sim_options(const Context& ctx) {
  ctmc::SimulationOptions o;
  const auto& p = ctx.params();
  o.n_paths = p.count("n_paths", o.n_paths);
  o.time_cap = p.number("time_cap", o.time_cap);
  o.seed = ctx.seed();
  return o;
}

std::vector<std::string> point_header(std::size_t d) {
  std::vector<std::string> h;
  for (std::size_t i = 1; i <= d; ++i) h.push_back("x" + std::to_string(i));
  return h;
}

std::vector<std::string> point_cells(const Point& p) {
  std::vector<std::string> c;
  for (double v : p) c.push_back(format_number(v));
  return c;
}

double z_score(double estimate, double se, double exact) {
  const double diff = std::abs(estimate - exact);
  if (se > 0.0) return diff / se;
  return diff > 0.0 ? INFINITY : 0.0;
}

// ---- subcommands ----------------------------------------------------------

std::vector<ExperimentReport> drift_check(Context& ctx) {
  ExperimentReport rep("drift_check");
  if (ctx.cfg.kind == ModelConfig::Kind::Ctmc) {
    const auto& q = chain(ctx);
    if (!ctx.cfg.v_table) throw ConfigError("V", "missing required field");
    rep.set_inputs(analysis::describe(q, *ctx.cfg.f_table, set_c(ctx)));
    std::optional<ctmc::DriftCertificate> cert;
    try {
      cert.emplace(*ctx.cfg.v_table, *ctx.cfg.f_table, set_c(ctx), required_b(ctx), ctx.cfg.delta);
    } catch (const ConfigError&) {
      throw;
    } catch (const InvalidArgument& e) {
      throw ConfigError("V", e.what());
    }
    const double tol = ctx.params().number("tolerance", ctmc::kCertificateTolerance);
    const auto m = ctmc::validate_certificate(q, *cert, tol);
    rep.check("max_margin", m.max_margin, Relation::LessEqual, tol);
    rep.constant("worst_state", static_cast<double>(m.worst_state));
    std::vector<std::vector<std::string>> rows;
    for (std::size_t x = 0; x < q.size(); ++x) {
      rows.push_back({std::to_string(x), q.space().label(x), format_number((*ctx.cfg.v_table)[x]),
                      m.margin[x] ? format_number(*m.margin[x]) : "nan"});
    }
    ctx.out.csv("drift_margins", {"state", "label", "V", "margin"}, rows);
  } else {
    const auto& model = *ctx.cfg.diffusion;
    if (!ctx.cfg.v_field) throw ConfigError("V", "missing required field");
    const auto d = model.state_dimension();
    const auto spec = grid_param(ctx, d);
    const diffusion::FieldCertificate cert{*ctx.cfg.v_field, *ctx.cfg.f_field, region_c(ctx), required_b(ctx),
                                           ctx.cfg.delta};
    rep.set_inputs({{"model", model.name()}, {"V", cert.V.description()}, {"f", cert.f.description()},
                    {"b", cert.b}, {"delta", cert.delta}});
    const double tol = ctx.params().number("tolerance", diffusion::kDriftTolerance);
    const auto grid = diffusion::uniform_grid(spec.lower, spec.upper, spec.step);
    const auto r = diffusion::drift_condition_check(model, cert, grid, tol);
    rep.check("max_margin", r.max_margin, Relation::LessEqual, tol);
    rep.constant("worst_point", std::span<const double>(r.worst_point));
    rep.provenance("grid", {{"lower", spec.lower}, {"upper", spec.upper}, {"step", spec.step},
                            {"points", grid.size()}});
    auto header = point_header(d);
    header.push_back("margin");
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      auto row = point_cells(grid[i]);
      row.push_back(format_number(r.margins[i]));
      rows.push_back(std::move(row));
    }
    ctx.out.csv("drift_margins", header, rows);
  }
  return {rep};
}

std::vector<ExperimentReport> resolvent_verify(Context& ctx) {
  const auto& q = chain(ctx);
  const auto n = q.size();
  ExperimentReport rep("resolvent_verify");
  const auto g = table_param(ctx, "g", std::vector<double>(n, 2.0));
  const auto h = table_param(ctx, "h", std::vector<double>(n, 1.0));
  const double alpha = ctx.params().number("alpha", 1.0);
  auto inputs = analysis::describe(q, *ctx.cfg.f_table, FiniteSet(n, {}));
  inputs["g"] = g;
  inputs["h"] = h;
  inputs["alpha"] = alpha;
  rep.set_inputs(inputs);
  try {
    rep.check("resolvent_equation_residual", ctmc::verify_resolvent_equation(q, g, h), Relation::LessEqual,
              ctmc::kIdentityTolerance);
    rep.check("generator_identity_residual", ctmc::generator_of_resolvent_check(q, g), Relation::LessEqual,
              ctmc::kIdentityTolerance);
  } catch (const NumericalError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError("params.g", e.what());
  }
  const auto r = ctmc::resolvent(q, alpha);
  const auto rh = ctmc::generalized_resolvent(q, h);
  rep.check("resolvent_row_sum_error", (r.rowwise().sum().array() - 1.0 / alpha).abs().maxCoeff(),
            Relation::LessEqual, ctmc::kIdentityTolerance);
  rep.check("generalized_resolvent_min_entry", rh.minCoeff(), Relation::GreaterEqual, 0.0);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      rows.push_back({std::to_string(x), std::to_string(y), format_number(r(x, y)), format_number(rh(x, y))});
    }
  }
  ctx.out.csv("resolvent", {"x", "y", "R_alpha", "R_h"}, rows);
  return {rep};
}

std::vector<ExperimentReport> hitting(Context& ctx) {
  ExperimentReport rep("hitting");
  const double r = ctx.params().number("r", 0.0);
  if (!(r >= 0.0)) throw ConfigError("params.r", "must be nonnegative");
  if (ctx.cfg.kind == ModelConfig::Kind::Ctmc) {
    const auto& q = chain(ctx);
    const auto& c = set_c(ctx);
    auto inputs = analysis::describe(q, *ctx.cfg.f_table, c);
    inputs["r"] = r;
    rep.set_inputs(inputs);
    const auto g = ctmc::hitting_functional(q, *ctx.cfg.f_table, c, r);
    rep.constant("G", g);
    rep.check("min_value", *std::min_element(g.begin(), g.end()), Relation::GreaterEqual, 0.0);
    std::vector<std::string> header{"state", "exact"};
    std::vector<std::vector<std::string>> rows;
    for (std::size_t x = 0; x < q.size(); ++x) rows.push_back({std::to_string(x), format_number(g[x])});
    if (ctx.params().flag("monte_carlo", false)) {
      const auto opts = sim_options(ctx);
      double worst = 0.0;
      header.insert(header.end(), {"mc", "se", "censored"});
      for (std::size_t x = 0; x < q.size(); ++x) {
        const auto e = ctmc::mc_hitting_functional(q, ctx.cfg.f_table->values(), c, r, x, opts);
        worst = std::max(worst, z_score(e.estimate, e.std_error, g[x]));
        rows[x].insert(rows[x].end(), {format_number(e.estimate), format_number(e.std_error),
                                       std::to_string(e.censored)});
      }
      rep.check("mc_max_z", worst, Relation::LessEqual, 3.0);
      rep.provenance("mc", {{"seed", opts.seed}, {"n_paths", opts.n_paths}, {"time_cap", opts.time_cap}});
    }
    ctx.out.csv("hitting", header, rows);
  } else {
    const auto& model = *ctx.cfg.diffusion;
    const auto d = model.state_dimension();
    const auto opts = mc_options(ctx);
    rep.set_inputs({{"model", model.name()}, {"f", ctx.cfg.f_field->description()}, {"r", r}});
    auto header = point_header(d);
    header.insert(header.end(), {"estimate", "se", "censored"});
    std::vector<std::vector<std::string>> rows;
    std::size_t censored = 0;
    for (const auto& x0 : starts(ctx, d)) {
      const auto e = diffusion::mc_hitting_functional(model, *ctx.cfg.f_field, region_c(ctx), r, x0, opts);
      censored += e.censored;
      auto row = point_cells(x0);
      row.insert(row.end(), {format_number(e.estimate), format_number(e.std_error), std::to_string(e.censored)});
      rows.push_back(std::move(row));
    }
    rep.constant("censored_paths", static_cast<double>(censored));
    rep.provenance("mc", {{"seed", opts.seed}, {"n_paths", opts.n_paths}, {"dt", opts.dt},
                          {"time_cap", opts.time_cap}});
    ctx.out.csv("hitting", header, rows);
  }
  return {rep};
}

std::vector<ExperimentReport> lyapunov(Context& ctx) {
  ExperimentReport rep("lyapunov");
  if (ctx.cfg.kind == ModelConfig::Kind::Ctmc) {
    const auto& q = chain(ctx);
    const auto& c = set_c(ctx);
    const auto& f = *ctx.cfg.f_table;
    rep.set_inputs(analysis::describe(q, f, c));
    const auto cert = ctmc::lyapunov_from_resolvent(q, f, c);
    const auto m = ctmc::validate_certificate(q, cert);
    rep.constant("V", cert.V());
    rep.constant("b", cert.b());
    rep.check("drift_identity_residual", ctmc::drift_identity_residual(q, f, c, cert.V()), Relation::LessEqual,
              ctmc::kIdentityTolerance);
    rep.check("drift_max_margin", m.max_margin, Relation::LessEqual, ctmc::kCertificateTolerance);
    std::vector<std::string> header{"state", "V", "margin"};
    std::vector<std::vector<std::string>> rows;
    for (std::size_t x = 0; x < q.size(); ++x) {
      rows.push_back({std::to_string(x), format_number(cert.V()[x]), format_number(*m.margin[x])});
    }
    if (ctx.params().flag("monte_carlo", false)) {
      const auto opts = sim_options(ctx);
      double worst = 0.0;
      header.insert(header.end(), {"mc", "se", "censored"});
      for (std::size_t x = 0; x < q.size(); ++x) {
        const auto e = ctmc::mc_lyapunov(q, f.values(), c, x, opts);
        worst = std::max(worst, z_score(e.estimate, e.std_error, cert.V()[x]));
        rows[x].insert(rows[x].end(), {format_number(e.estimate), format_number(e.std_error),
                                       std::to_string(e.censored)});
      }
      rep.check("mc_max_z", worst, Relation::LessEqual, 3.0);
      rep.provenance("mc", {{"seed", opts.seed}, {"n_paths", opts.n_paths}, {"time_cap", opts.time_cap}});
    }
    ctx.out.csv("lyapunov", header, rows);
  } else {
    const auto& model = *ctx.cfg.diffusion;
    const auto d = model.state_dimension();
    const auto opts = mc_options(ctx);
    rep.set_inputs({{"model", model.name()}, {"f", ctx.cfg.f_field->description()}});
    auto header = point_header(d);
    header.insert(header.end(), {"clock", "clock_se", "integral", "integral_se"});
    std::vector<std::vector<std::string>> rows;
    double worst = 0.0;
    for (const auto& x0 : starts(ctx, d)) {
      const auto a = diffusion::mc_lyapunov(model, *ctx.cfg.f_field, region_c(ctx), x0, opts);
      const auto b = diffusion::mc_lyapunov_integral_form(model, *ctx.cfg.f_field, region_c(ctx), x0, opts);
      worst = std::max(worst, z_score(a.estimate, std::hypot(a.std_error, b.std_error), b.estimate));
      auto row = point_cells(x0);
      row.insert(row.end(), {format_number(a.estimate), format_number(a.std_error), format_number(b.estimate),
                             format_number(b.std_error)});
      rows.push_back(std::move(row));
    }
    rep.check("estimators_max_z", worst, Relation::LessEqual, 3.0);
    rep.provenance("mc", {{"seed", opts.seed}, {"n_paths", opts.n_paths}, {"dt", opts.dt},
                          {"time_cap", opts.time_cap}});
    ctx.out.csv("lyapunov", header, rows);
  }
  return {rep};
}

std::vector<std::string> column(const json& constants, const std::string& key) {
  std::vector<std::string> out;
  for (const auto& v : constants.at(key)) out.push_back(v.is_number() ? format_number(v.get<double>()) : v.get<std::string>());
  return out;
}

std::vector<ExperimentReport> skeleton(Context& ctx) {
  const auto& q = chain(ctx);
  analysis::SkeletonSuiteOptions opts;
  opts.t_max = ctx.params().number("t_max", 0.0);
  const double interval = ctx.params().number("interval", 1.0);
  auto rep = analysis::skeleton_suite(q, *ctx.cfg.f_table, interval, set_c(ctx), opts);
  const auto j = rep.to_json()["constants"];
  const auto fd = column(j, "f_delta");
  const auto vd = column(j, "V_delta");
  const auto margins = column(j, "margins");
  std::vector<std::vector<std::string>> rows;
  for (std::size_t x = 0; x < q.size(); ++x) rows.push_back({std::to_string(x), fd[x], vd[x], margins[x]});
  ctx.out.csv("skeleton", {"state", "f_delta", "V_delta", "margin"}, rows);
  return {rep};
}

std::vector<ExperimentReport> norm_check(Context& ctx) {
  const auto& q = chain(ctx);
  const auto n = q.size();
  const auto& f = *ctx.cfg.f_table;
  const double interval = ctx.params().number("interval", 1.0);
  std::vector<double> mass;
  if (ctx.params().has("mu")) {
    mass = table_param(ctx, "mu", {});
  } else {
    const auto pi = ctmc::stationary_distribution(q);
    mass.assign(n, 0.0);
    mass[state_param(ctx, "x0")] = 1.0;
    for (std::size_t x = 0; x < n; ++x) mass[x] -= pi[x];
  }
  ExperimentReport rep("norm_check");
  auto inputs = analysis::describe(q, f, FiniteSet(n, {}));
  inputs["mu"] = mass;
  inputs["interval"] = interval;
  rep.set_inputs(inputs);
  const FiniteSignedMeasure mu(mass);
  const auto r = ctmc::norm_equiv_check(q, mu, f, interval);
  rep.constant("lhs", r.lhs);
  rep.constant("rhs", r.rhs);
  rep.constant("quadrature_error", r.quadrature_error);
  rep.check("lhs_minus_rhs", r.lhs - r.rhs, Relation::GreaterEqual, -ctmc::kQuadratureTolerance);
  if (std::all_of(mass.begin(), mass.end(), [](double m) { return m >= 0.0; })) {
    rep.check("nonnegative_equality_gap", std::abs(r.lhs - r.rhs), Relation::LessEqual, ctmc::kQuadratureTolerance);
  }
  const std::size_t points = ctx.params().count("curve_points", 64);
  std::vector<std::vector<std::string>> rows;
  const Eigen::Map<const Eigen::VectorXd> m(mass.data(), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i <= points; ++i) {
    const double t = interval * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(points, 1));
    const Eigen::VectorXd moved = (m.transpose() * ctmc::transition_semigroup(q, t).matrix()).transpose();
    rows.push_back({format_number(t), format_number(weighted_norm(FiniteSignedMeasure(std::vector<double>(
                                                                      moved.data(), moved.data() + n)),
                                                                  f.values()))});
  }
  ctx.out.csv("norm_curve", {"t", "f_norm"}, rows);
  return {rep};
}

std::vector<ExperimentReport> decay(Context& ctx) {
  const auto& q = chain(ctx);
  const auto x0 = state_param(ctx, "x0");
  const auto grid = ctx.params().time_grid("t_grid");
  if (!grid || grid->empty()) throw ConfigError("params.t_grid", "missing required field");
  ExperimentReport rep("decay");
  auto inputs = analysis::describe(q, *ctx.cfg.f_table, FiniteSet(q.size(), {}));
  inputs["x0"] = x0;
  rep.set_inputs(inputs);
  rep.provenance("t_grid", *grid);
  const auto curve = ctmc::fnorm_decay_curve(q, *ctx.cfg.f_table, x0, *grid);
  rep.check_true("tv_non_increasing", curve.tv_non_increasing);
  rep.constant("final_f_norm", curve.f_norm.back());
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < curve.t.size(); ++i) {
    rows.push_back({format_number(curve.t[i]), format_number(curve.f_norm[i]), format_number(curve.tv[i])});
  }
  ctx.out.csv("decay", {"t", "f_norm", "tv"}, rows);
  return {rep};
}

std::vector<ExperimentReport> theorem2(Context& ctx) {
  const auto& q = chain(ctx);
  const auto n = q.size();
  const auto& f = *ctx.cfg.f_table;
  ctmc::Table v;
  if (ctx.cfg.v_table) {
    v = *ctx.cfg.v_table;
  } else {
    v = ctmc::lyapunov_from_resolvent(q, f, set_c(ctx)).V();
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (auto p = ctx.params().pairs("pairs")) {
    pairs = *p;
  } else {
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t y = x + 1; y < n; ++y) pairs.emplace_back(x, y);
    }
  }
  const double gap = ctmc::spectral_gap(q);
  const double t_max = ctx.params().number("t_max", 40.0 / gap);
  const double interval = ctx.params().number("interval", 1.0);
  ExperimentReport rep("theorem2");
  auto inputs = analysis::describe(q, f, ctx.cfg.c_set.value_or(FiniteSet(n, {})));
  inputs["V"] = analysis::numbers(v);
  inputs["t_max"] = t_max;
  inputs["interval"] = interval;
  rep.set_inputs(inputs);
  ctmc::ConvergenceIntegrals ci;
  try {
    ci = ctmc::theorem2_bound(q, f, v, t_max, pairs);
  } catch (const NumericalError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string(e.what()).find("T_max") != std::string::npos ? "params.t_max" : "params.pairs",
                      e.what());
  }
  const auto sums = ctmc::skeleton_sums(q, f, interval, v, pairs);
  rep.constant("B_f", ci.pair_constant);
  rep.constant("B_f0", ci.state_constant);
  rep.constant("M_f", sums.pair_constant);
  rep.constant("M_f0", sums.state_constant);
  rep.constant("spectral_gap", gap);
  rep.provenance("skeleton_terms", sums.terms);
  rep.check_true("constants_finite", std::isfinite(ci.pair_constant) && std::isfinite(ci.state_constant));
  double slack = INFINITY;
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& a = ci.pairs[i];
    const auto& s = sums.pairs[i];
    slack = std::min(slack, s.sum - a.integral + a.error);
    rows.push_back({std::to_string(a.x), std::to_string(a.y), format_number(a.integral), format_number(a.error),
                    format_number(a.ratio), format_number(s.sum), format_number(s.ratio)});
  }
  for (std::size_t x = 0; x < n; ++x) {
    const auto& a = ci.states[x];
    const auto& s = sums.states[x];
    slack = std::min(slack, s.sum - a.integral + a.error);
    rows.push_back({std::to_string(x), "pi", format_number(a.integral), format_number(a.error),
                    format_number(a.ratio), format_number(s.sum), format_number(s.ratio)});
  }
  rep.check("discrete_sum_minus_integral", slack, Relation::GreaterEqual, 0.0);
  ctx.out.csv("theorem2", {"x", "y", "integral", "error", "ratio", "skeleton_sum", "skeleton_ratio"}, rows);
  return {rep};
}

std::vector<ExperimentReport> equivalence(Context& ctx) {
  const auto& q = chain(ctx);
  const auto& c = set_c(ctx);
  std::vector<ExperimentReport> out{analysis::equivalence_suite(q, *ctx.cfg.f_table, c)};
  const auto j = out.front().to_json()["constants"];
  const auto pi = column(j, "pi");
  const auto g1 = column(j, "G_C_r1");
  const auto v = column(j, "V");
  std::vector<std::vector<std::string>> rows;
  for (std::size_t x = 0; x < q.size(); ++x) rows.push_back({std::to_string(x), pi[x], g1[x], v[x]});
  ctx.out.csv("equivalence", {"state", "pi", "G_C_r1", "V"}, rows);
  if (!ctx.cfg.b_sets.empty()) {
    analysis::RegularityOptions opts;
    opts.r0 = ctx.params().number("r0", opts.r0);
    opts.interval = ctx.params().number("interval", opts.interval);
    out.push_back(analysis::regularity_transfer_check(q, *ctx.cfg.f_table, c, ctx.cfg.b_sets,
                                                      ctx.params().number("r", 1.0), opts));
  }
  return out;
}

std::vector<ExperimentReport> diffusion_cmd(Context& ctx) {
  if (ctx.cfg.kind != ModelConfig::Kind::Diffusion) {
    throw ConfigError("model.kind", "diffusion requires a diffusion model");
  }
  const auto& model = *ctx.cfg.diffusion;
  const auto d = model.state_dimension();
  if (!ctx.cfg.v_field) throw ConfigError("V", "missing required field");
  const diffusion::FieldCertificate cert{*ctx.cfg.v_field, *ctx.cfg.f_field, region_c(ctx), required_b(ctx),
                                         ctx.cfg.delta};
  analysis::DiffusionSuiteOptions opts;
  const auto& p = ctx.params();
  opts.grid = grid_param(ctx, d);
  opts.tolerance = p.number("tolerance", opts.tolerance);
  opts.mc = mc_options(ctx);
  opts.starts = starts(ctx, d);
  opts.ergodic_start = p.numbers("ergodic_start").value_or(Point(d, 0.0));
  if (opts.ergodic_start.size() != d) throw ConfigError("params.ergodic_start", "wrong dimension");
  opts.horizon = p.number("horizon", opts.horizon);
  opts.burn_in = p.number("burn_in", opts.burn_in);
  opts.n_batches = p.count("n_batches", opts.n_batches);
  opts.reference = p.number("reference");
  opts.beta = p.number("beta", opts.beta);
  opts.domination_times = p.time_grid("domination_times").value_or(std::vector<double>{});
  auto rep = analysis::diffusion_suite(model, cert, opts);
  if (!opts.domination_times.empty()) {
    const auto values = column(rep.to_json()["constants"], "semigroup_f");
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < values.size(); ++i) rows.push_back({format_number(opts.domination_times[i]), values[i]});
    ctx.out.csv("semigroup_f", {"t", "mean_f"}, rows);
  }
  return {rep};
}

const std::map<std::string, std::pair<Handler, std::string>>& handlers() {
  static const std::map<std::string, std::pair<Handler, std::string>> table{
      {"drift-check", {drift_check, "check a drift certificate (V, f, C, b)"}},
      {"resolvent-verify", {resolvent_verify, "resolvent equation and generator identities"}},
      {"hitting", {hitting, "hitting integrals G_C(x, f; r)"}},
      {"lyapunov", {lyapunov, "converse Lyapunov function for (f, C)"}},
      {"skeleton", {skeleton, "skeleton Lyapunov function and minorization constants"}},
      {"norm-check", {norm_check, "weighted norm of a measure against its time average"}},
      {"decay", {decay, "f-norm and total-variation distance to pi over time"}},
      {"theorem2", {theorem2, "convergence integrals and skeleton sums"}},
      {"equivalence", {equivalence, "regularity, drift and ergodicity cross-checks"}},
      {"diffusion", {diffusion_cmd, "drift, Lyapunov and ergodic checks for a diffusion"}},
  };
  return table;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"ergokit: stability diagnostics for Markov processes"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  for (const auto& [name, entry] : handlers()) {
    auto* sub = app.add_subcommand(name, entry.second);
    sub->add_option("--config", config_path, "JSON model configuration")->required();
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--seed", seed, "override params.seed");
    sub->add_flag("--quiet", quiet, "suppress console output");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }
  const std::string subcommand = app.get_subcommands().front()->get_name();

  std::optional<ModelConfig> cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error at " << e.what() << "\n";
    return kExitConfigError;
  }

  std::optional<Output> out;
  try {
    out.emplace(out_dir, cfg->digest, quiet);
  } catch (const std::exception& e) {
    std::cerr << "cannot create output directory: " << e.what() << "\n";
    return kExitConfigError;
  }
  Context ctx{*cfg, *out, seed, subcommand};
  const auto& handler = handlers().at(subcommand).first;
  try {
    const auto reports = handler(ctx);
    bool passed = true;
    for (const auto& r : reports) {
      out->report(subcommand, r, ctx.seed(), r.passed() ? "ok" : "checks_failed");
      passed = passed && r.passed();
    }
    return passed ? kExitOk : kExitCheckFailed;
  } catch (const ConfigError& e) {
    std::cerr << "config error at " << e.what() << "\n";
    return kExitConfigError;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    ExperimentReport partial(subcommand);
    try {
      out->report(subcommand, partial, ctx.seed(), "numerical_failure", e.what());
    } catch (const std::exception& w) {
      std::cerr << "could not write partial report: " << w.what() << "\n";
    }
    return kExitNumericalError;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace ergokit::cli
