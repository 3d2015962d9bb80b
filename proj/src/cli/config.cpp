#include "ergokit/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "ergokit/expr.hpp"
#include "ergokit/report.hpp"

namespace ergokit::cli {

namespace {

using nlohmann::json;

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }
std::string dot(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

double as_number(const json& j, const std::string& path, bool allow_inf = false) {
  if (allow_inf && j.is_string() && j.get<std::string>() == "inf") {
    return std::numeric_limits<double>::infinity();
  }
  if (!j.is_number()) throw ConfigError(path, allow_inf ? "expected a number or \"inf\"" : "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
  return v;
}

std::size_t as_index(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ConfigError(path, "expected a nonnegative integer");
  }
  return j.get<std::size_t>();
}

const json& array_at(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array");
  return j;
}

std::vector<double> as_numbers(const json& j, const std::string& path, bool allow_inf = false) {
  std::vector<double> out;
  const auto& a = array_at(j, path);
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(as_number(a[i], at(path, i), allow_inf));
  return out;
}

std::vector<std::string> as_strings(const json& j, const std::string& path) {
  std::vector<std::string> out;
  const auto& a = array_at(j, path);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_string()) throw ConfigError(at(path, i), "expected a string");
    out.push_back(a[i].get<std::string>());
  }
  return out;
}

const json& member(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) throw ConfigError(dot(path, key), "missing required field");
  return obj.at(key);
}

ScalarField as_field(const json& j, const std::string& path, std::size_t d) {
  if (j.is_number()) return ScalarField::constant(d, as_number(j, path));
  if (!j.is_string()) throw ConfigError(path, "expected an expression string");
  try {
    return ScalarField::from_source(j.get<std::string>(), d);
  } catch (const dsl::ParseError& e) {
    throw ConfigError(path, std::string(e.what()) + " (offset " + std::to_string(e.offset()) + ")");
  }
}

FiniteSet as_index_set(const json& j, const std::string& path, std::size_t n) {
  std::vector<std::size_t> m;
  const auto& a = array_at(j, path);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto v = as_index(a[i], at(path, i));
    if (v >= n) throw ConfigError(at(path, i), "state index " + std::to_string(v) + " out of range");
    m.push_back(v);
  }
  if (m.empty()) throw ConfigError(path, "set must be nonempty");
  return FiniteSet(n, std::move(m));
}

Point as_point(const json& j, const std::string& path, std::size_t d) {
  auto p = as_numbers(j, path);
  if (p.size() != d) throw ConfigError(path, "expected " + std::to_string(d) + " coordinates");
  return p;
}

Region as_region(const json& j, const std::string& path, std::size_t d) {
  if (!j.is_object() || j.size() != 1) {
    throw ConfigError(path, "expected exactly one of \"box\", \"ball\", \"sublevel\", \"whole\"");
  }
  const std::string kind = j.begin().key();
  const json& spec = j.begin().value();
  const auto sub = dot(path, kind);
  try {
    if (kind == "whole") return Region::whole(d);
    if (kind == "box") {
      return Region::box(as_point(member(spec, "lower", sub), dot(sub, "lower"), d),
                         as_point(member(spec, "upper", sub), dot(sub, "upper"), d));
    }
    if (kind == "ball") {
      return Region::ball(as_point(member(spec, "center", sub), dot(sub, "center"), d),
                          as_number(member(spec, "radius", sub), dot(sub, "radius")));
    }
    if (kind == "sublevel") {
      return Region::sublevel(as_field(member(spec, "g", sub), dot(sub, "g"), d),
                              as_number(member(spec, "level", sub), dot(sub, "level")),
                              as_point(member(spec, "lower", sub), dot(sub, "lower"), d),
                              as_point(member(spec, "upper", sub), dot(sub, "upper"), d));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(sub, e.what());
  }
  throw ConfigError(path, "unknown set kind \"" + kind + "\"");
}

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(dot(path, key), "unknown field");
  }
}

void parse_chain(const json& model, ModelConfig& cfg) {
  check_keys(model, "model", {"kind", "rates", "labels"});
  const auto& rates = array_at(member(model, "rates", "model"), "model.rates");
  const auto n = rates.size();
  if (n == 0) throw ConfigError("model.rates", "rate matrix needs at least one row");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < n; ++i) {
    rows.push_back(as_numbers(rates[i], at("model.rates", i)));
    if (rows.back().size() != n) {
      throw ConfigError(at("model.rates", i), "row has " + std::to_string(rows.back().size()) +
                                                  " entries, expected " + std::to_string(n));
    }
  }
  std::vector<std::string> labels;
  if (model.contains("labels")) {
    labels = as_strings(model["labels"], "model.labels");
    if (labels.size() != n) throw ConfigError("model.labels", "expected one label per state");
  }
  try {
    cfg.chain = ctmc::RateMatrix::from_rows(rows, labels);
  } catch (const InvalidArgument& e) {
    throw ConfigError(model.contains("labels") && std::string(e.what()).find("label") != std::string::npos
                          ? "model.labels"
                          : "model.rates",
                      e.what());
  }
}

void parse_diffusion(const json& model, ModelConfig& cfg) {
  check_keys(model, "model", {"kind", "builtin", "d", "k", "drift", "dispersion"});
  const bool builtin = model.contains("builtin");
  const bool explicit_model = model.contains("drift") || model.contains("dispersion");
  if (builtin == explicit_model) {
    throw ConfigError("model", "give exactly one of \"builtin\" or \"drift\"/\"dispersion\"");
  }
  if (builtin) {
    if (!model["builtin"].is_string()) throw ConfigError("model.builtin", "expected a string");
    try {
      cfg.diffusion = diffusion::DiffusionModel::builtin(model["builtin"].get<std::string>());
    } catch (const InvalidArgument& e) {
      throw ConfigError("model.builtin", e.what());
    }
    return;
  }
  const auto d = as_index(member(model, "d", "model"), "model.d");
  const auto k = as_index(member(model, "k", "model"), "model.k");
  if (d == 0 || k == 0) throw ConfigError(d == 0 ? "model.d" : "model.k", "dimension must be positive");
  const auto drift = as_strings(member(model, "drift", "model"), "model.drift");
  if (drift.size() != d) throw ConfigError("model.drift", "expected " + std::to_string(d) + " expressions");
  const auto& disp = array_at(member(model, "dispersion", "model"), "model.dispersion");
  if (disp.size() != d) throw ConfigError("model.dispersion", "expected " + std::to_string(d) + " rows");
  std::vector<std::vector<std::string>> m;
  for (std::size_t i = 0; i < d; ++i) {
    m.push_back(as_strings(disp[i], at("model.dispersion", i)));
    if (m.back().size() != k) {
      throw ConfigError(at("model.dispersion", i), "expected " + std::to_string(k) + " entries");
    }
  }
  // Parse one expression at a time so the error names the field.
  for (std::size_t i = 0; i < d; ++i) as_field(drift[i], at("model.drift", i), d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < k; ++j) as_field(m[i][j], at(at("model.dispersion", i), j), d);
  }
  cfg.diffusion = diffusion::DiffusionModel::from_expressions(d, k, drift, m);
}

}  // namespace

double Params::number(const std::string& key, double fallback) const {
  return number(key).value_or(fallback);
}

std::optional<double> Params::number(const std::string& key) const {
  if (!j_.contains(key)) return std::nullopt;
  return as_number(j_[key], "params." + key);
}

std::size_t Params::count(const std::string& key, std::size_t fallback) const {
  if (!j_.contains(key)) return fallback;
  return as_index(j_[key], "params." + key);
}

std::uint64_t Params::seed(std::uint64_t fallback) const {
  if (!j_.contains("seed")) return fallback;
  if (!j_["seed"].is_number_unsigned()) throw ConfigError("params.seed", "expected a nonnegative integer");
  return j_["seed"].get<std::uint64_t>();
}

bool Params::flag(const std::string& key, bool fallback) const {
  if (!j_.contains(key)) return fallback;
  if (!j_[key].is_boolean()) throw ConfigError("params." + key, "expected true or false");
  return j_[key].get<bool>();
}

std::optional<std::vector<double>> Params::numbers(const std::string& key) const {
  if (!j_.contains(key)) return std::nullopt;
  return as_numbers(j_[key], "params." + key);
}

std::optional<std::vector<Point>> Params::points(const std::string& key) const {
  if (!j_.contains(key)) return std::nullopt;
  const auto path = "params." + key;
  std::vector<Point> out;
  const auto& a = array_at(j_[key], path);
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(as_numbers(a[i], at(path, i)));
  return out;
}

std::optional<std::vector<double>> Params::time_grid(const std::string& key) const {
  if (!j_.contains(key)) return std::nullopt;
  const auto path = "params." + key;
  const auto& g = j_[key];
  std::vector<double> out;
  if (g.is_array()) {
    out = as_numbers(g, path);
  } else if (g.is_object()) {
    check_keys(g, path, {"start", "stop", "step"});
    const double start = as_number(member(g, "start", path), dot(path, "start"));
    const double stop = as_number(member(g, "stop", path), dot(path, "stop"));
    const double step = as_number(member(g, "step", path), dot(path, "step"));
    if (!(step > 0.0)) throw ConfigError(dot(path, "step"), "step must be positive");
    if (stop < start) throw ConfigError(dot(path, "stop"), "stop must not precede start");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
  } else {
    throw ConfigError(path, "expected a list of times or {start, stop, step}");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 0.0) throw ConfigError(at(path, i), "times must be nonnegative");
  }
  return out;
}

std::optional<std::vector<std::pair<std::size_t, std::size_t>>> Params::pairs(const std::string& key) const {
  if (!j_.contains(key)) return std::nullopt;
  const auto path = "params." + key;
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const auto& a = array_at(j_[key], path);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& p = array_at(a[i], at(path, i));
    if (p.size() != 2) throw ConfigError(at(path, i), "expected a pair [x, y]");
    out.emplace_back(as_index(p[0], at(at(path, i), 0)), as_index(p[1], at(at(path, i), 1)));
  }
  return out;
}

ModelConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  check_keys(root, "", {"model", "f", "V", "C", "B", "b", "delta", "params"});
  ModelConfig cfg;
  cfg.digest = analysis::sha256_hex(text);

  const auto& model = member(root, "model", "");
  if (!model.is_object()) throw ConfigError("model", "expected an object");
  const auto& kind = member(model, "kind", "model");
  if (kind == "ctmc") {
    cfg.kind = ModelConfig::Kind::Ctmc;
    parse_chain(model, cfg);
  } else if (kind == "diffusion") {
    cfg.kind = ModelConfig::Kind::Diffusion;
    parse_diffusion(model, cfg);
  } else {
    throw ConfigError("model.kind", "expected \"ctmc\" or \"diffusion\"");
  }

  if (cfg.kind == ModelConfig::Kind::Ctmc) {
    const auto n = cfg.chain->size();
    if (root.contains("f")) {
      auto f = as_numbers(root["f"], "f");
      if (f.size() != n) throw ConfigError("f", "expected " + std::to_string(n) + " entries");
      for (std::size_t i = 0; i < n; ++i) {
        if (f[i] < 1.0) throw ConfigError(at("f", i), "weights must be >= 1");
      }
      cfg.f_table = WeightTable(std::move(f));
    } else {
      cfg.f_table = WeightTable::ones(n);
    }
    if (root.contains("V")) {
      cfg.v_table = as_numbers(root["V"], "V", true);
      if (cfg.v_table->size() != n) throw ConfigError("V", "expected " + std::to_string(n) + " entries");
    }
    if (root.contains("C")) cfg.c_set = as_index_set(root["C"], "C", n);
    if (root.contains("B")) {
      const auto& bs = array_at(root["B"], "B");
      for (std::size_t i = 0; i < bs.size(); ++i) cfg.b_sets.push_back(as_index_set(bs[i], at("B", i), n));
    }
  } else {
    const auto d = cfg.diffusion->state_dimension();
    cfg.f_field = root.contains("f") ? as_field(root["f"], "f", d) : ScalarField::constant(d, 1.0);
    if (root.contains("V")) cfg.v_field = as_field(root["V"], "V", d);
    if (root.contains("C")) cfg.c_region = as_region(root["C"], "C", d);
    if (root.contains("B")) throw ConfigError("B", "target lists apply to ctmc models only");
  }
  if (root.contains("b")) cfg.b = as_number(root["b"], "b");
  if (root.contains("delta")) {
    cfg.delta = as_number(root["delta"], "delta");
    if (!(cfg.delta > 0.0)) throw ConfigError("delta", "must be positive");
  }
  if (root.contains("params")) {
    if (!root["params"].is_object()) throw ConfigError("params", "expected an object");
    cfg.params = Params(root["params"]);
  }
  return cfg;
}

ModelConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<file>", "cannot read config file '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return parse_config(s.str());
}

}  // namespace ergokit::cli
