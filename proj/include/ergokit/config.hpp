#pragma once

// JSON model configuration. Every validation error names the offending field
// by its path, e.g. "model.rates[1][0]".

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergokit/ctmc.hpp"
#include "ergokit/diffusion.hpp"

namespace ergokit::cli {

class ConfigError : public InvalidArgument {
public:
  ConfigError(std::string path, const std::string& message)
      : InvalidArgument(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

private:
  std::string path_;
};

// Typed access to the "params" object with path-qualified errors.
class Params {
public:
  Params() = default;
  explicit Params(nlohmann::json j) : j_(std::move(j)) {}

  bool has(const std::string& key) const { return j_.contains(key); }
  double number(const std::string& key, double fallback) const;
  std::optional<double> number(const std::string& key) const;
  std::size_t count(const std::string& key, std::size_t fallback) const;
  std::uint64_t seed(std::uint64_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::optional<std::vector<double>> numbers(const std::string& key) const;
  std::optional<std::vector<Point>> points(const std::string& key) const;
  // A list of times or {"start", "stop", "step"}.
  std::optional<std::vector<double>> time_grid(const std::string& key) const;
  std::optional<std::vector<std::pair<std::size_t, std::size_t>>> pairs(const std::string& key) const;
  const nlohmann::json& raw() const { return j_; }

private:
  nlohmann::json j_ = nlohmann::json::object();
};

struct ModelConfig {
  enum class Kind { Ctmc, Diffusion };
  Kind kind = Kind::Ctmc;

  std::optional<ctmc::RateMatrix> chain;
  std::optional<WeightTable> f_table;
  std::optional<ctmc::Table> v_table;
  std::optional<FiniteSet> c_set;
  std::vector<FiniteSet> b_sets;

  std::optional<diffusion::DiffusionModel> diffusion;
  std::optional<ScalarField> f_field;
  std::optional<ScalarField> v_field;
  std::optional<Region> c_region;

  std::optional<double> b;
  double delta = 1.0;
  Params params;

  std::string digest;  // SHA-256 of the raw config bytes
};

ModelConfig parse_config(const std::string& text);
ModelConfig load_config(const std::string& path);

}  // namespace ergokit::cli
