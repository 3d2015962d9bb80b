#pragma once

// Structured experiment records. Each check stores its value, threshold and
// relation, so the verdict can be recomputed from the record alone.

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ergokit::analysis {

enum class Relation { LessEqual, GreaterEqual, Less, Greater };

std::string_view relation_symbol(Relation r);
bool holds(double value, Relation r, double threshold);

struct Check {
  std::string name;
  double value = 0.0;
  Relation relation = Relation::LessEqual;
  double threshold = 0.0;
  bool passed = false;
};

class ExperimentReport {
public:
  explicit ExperimentReport(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  const std::string& inputs_digest() const { return inputs_digest_; }
  void set_inputs(const nlohmann::json& inputs);
  void set_inputs_digest(std::string digest) { inputs_digest_ = std::move(digest); }

  const Check& check(std::string name, double value, Relation relation, double threshold);
  // 1 when `condition` holds, else 0, compared against 1.
  const Check& check_true(std::string name, bool condition);

  void constant(const std::string& name, double value);
  void constant(const std::string& name, std::span<const double> values);
  void constant_json(const std::string& name, nlohmann::json value);
  void provenance(const std::string& name, nlohmann::json value);

  // Sorted by name.
  std::vector<Check> checks() const;
  const Check* find(std::string_view name) const;
  bool passed() const;
  std::size_t failures() const;

  nlohmann::json to_json() const;

private:
  std::string name_;
  std::string inputs_digest_;
  std::map<std::string, Check> checks_;
  std::map<std::string, nlohmann::json> constants_;
  std::map<std::string, nlohmann::json> provenance_;
};

// JSON cannot hold inf or nan; those become the strings "inf", "-inf", "nan".
nlohmann::json number(double v);
nlohmann::json numbers(std::span<const double> v);

std::string sha256_hex(std::string_view bytes);

}  // namespace ergokit::analysis
