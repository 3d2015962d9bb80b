#include "ergokit/report.hpp"

#include <cmath>
#include <stdexcept>

#include <openssl/evp.h>

#include "ergokit/errors.hpp"

namespace ergokit::analysis {

std::string_view relation_symbol(Relation r) {
  switch (r) {
    case Relation::LessEqual: return "<=";
    case Relation::GreaterEqual: return ">=";
    case Relation::Less: return "<";
    case Relation::Greater: return ">";
  }
  return "?";
}

bool holds(double value, Relation r, double threshold) {
  switch (r) {
    case Relation::LessEqual: return value <= threshold;
    case Relation::GreaterEqual: return value >= threshold;
    case Relation::Less: return value < threshold;
    case Relation::Greater: return value > threshold;
  }
  return false;
}

nlohmann::json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

nlohmann::json numbers(std::span<const double> v) {
  auto out = nlohmann::json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

void ExperimentReport::set_inputs(const nlohmann::json& inputs) {
  inputs_digest_ = sha256_hex(inputs.dump());
  provenance_["inputs"] = inputs;
}

const Check& ExperimentReport::check(std::string name, double value, Relation relation,
                                     double threshold) {
  Check c{name, value, relation, threshold, holds(value, relation, threshold)};
  auto& slot = checks_[name];
  slot = std::move(c);
  return slot;
}

const Check& ExperimentReport::check_true(std::string name, bool condition) {
  return check(std::move(name), condition ? 1.0 : 0.0, Relation::GreaterEqual, 1.0);
}

void ExperimentReport::constant(const std::string& name, double value) { constants_[name] = number(value); }

void ExperimentReport::constant(const std::string& name, std::span<const double> values) {
  constants_[name] = numbers(values);
}

void ExperimentReport::constant_json(const std::string& name, nlohmann::json value) {
  constants_[name] = std::move(value);
}

void ExperimentReport::provenance(const std::string& name, nlohmann::json value) {
  provenance_[name] = std::move(value);
}

std::vector<Check> ExperimentReport::checks() const {
  std::vector<Check> out;
  for (const auto& [_, c] : checks_) out.push_back(c);
  return out;
}

const Check* ExperimentReport::find(std::string_view name) const {
  const auto it = checks_.find(std::string(name));
  return it == checks_.end() ? nullptr : &it->second;
}

bool ExperimentReport::passed() const { return failures() == 0; }

std::size_t ExperimentReport::failures() const {
  std::size_t n = 0;
  for (const auto& [_, c] : checks_) n += c.passed ? 0 : 1;
  return n;
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json j;
  j["experiment"] = name_;
  j["inputs_digest"] = inputs_digest_;
  j["passed"] = passed();
  auto checks = nlohmann::json::array();
  for (const auto& [_, c] : checks_) {
    checks.push_back({{"name", c.name},
                      {"value", number(c.value)},
                      {"relation", relation_symbol(c.relation)},
                      {"threshold", number(c.threshold)},
                      {"passed", c.passed}});
  }
  j["checks"] = std::move(checks);
  j["constants"] = constants_;
  j["provenance"] = provenance_;
  return j;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

}  // namespace ergokit::analysis
