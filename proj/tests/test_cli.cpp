#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>
#include <unistd.h>

#include "ergokit/cli.hpp"
#include "ergokit/config.hpp"

namespace fs = std::filesystem;
using namespace ergokit;
using namespace ergokit::cli;

namespace {

const fs::path kConfigs = ERGOKIT_CONFIG_DIR;

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("ergokit_cli_" + std::to_string(::getpid()) + "_" +
                                                std::to_string(counter()++))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run(const std::string& sub, const fs::path& config, const fs::path& out,
        std::vector<std::string> extra = {}) {
  std::vector<std::string> args{"ergokit", sub, "--config", config.string(), "--out", out.string(), "--quiet"};
  args.insert(args.end(), extra.begin(), extra.end());
  return cli::run(args);
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("decay on the two-state chain follows (2/3) exp(-3t)") {
  TempDir out;
  REQUIRE(run("decay", kConfigs / "two_state.json", out.path) == cli::kExitOk);
  const auto rows = csv_rows(out.path / "decay.csv");
  REQUIRE(rows.size() == 14);
  CHECK(rows[0] == std::vector<std::string>{"t", "f_norm", "tv"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double t = std::stod(rows[i][0]);
    CHECK(std::stod(rows[i][2]) == doctest::Approx(2.0 / 3.0 * std::exp(-3.0 * t)).epsilon(1e-10));
  }
  const auto header = slurp(out.path / "decay.csv").substr(0, 16);
  CHECK(header == "# config_digest=");
  const auto report = nlohmann::json::parse(slurp(out.path / "decay.json"));
  CHECK(report["status"] == "ok");
  CHECK(report["subcommand"] == "decay");
  CHECK(report["config_digest"] == load_config((kConfigs / "two_state.json").string()).digest);
}

TEST_CASE("drift check on OU passes") {
  TempDir out;
  CHECK(run("drift-check", kConfigs / "ou.json", out.path) == cli::kExitOk);
  CHECK(csv_rows(out.path / "drift_margins.csv").size() == 2002);
}

TEST_CASE("a failing certificate exits with the check-failure code") {
  TempDir out;
  const auto cfg = out.path / "weak.json";
  std::ofstream(cfg) << R"({"model": {"kind": "ctmc", "rates": [[-1, 1], [2, -2]]},
                           "f": [1, 1], "C": [0], "V": [1.5, 2], "b": 1})";
  CHECK(run("drift-check", cfg, out.path / "o") == cli::kExitCheckFailed);
  const auto report = nlohmann::json::parse(slurp(out.path / "o" / "drift_check.json"));
  CHECK(report["status"] == "checks_failed");
  CHECK(report["passed"] == false);
}

TEST_CASE("malformed configs exit with a field path") {
  TempDir out;
  const auto cfg = out.path / "bad.json";
  std::ofstream(cfg) << R"({"model": {"kind": "ctmc", "rates": [[-1, 1], [2, "x"]]}, "f": [1, 1]})";
  std::ostringstream captured;
  auto* old = std::cerr.rdbuf(captured.rdbuf());
  const int code = run("decay", cfg, out.path / "o");
  std::cerr.rdbuf(old);
  CHECK(code == cli::kExitConfigError);
  CHECK(captured.str().find("model.rates[1][1]") != std::string::npos);

  CHECK_THROWS_AS(parse_config(R"({"model": {"kind": "ctmc", "rates": [[-1, 1], [2, -2]]}, "f": [1]})"),
                  ConfigError);
  try {
    parse_config(R"({"model": {"kind": "diffusion", "builtin": "ou"}, "f": "x1 +* 2"})");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).rfind("f", 0) == 0);
  }
  CHECK(run("decay", out.path / "missing.json", out.path / "o") == cli::kExitConfigError);
}

TEST_CASE("ctmc subcommands reject diffusion models") {
  TempDir out;
  CHECK(run("decay", kConfigs / "ou.json", out.path) == cli::kExitConfigError);
}

TEST_CASE("every ctmc subcommand succeeds on the three-state chain") {
  TempDir out;
  for (const char* sub : {"resolvent-verify", "lyapunov", "skeleton", "norm-check", "decay", "theorem2",
                          "equivalence"}) {
    CAPTURE(sub);
    CHECK(run(sub, kConfigs / "three_state.json", out.path, {"--seed", "5"}) == cli::kExitOk);
  }
  CHECK(fs::exists(out.path / "regularity_transfer.json"));
}

TEST_CASE("identical config and seed give byte-identical outputs") {
  TempDir a, b;
  for (const auto* d : {&a, &b}) {
    REQUIRE(run("hitting", kConfigs / "three_state.json", d->path, {"--seed", "9"}) == cli::kExitOk);
    REQUIRE(run("drift-check", kConfigs / "ou.json", d->path) == cli::kExitOk);
  }
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a.path)) {
    ++files;
    CHECK(slurp(e.path()) == slurp(b.path / e.path().filename()));
  }
  CHECK(files == 4);
}
