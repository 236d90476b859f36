#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kConfigs = SVMBOOT_CONFIG_DIR;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = svmboot::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("svmboot_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const json& config) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << config.dump();
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// The error JSON is the last line written to stderr.
json error_of(const Result& r) {
  const auto end = r.err.find_last_not_of('\n');
  const auto start = r.err.rfind('\n', end);
  return json::parse(r.err.substr(start == std::string::npos ? 0 : start + 1, end + 1))["error"];
}

std::size_t entries(const fs::path& dir) {
  if (!fs::exists(dir)) return 0;
  return static_cast<std::size_t>(std::distance(fs::directory_iterator(dir), fs::directory_iterator()));
}

}  // namespace

TEST_CASE("help lists every command and flag") {
  const auto r = run({"--help"});
  CHECK(r.code == 0);
  for (const char* word : {"fit", "bootstrap", "influence", "mc-law", "consistency", "coverage", "--config", "--seed",
                           "--jobs", "--out"}) {
    CHECK_MESSAGE(r.out.find(word) != std::string::npos, word);
  }
}

TEST_CASE("unknown command and missing arguments are config errors") {
  auto r = run({"frobnicate"});
  CHECK(r.code == 2);
  CHECK(error_of(r)["key"] == "command");
  CHECK(run({}).code == 2);
  CHECK(run({"fit"}).code == 2);
}

TEST_CASE("hinge loss is rejected naming the key") {
  const auto dir = scratch("hinge");
  const auto cfg = write_config(dir, {{"loss", {{"family", "hinge"}}}, {"n_ladder", {50}}});
  const auto r = run({"consistency", "--config", cfg.string(), "--seed", "1", "--out", (dir / "out").string()});
  CHECK(r.code == 2);
  const json e = error_of(r);
  CHECK(e["kind"] == "config");
  CHECK(e["key"] == "loss.family");
  CHECK(e["message"].get<std::string>().find("smoothed_hinge") != std::string::npos);
  CHECK(entries(dir / "out") == 0);
}

TEST_CASE("unknown and misplaced config keys are rejected") {
  const auto dir = scratch("keys");
  auto cfg = write_config(dir, {{"n_ladder", {50}}, {"bogus", 1}});
  auto r = run({"consistency", "--config", cfg.string(), "--seed", "1", "--out", (dir / "out").string()});
  CHECK(r.code == 2);
  CHECK(error_of(r)["key"] == "bogus");

  cfg = write_config(dir, {{"n", 50}, {"n_ladder", {50}}});
  r = run({"coverage", "--config", cfg.string(), "--seed", "1", "--out", (dir / "out").string()});
  CHECK(r.code == 2);
  CHECK(error_of(r)["key"] == "n_ladder");

  cfg = write_config(dir, {{"command", "coverage"}, {"n_ladder", {50}}});
  r = run({"consistency", "--config", cfg.string(), "--seed", "1", "--out", (dir / "out").string()});
  CHECK(r.code == 2);
  CHECK(error_of(r)["key"] == "command");

  cfg = write_config(dir, {{"kernel", {{"family", "gaussian_rbf"}, {"gamma", 1.0}, {"width", 1.0}}}, {"n_ladder", {50}}});
  r = run({"consistency", "--config", cfg.string(), "--seed", "1", "--out", (dir / "out").string()});
  CHECK(r.code == 2);
  CHECK(error_of(r)["key"] == "kernel.width");
  CHECK(entries(dir / "out") == 0);
}

TEST_CASE("invalid values are config errors") {
  const auto dir = scratch("values");
  const auto out = (dir / "out").string();
  auto cfg = write_config(dir, {{"n_ladder", json::array()}});
  CHECK(run({"consistency", "--config", cfg.string(), "--seed", "1", "--out", out}).code == 2);
  cfg = write_config(dir, {{"level", 1.0}});
  CHECK(run({"coverage", "--config", cfg.string(), "--seed", "1", "--out", out}).code == 2);
  cfg = write_config(dir, {{"kernel", {{"family", "gaussian_rbf"}, {"gamma", 1.0}}},
                           {"loss", {{"family", "logistic_regression"}}},
                           {"lambda", -1.0},
                           {"n", 10}});
  const auto r = run({"fit", "--config", cfg.string(), "--seed", "1", "--out", out});
  CHECK(r.code == 2);
  CHECK(error_of(r)["key"] == "lambda");
  CHECK(run({"fit", "--config", (dir / "missing.json").string(), "--out", out}).code == 4);
  CHECK(entries(dir / "out") == 0);
}

TEST_CASE("experiment commands require a seed") {
  const auto dir = scratch("seed");
  for (const char* command : {"bootstrap", "influence", "mc-law", "consistency", "coverage"}) {
    const auto r = run({command, "--config", (kConfigs / "consistency_small.json").string(), "--out",
                        (dir / "out").string()});
    CHECK(r.code == 2);
  }
  const auto r = run({"consistency", "--config", (kConfigs / "consistency_small.json").string(), "--out",
                      (dir / "out").string()});
  CHECK(error_of(r)["key"] == "--seed");
  CHECK(entries(dir / "out") == 0);
}

TEST_CASE("a failure after the output directory exists leaves no artifacts") {
  const auto dir = scratch("partial");
  std::ofstream(dir / "labels.csv") << "x0,y\n0.0,1\n1.0,0.5\n";
  const auto cfg = write_config(dir, {{"data", (dir / "labels.csv").string()},
                                      {"kernel", {{"family", "linear"}}},
                                      {"loss", {{"family", "logistic_classification"}}},
                                      {"lambda", 0.1}});
  const auto out = dir / "out";
  const auto r = run({"fit", "--config", cfg.string(), "--out", out.string()});
  CHECK(r.code == 2);
  CHECK(entries(out) == 0);
}

TEST_CASE("unwritable output is an io error") {
  const auto dir = scratch("io");
  std::ofstream(dir / "blocker") << "x";
  const auto r = run({"fit", "--config", (kConfigs / "fit_example.json").string(), "--out",
                      (dir / "blocker" / "out").string()});
  CHECK(r.code == 4);
  CHECK(error_of(r)["kind"] == "io");
}

TEST_CASE("fit example writes coefficients and predictions") {
  const auto dir = scratch("fit");
  const auto r = run({"fit", "--config", (kConfigs / "fit_example.json").string(), "--out", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("objective ") != std::string::npos);
  const json f = json::parse(slurp(dir / "fit.json"));
  CHECK(f["alpha"].size() == 30);
  CHECK(f["stationarity"].get<double>() <= 1e-7);
  const std::string predictions = slurp(dir / "predictions.csv");
  CHECK(std::count(predictions.begin(), predictions.end(), '\n') == 6);
  CHECK(fs::exists(dir / "timing.json"));
}

TEST_CASE("influence example writes the Gaussian law") {
  const auto dir = scratch("influence");
  const auto r = run({"influence", "--config", (kConfigs / "influence_example.json").string(), "--seed", "3",
                      "--out", dir.string()});
  REQUIRE(r.code == 0);
  const json law = json::parse(slurp(dir / "influence.json"));
  CHECK(law["kp_min_singular_value"].get<double>() >= 2.0 * 0.05 * (1.0 - 1e-6));
  for (const char* name : {"influence_values.csv", "gaussian_draws.csv", "timing.json"}) {
    CHECK_MESSAGE(fs::exists(dir / name), name);
  }
}

TEST_CASE("shipped consistency config produces the documented outputs") {
  const auto dir = scratch("schema");
  const auto r = run({"consistency", "--config", (kConfigs / "consistency_small.json").string(), "--seed", "7",
                      "--out", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("median_ks_boot_mc[n=50] ") != std::string::npos);

  const json report = json::parse(slurp(dir / "consistency.json"));
  CHECK(report["experiment"] == "consistency");
  CHECK(report["seed"] == 7);
  CHECK(report["monotone_median_ks"].is_boolean());
  CHECK(report["config"]["n_ladder"] == json::array({50}));
  REQUIRE(report["ladder"].size() == 1);
  const json& rung = report["ladder"][0];
  CHECK(rung["n"] == 50);
  for (const char* key : {"median_ks_boot_mc", "median_bl_boot_mc", "median_ks_gauss_mc", "median_ks_gauss_boot"}) {
    const double v = rung[key].get<double>();
    CHECK_MESSAGE((v >= 0.0 && v <= 1.0), key);
  }
  REQUIRE(rung["grid_points"].size() == 5);

  std::istringstream csv(slurp(dir / "consistency.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "n,grid_point,metric,value");
  int rows = 0;
  while (std::getline(csv, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 3);
    ++rows;
  }
  CHECK(rows > 0);
  CHECK(json::parse(slurp(dir / "timing.json")).is_object());
  CHECK(entries(dir) == 3);
}

TEST_CASE("reports do not depend on jobs") {
  const auto a = scratch("jobs1");
  const auto b = scratch("jobs3");
  const auto cfg = (kConfigs / "consistency_small.json").string();
  REQUIRE(run({"consistency", "--config", cfg, "--seed", "11", "--jobs", "1", "--out", a.string()}).code == 0);
  REQUIRE(run({"consistency", "--config", cfg, "--seed", "11", "--jobs", "3", "--out", b.string()}).code == 0);
  CHECK(slurp(a / "consistency.json") == slurp(b / "consistency.json"));
  CHECK(slurp(a / "consistency.csv") == slurp(b / "consistency.csv"));
}
