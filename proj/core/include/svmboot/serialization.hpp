#pragma once

#include <json.hpp>
#include <set>
#include <string>

#include "svmboot/bootstrap.hpp"
#include "svmboot/harness.hpp"
#include "svmboot/influence.hpp"
#include "svmboot/kernel.hpp"
#include "svmboot/loss.hpp"
#include "svmboot/solver.hpp"

namespace svmboot {

using json = nlohmann::json;

/// Reads keys from a JSON object and rejects any key that was never read.
/// Missing required keys and wrong types raise ConfigError naming the key
/// path (e.g. "kernel.gamma").
class ObjectReader {
 public:
  ObjectReader(const json& object, std::string path);

  bool has(const std::string& key) const;
  const json& required(const std::string& key);
  const json* optional(const std::string& key);

  double number(const std::string& key);
  double number_or(const std::string& key, double fallback);
  int integer(const std::string& key);
  int integer_or(const std::string& key, int fallback);
  bool boolean_or(const std::string& key, bool fallback);
  std::string string(const std::string& key);

  std::string key_path(const std::string& key) const;
  /// Throws ConfigError if any key was not consumed.
  void finish() const;

 private:
  const json& object_;
  std::string path_;
  std::set<std::string> consumed_;
};

json to_json_value(const KernelSpec& spec);
KernelSpec kernel_from_json(const json& j, const std::string& path = "kernel");

json to_json_value(const SmoothLoss& loss);
SmoothLoss loss_from_json(const json& j, const std::string& path = "loss");

json to_json_value(const GeneratorSpec& spec);
GeneratorSpec generator_from_json(const json& j, const std::string& path = "generator");

json points_to_json(const Points& points);
Points points_from_json(const json& j, const std::string& path);

json to_json_value(const SvmFit& fit);
SvmFit fit_from_json(const json& j);

json to_json_value(const AsymptoticLaw& law);
AsymptoticLaw asymptotic_law_from_json(const json& j);

/// Sidecar for a bootstrap ensemble (seeds, failures, base fit).
json ensemble_sidecar(const BootstrapEnsemble& ensemble);

json to_json_value(const ConsistencyReport& report);
json to_json_value(const CoverageReport& report);

/// Flat (n, grid_point, metric, value) rows.
std::string consistency_csv(const ConsistencyReport& report);
std::string coverage_csv(const CoverageReport& report);

}  // namespace svmboot
