#include "svmboot/serialization.hpp"

#include <cmath>
#include <limits>

#include "svmboot/error.hpp"
#include "svmboot/io.hpp"

namespace svmboot {

ObjectReader::ObjectReader(const json& object, std::string path)
    : object_(object), path_(std::move(path)) {
  if (!object_.is_object()) {
    throw ConfigError("config", (path_.empty() ? std::string("config") : path_) +
                                    " must be a JSON object",
                      path_);
  }
}

std::string ObjectReader::key_path(const std::string& key) const {
  return path_.empty() ? key : path_ + "." + key;
}

bool ObjectReader::has(const std::string& key) const { return object_.contains(key); }

const json& ObjectReader::required(const std::string& key) {
  if (!object_.contains(key)) {
    throw ConfigError("config", "missing required key '" + key_path(key) + "'", key_path(key));
  }
  consumed_.insert(key);
  return object_.at(key);
}

const json* ObjectReader::optional(const std::string& key) {
  if (!object_.contains(key)) return nullptr;
  consumed_.insert(key);
  return &object_.at(key);
}

double ObjectReader::number(const std::string& key) {
  const json& v = required(key);
  if (!v.is_number()) throw ConfigError("config", "'" + key_path(key) + "' must be a number", key_path(key));
  return v.get<double>();
}

double ObjectReader::number_or(const std::string& key, double fallback) {
  return has(key) ? number(key) : fallback;
}

int ObjectReader::integer(const std::string& key) {
  const json& v = required(key);
  if (!v.is_number_integer()) {
    throw ConfigError("config", "'" + key_path(key) + "' must be an integer", key_path(key));
  }
  const auto value = v.get<long long>();
  if (value < std::numeric_limits<int>::min() || value > std::numeric_limits<int>::max()) {
    throw ConfigError("config", "'" + key_path(key) + "' is out of range", key_path(key));
  }
  return static_cast<int>(value);
}

int ObjectReader::integer_or(const std::string& key, int fallback) {
  return has(key) ? integer(key) : fallback;
}

bool ObjectReader::boolean_or(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  const json& v = required(key);
  if (!v.is_boolean()) throw ConfigError("config", "'" + key_path(key) + "' must be a boolean", key_path(key));
  return v.get<bool>();
}

std::string ObjectReader::string(const std::string& key) {
  const json& v = required(key);
  if (!v.is_string()) throw ConfigError("config", "'" + key_path(key) + "' must be a string", key_path(key));
  return v.get<std::string>();
}

void ObjectReader::finish() const {
  for (const auto& item : object_.items()) {
    if (!consumed_.count(item.key())) {
      throw ConfigError("config", "unknown config key '" + key_path(item.key()) + "'",
                        key_path(item.key()));
    }
  }
}

json to_json_value(const KernelSpec& spec) {
  json j{{"family", std::string(to_string(spec.family()))}};
  switch (spec.family()) {
    case KernelFamily::gaussian_rbf: j["gamma"] = spec.gamma(); break;
    case KernelFamily::polynomial:
      j["degree"] = spec.degree();
      j["offset"] = spec.offset();
      break;
    case KernelFamily::linear: break;
  }
  return j;
}

KernelSpec kernel_from_json(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  const KernelFamily family = [&] {
    try {
      return kernel_family_from_string(r.string("family"));
    } catch (const ConfigError& e) {
      throw ConfigError("config", e.what(), r.key_path("family"));
    }
  }();
  KernelSpec spec = KernelSpec::linear();
  switch (family) {
    case KernelFamily::gaussian_rbf: spec = KernelSpec::gaussian_rbf(r.number("gamma")); break;
    case KernelFamily::polynomial:
      spec = KernelSpec::polynomial(r.integer("degree"), r.number_or("offset", 0.0));
      break;
    case KernelFamily::linear: break;
  }
  r.finish();
  return spec;
}

json to_json_value(const SmoothLoss& loss) {
  json j{{"family", std::string(to_string(loss.family()))}};
  if (loss.family() == LossFamily::huber) j["delta"] = loss.parameter();
  if (loss.family() == LossFamily::smoothed_hinge) j["eps"] = loss.parameter();
  return j;
}

SmoothLoss loss_from_json(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  const LossFamily family = [&] {
    try {
      return loss_family_from_string(r.string("family"));
    } catch (const ConfigError& e) {
      throw ConfigError("config", e.what(), r.key_path("family"));
    }
  }();
  SmoothLoss loss = SmoothLoss::logistic_regression();
  switch (family) {
    case LossFamily::logistic_classification: loss = SmoothLoss::logistic_classification(); break;
    case LossFamily::logistic_regression: break;
    case LossFamily::huber: loss = SmoothLoss::huber(r.number("delta")); break;
    case LossFamily::smoothed_hinge: loss = SmoothLoss::smoothed_hinge(r.number("eps")); break;
  }
  r.finish();
  return loss;
}

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError("config", "'" + path + "' must be an array of numbers", path);
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError("config", "'" + path + "' must contain numbers", path);
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vector_to_json(m.row(r).transpose()));
  return rows;
}

// NaN has no JSON representation; store it as null.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json points_to_json(const Points& points) { return matrix_to_json(points); }

Points points_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError("config", "'" + path + "' must be an array of points", path);
  if (j.empty()) return Points(0, 0);
  const std::size_t d = j[0].is_array() ? j[0].size() : 0;
  Points out(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Eigen::VectorXd row = vector_from_json(j[r], path);
    if (static_cast<std::size_t>(row.size()) != d || d == 0) {
      throw ConfigError("config", "'" + path + "' rows must all have the same nonzero length", path);
    }
    out.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return out;
}

json to_json_value(const GeneratorSpec& spec) {
  json j{{"kind", std::string(to_string(spec.kind))}, {"dim", spec.dim}};
  if (spec.kind == GeneratorKind::regression_sine_noise) {
    j["x_min"] = spec.x_min;
    j["x_max"] = spec.x_max;
    j["amplitude"] = spec.amplitude;
    j["noise_sd"] = spec.noise_sd;
  } else {
    j["positive_weight"] = spec.positive_weight;
    j["mean_positive"] = vector_to_json(spec.mean_positive);
    j["mean_negative"] = vector_to_json(spec.mean_negative);
    j["spread"] = spec.spread;
  }
  return j;
}

GeneratorSpec generator_from_json(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  const GeneratorKind kind = [&] {
    try {
      return generator_kind_from_string(r.string("kind"));
    } catch (const ConfigError& e) {
      throw ConfigError("config", e.what(), r.key_path("kind"));
    }
  }();
  GeneratorSpec spec = kind == GeneratorKind::regression_sine_noise
                           ? GeneratorSpec::default_regression()
                           : GeneratorSpec::default_classification();
  spec.dim = r.integer_or("dim", spec.dim);
  if (kind == GeneratorKind::regression_sine_noise) {
    spec.x_min = r.number_or("x_min", spec.x_min);
    spec.x_max = r.number_or("x_max", spec.x_max);
    spec.amplitude = r.number_or("amplitude", spec.amplitude);
    spec.noise_sd = r.number_or("noise_sd", spec.noise_sd);
  } else {
    spec.positive_weight = r.number_or("positive_weight", spec.positive_weight);
    if (const json* v = r.optional("mean_positive")) {
      spec.mean_positive = vector_from_json(*v, r.key_path("mean_positive"));
    }
    if (const json* v = r.optional("mean_negative")) {
      spec.mean_negative = vector_from_json(*v, r.key_path("mean_negative"));
    }
    spec.spread = r.number_or("spread", spec.spread);
  }
  r.finish();
  spec.validate();
  return spec;
}

json to_json_value(const SvmFit& fit) {
  return json{{"support_points", points_to_json(fit.support_points)},
              {"alpha", vector_to_json(fit.alpha)},
              {"lambda", fit.lambda},
              {"kernel", to_json_value(fit.kernel)},
              {"loss", to_json_value(fit.loss)},
              {"objective", fit.objective},
              {"grad_norm", fit.grad_norm},
              {"stationarity", number_or_null(fit.stationarity)},
              {"iterations", fit.iterations}};
}

SvmFit fit_from_json(const json& j) {
  ObjectReader r(j, "fit");
  SvmFit fit;
  fit.support_points = points_from_json(r.required("support_points"), "fit.support_points");
  fit.alpha = vector_from_json(r.required("alpha"), "fit.alpha");
  fit.lambda = r.number("lambda");
  fit.kernel = kernel_from_json(r.required("kernel"), "fit.kernel");
  fit.loss = loss_from_json(r.required("loss"), "fit.loss");
  fit.objective = r.number("objective");
  fit.grad_norm = r.number_or("grad_norm", 0.0);
  if (const json* s = r.optional("stationarity")) {
    fit.stationarity = s->is_number() ? s->get<double>() : std::numeric_limits<double>::quiet_NaN();
  }
  fit.iterations = r.integer_or("iterations", 0);
  r.finish();
  if (fit.alpha.size() != fit.support_points.rows()) {
    throw ConfigError("config", "fit.alpha length does not match support points", "fit.alpha");
  }
  return fit;
}

json to_json_value(const AsymptoticLaw& law) {
  return json{{"grid", points_to_json(law.grid)},
              {"covariance", matrix_to_json(law.covariance)},
              {"mean", vector_to_json(law.mean)},
              {"basis", {{"kind", "kernel_sections"},
                         {"sample_size", law.sample_size},
                         {"representation_points", law.basis_size}}}};
}

AsymptoticLaw asymptotic_law_from_json(const json& j) {
  ObjectReader r(j, "law");
  AsymptoticLaw law;
  law.grid = points_from_json(r.required("grid"), "law.grid");
  law.covariance = points_from_json(r.required("covariance"), "law.covariance");
  law.mean = vector_from_json(r.required("mean"), "law.mean");
  if (const json* basis = r.optional("basis")) {
    ObjectReader b(*basis, "law.basis");
    b.string("kind");
    law.sample_size = b.integer_or("sample_size", 0);
    law.basis_size = b.integer_or("representation_points", 0);
    b.finish();
  }
  r.finish();
  return law;
}

json ensemble_sidecar(const BootstrapEnsemble& e) {
  json seeds = json::array();
  for (std::size_t k = 0; k < e.replicate_index.size(); ++k) {
    seeds.push_back({{"replicate", e.replicate_index[k]}, {"seed", e.replicate_seeds[k]}});
  }
  return json{{"master_seed", e.master_seed},
              {"requested", e.requested},
              {"completed", e.replicates.size()},
              {"failed", e.failed},
              {"replicates", seeds},
              {"grid", points_to_json(e.grid)},
              {"base_on_grid", vector_to_json(e.base_on_grid)},
              {"base_fit", to_json_value(e.base_fit)},
              {"draws_file", "bootstrap_draws.csv"}};
}

namespace {

json model_to_json(const ModelConfig& m) {
  return json{{"generator", to_json_value(m.generator)},
              {"kernel", to_json_value(m.kernel)},
              {"loss", to_json_value(m.loss)},
              {"lambda", m.lambda},
              {"lambda_perturbation", m.lambda_perturbation},
              {"n_ref", m.n_ref}};
}

}  // namespace

json to_json_value(const ConsistencyReport& report) {
  const ConsistencyConfig& c = report.config;
  json config = model_to_json(c.model);
  config["n_ladder"] = c.n_ladder;
  config["B"] = c.bootstrap_replicates;
  config["M"] = c.mc_replicates;
  config["gaussian_draws"] = c.gaussian_draws;
  config["bl_resolution"] = c.bl_resolution;
  config["grid"] = points_to_json(c.grid);

  json ladder = json::array();
  for (const LadderResult& e : report.ladder) {
    json points = json::array();
    for (std::size_t j = 0; j < e.points.size(); ++j) {
      const GridPointMetrics& p = e.points[j];
      points.push_back({{"grid_point", j},
                        {"ks_boot_mc", p.ks_boot_mc},
                        {"bl_boot_mc", p.bl_boot_mc},
                        {"ks_gauss_mc", p.ks_gauss_mc},
                        {"bl_gauss_mc", p.bl_gauss_mc},
                        {"ks_gauss_boot", p.ks_gauss_boot},
                        {"sd_boot", p.sd_boot},
                        {"sd_mc", p.sd_mc},
                        {"sd_gauss", p.sd_gauss},
                        {"mean_mc", p.mean_mc}});
    }
    ladder.push_back({{"n", e.n},
                      {"lambda", e.lambda},
                      {"median_ks_boot_mc", e.median_ks_boot_mc},
                      {"median_bl_boot_mc", e.median_bl_boot_mc},
                      {"median_ks_gauss_mc", e.median_ks_gauss_mc},
                      {"median_ks_gauss_boot", e.median_ks_gauss_boot},
                      {"bootstrap_failures", e.bootstrap_failures},
                      {"mc_failures", e.mc_failures},
                      {"covariance_clamped_mass", e.covariance_clamped_mass},
                      {"grid_points", points}});
  }
  return json{{"experiment", "consistency"},
              {"seed", report.seed},
              {"config", config},
              {"reference", {{"n_ref", c.model.n_ref},
                             {"on_grid", vector_to_json(report.reference_on_grid)}}},
              {"ladder", ladder},
              {"monotone_median_ks", report.monotone}};
}

json to_json_value(const CoverageReport& report) {
  const CoverageConfig& c = report.config;
  json config = model_to_json(c.model);
  config["n"] = c.n;
  config["B"] = c.bootstrap_replicates;
  config["reps"] = c.reps;
  config["level"] = c.level;
  config["x0"] = vector_to_json(c.x0);
  return json{{"experiment", "coverage"},
              {"seed", report.seed},
              {"config", config},
              {"reference", {{"n_ref", c.model.n_ref}, {"at_x0", report.reference_at_x0}}},
              {"completed", report.completed},
              {"failed", report.failed},
              {"hits", report.hits},
              {"coverage", report.coverage},
              {"standard_error", report.standard_error},
              {"mean_width", report.mean_width}};
}

std::string consistency_csv(const ConsistencyReport& report) {
  std::string out = "n,grid_point,metric,value\n";
  auto row = [&](int n, std::size_t j, const char* metric, double v) {
    out += std::to_string(n) + ',' + std::to_string(j) + ',' + metric + ',' + format_double(v) + '\n';
  };
  for (const LadderResult& e : report.ladder) {
    for (std::size_t j = 0; j < e.points.size(); ++j) {
      const GridPointMetrics& p = e.points[j];
      row(e.n, j, "ks_boot_mc", p.ks_boot_mc);
      row(e.n, j, "bl_boot_mc", p.bl_boot_mc);
      row(e.n, j, "ks_gauss_mc", p.ks_gauss_mc);
      row(e.n, j, "bl_gauss_mc", p.bl_gauss_mc);
      row(e.n, j, "ks_gauss_boot", p.ks_gauss_boot);
      row(e.n, j, "sd_boot", p.sd_boot);
      row(e.n, j, "sd_mc", p.sd_mc);
      row(e.n, j, "sd_gauss", p.sd_gauss);
      row(e.n, j, "mean_mc", p.mean_mc);
    }
  }
  return out;
}

std::string coverage_csv(const CoverageReport& report) {
  std::string out = "rep,lower,upper,hit\n";
  for (std::size_t r = 0; r < report.lower.size(); ++r) {
    const bool hit = report.lower[r] <= report.reference_at_x0 &&
                     report.reference_at_x0 <= report.upper[r];
    out += std::to_string(r) + ',' + format_double(report.lower[r]) + ',' +
           format_double(report.upper[r]) + ',' + (hit ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace svmboot
