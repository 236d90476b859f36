#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <unistd.h>

#include "svmboot/bootstrap.hpp"
#include "svmboot/error.hpp"
#include "svmboot/harness.hpp"
#include "svmboot/influence.hpp"
#include "svmboot/io.hpp"
#include "svmboot/law.hpp"
#include "svmboot/random.hpp"
#include "svmboot/serialization.hpp"

namespace svmboot::cli {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kCommands{"fit", "bootstrap", "influence", "mc-law", "consistency", "coverage"};

// Config keys each command reads. Anything else is rejected.
const std::map<std::string, std::set<std::string>> kAllowedKeys{
    {"fit", {"command", "output_dir", "data", "generator", "n", "kernel", "loss", "lambda", "grid"}},
    {"bootstrap", {"command", "output_dir", "data", "generator", "n", "kernel", "loss", "lambda", "grid", "B"}},
    {"influence",
     {"command", "output_dir", "data", "generator", "n", "kernel", "loss", "lambda", "grid", "gaussian_draws"}},
    {"mc-law", {"command", "output_dir", "generator", "n", "kernel", "loss", "lambda", "grid", "M", "n_ref"}},
    {"consistency",
     {"command", "output_dir", "generator", "kernel", "loss", "lambda", "lambda_perturbation", "n_ref", "n_ladder",
      "B", "M", "gaussian_draws", "bl_resolution", "grid"}},
    {"coverage",
     {"command", "output_dir", "generator", "kernel", "loss", "lambda", "lambda_perturbation", "n_ref", "n", "B",
      "reps", "level", "x0"}},
};

struct Flags {
  std::string command;
  std::string config;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string out;
};

// Output directory whose files appear only once every artifact is written.
class Staging {
 public:
  explicit Staging(fs::path target) : target_(std::move(target)) {
    std::error_code ec;
    fs::create_directories(target_, ec);
    if (ec || !fs::is_directory(target_)) throw IoError("cli", "cannot create output directory " + target_.string());
    dir_ = target_ / (".staging-" + std::to_string(::getpid()));
    fs::remove_all(dir_, ec);
    if (!fs::create_directory(dir_, ec) || ec) throw IoError("cli", "cannot create " + dir_.string());
  }
  Staging(const Staging&) = delete;
  Staging& operator=(const Staging&) = delete;
  ~Staging() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }

  fs::path path(const std::string& name) {
    names_.push_back(name);
    return dir_ / name;
  }

  void commit() {
    for (const auto& name : names_) {
      std::error_code ec;
      fs::rename(dir_ / name, target_ / name, ec);
      if (ec) throw IoError("cli", "cannot move " + name + " into " + target_.string() + ": " + ec.message());
    }
  }

 private:
  fs::path target_;
  fs::path dir_;
  std::vector<std::string> names_;
};

class Timer {
 public:
  explicit Timer(std::ostream& log) : log_(log) {}

  template <typename F>
  auto stage(const std::string& name, F&& body) {
    log_ << "stage: " << name << '\n' << std::flush;
    const auto t0 = std::chrono::steady_clock::now();
    auto result = body();
    times_[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
  }

  json to_json() const { return json(times_); }

 private:
  std::ostream& log_;
  std::map<std::string, double> times_;
};

std::uint64_t require_seed(const Flags& f) {
  if (!f.seed) throw ConfigError("cli", "command '" + f.command + "' needs --seed", "--seed");
  return *f.seed;
}

int positive_int(ObjectReader& r, const std::string& key, int fallback, int minimum = 1) {
  const int v = r.integer_or(key, fallback);
  if (v < minimum) {
    throw ConfigError("cli", "'" + r.key_path(key) + "' must be >= " + std::to_string(minimum), r.key_path(key));
  }
  return v;
}

double positive_number(ObjectReader& r, const std::string& key) {
  const double v = r.number(key);
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("cli", "'" + key + "' must be finite and > 0", key);
  return v;
}

// Training data from a CSV file (columns x..., y) or from the generator.
struct DataSource {
  std::optional<fs::path> file;
  GeneratorSpec generator = GeneratorSpec::default_regression();
  int n = 0;
};

DataSource read_data_source(ObjectReader& r, const fs::path& base) {
  DataSource src;
  if (const json* d = r.optional("data")) {
    if (!d->is_string()) throw ConfigError("cli", "'data' must be a path to a CSV file", "data");
    fs::path p = d->get<std::string>();
    if (p.is_relative()) p = base / p;
    if (!fs::is_regular_file(p)) throw ConfigError("cli", "data file " + p.string() + " does not exist", "data");
    if (r.has("generator") || r.has("n")) {
      throw ConfigError("cli", "give either 'data' or 'generator' and 'n', not both", "data");
    }
    src.file = p;
    return src;
  }
  if (const json* g = r.optional("generator")) src.generator = generator_from_json(*g);
  src.n = positive_int(r, "n", 0);
  return src;
}

Dataset load_data(const DataSource& src, const SmoothLoss& loss, std::uint64_t seed) {
  Dataset data;
  if (src.file) {
    const CsvTable table = read_matrix_csv(*src.file);
    if (table.header.size() < 2 || table.header.back() != "y") {
      throw InputError("cli", "data file needs input columns followed by a final 'y' column");
    }
    data.xs = table.values.leftCols(table.values.cols() - 1);
    data.ys = table.values.col(table.values.cols() - 1);
  } else {
    data = generate(src.generator, src.n, derive_seed(seed, streams::data, static_cast<std::uint64_t>(src.n)));
  }
  data.validate(loss);
  return data;
}

std::vector<std::string> column_names(const std::string& prefix, Eigen::Index count) {
  std::vector<std::string> names;
  for (Eigen::Index k = 0; k < count; ++k) names.push_back(prefix + std::to_string(k));
  return names;
}

void summary(std::ostream& out, const std::string& metric, double value) {
  out << metric << ' ' << format_double(value) << '\n';
}

struct Context {
  Flags flags;
  json config;
  fs::path config_dir;
  std::ostream& out;
  std::ostream& err;
};

using Job = std::function<int(Staging&, Timer&)>;

void check_grid_dim(const Points& grid, Eigen::Index dim) {
  if (grid.rows() > 0 && grid.cols() != dim) {
    throw ConfigError("cli", "grid points must have the data's dimension " + std::to_string(dim), "grid");
  }
}

Job run_fit(Context& c, ObjectReader& r) {
  const DataSource src = read_data_source(r, c.config_dir);
  const KernelSpec kernel = kernel_from_json(r.required("kernel"));
  const SmoothLoss loss = loss_from_json(r.required("loss"));
  const double lambda = positive_number(r, "lambda");
  const Points grid = r.has("grid") ? points_from_json(r.required("grid"), "grid") : Points(0, 0);
  r.finish();
  const std::uint64_t seed = src.file ? c.flags.seed.value_or(0) : require_seed(c.flags);
  return [=, &c](Staging& stage, Timer& timer) {
    const Dataset data = timer.stage("load", [&] { return load_data(src, loss, seed); });
    check_grid_dim(grid, data.dim());
    const SvmFit f = timer.stage("fit", [&] { return fit(WeightedSample::uniform(data), kernel, loss, lambda); });
    write_text(stage.path("fit.json"), to_json_value(f).dump(2) + "\n");
    if (grid.rows() > 0) {
      Eigen::MatrixXd table(grid.rows(), grid.cols() + 1);
      table << grid, evaluate_on_grid(f, grid);
      auto header = column_names("x", grid.cols());
      header.push_back("f");
      write_matrix_csv(stage.path("predictions.csv"), table, header);
    }
    summary(c.out, "objective", f.objective);
    summary(c.out, "iterations", f.iterations);
    summary(c.out, "stationarity", f.stationarity);
    summary(c.out, "rkhs_norm", rkhs_norm(f));
    return ok;
  };
}

Job run_bootstrap(Context& c, ObjectReader& r) {
  const DataSource src = read_data_source(r, c.config_dir);
  const KernelSpec kernel = kernel_from_json(r.required("kernel"));
  const SmoothLoss loss = loss_from_json(r.required("loss"));
  const double lambda = positive_number(r, "lambda");
  const Points grid = points_from_json(r.required("grid"), "grid");
  const int replicates = positive_int(r, "B", 0);
  r.finish();
  const std::uint64_t seed = require_seed(c.flags);
  return [=, &c](Staging& stage, Timer& timer) {
    const Dataset data = timer.stage("load", [&] { return load_data(src, loss, seed); });
    check_grid_dim(grid, data.dim());
    BootstrapOptions opts;
    opts.jobs = c.flags.jobs;
    const auto master = derive_seed(seed, streams::bootstrap, static_cast<std::uint64_t>(data.size()));
    const BootstrapEnsemble e = timer.stage("bootstrap", [&] {
      return bootstrap_ensemble(data, kernel, loss, lambda, replicates, grid, master, opts);
    });
    write_matrix_csv(stage.path("bootstrap_draws.csv"), e.scaled_draws, column_names("g", grid.rows()));
    write_text(stage.path("bootstrap.json"), ensemble_sidecar(e).dump(2) + "\n");
    summary(c.out, "replicates_completed", static_cast<double>(e.replicates.size()));
    summary(c.out, "replicates_failed", static_cast<double>(e.failed.size()));
    for (Eigen::Index g = 0; g < grid.rows(); ++g) {
      const EmpiricalLaw law = EmpiricalLaw(e.scaled_draws, "bootstrap").marginal(g);
      const double sd = std::sqrt((law.draws().array() - law.draws().mean()).square().sum() /
                                  std::max<Eigen::Index>(1, law.count() - 1));
      summary(c.out, "sd_boot[g" + std::to_string(g) + "]", sd);
    }
    return ok;
  };
}

Job run_influence(Context& c, ObjectReader& r) {
  const DataSource src = read_data_source(r, c.config_dir);
  const KernelSpec kernel = kernel_from_json(r.required("kernel"));
  const SmoothLoss loss = loss_from_json(r.required("loss"));
  const double lambda = positive_number(r, "lambda");
  const Points grid = points_from_json(r.required("grid"), "grid");
  const int draws = positive_int(r, "gaussian_draws", 0, 0);
  r.finish();
  const std::uint64_t seed = (src.file && draws == 0) ? c.flags.seed.value_or(0) : require_seed(c.flags);
  return [=, &c](Staging& stage, Timer& timer) {
    const Dataset data = timer.stage("load", [&] { return load_data(src, loss, seed); });
    check_grid_dim(grid, data.dim());
    const SvmFit f = timer.stage("fit", [&] { return fit(WeightedSample::uniform(data), kernel, loss, lambda); });
    const InfluenceModel model = timer.stage("operator", [&] { return build_influence_model(f, data, grid); });
    const AsymptoticLaw law = timer.stage("covariance", [&] { return asymptotic_law(model, data, grid); });
    const double sigma = kp_min_singular_value(model);

    json report{{"law", to_json_value(law)},
                {"kp_min_singular_value", sigma},
                {"kp_coefficient_min_singular_value", kp_coefficient_min_singular_value(model)},
                {"two_lambda", 2.0 * lambda},
                {"fit", to_json_value(f)}};
    write_matrix_csv(stage.path("influence_values.csv"), influence_on_grid(model, grid).transpose(),
                     column_names("g", grid.rows()));
    if (draws > 0) {
      const auto master = derive_seed(seed, streams::gaussian, static_cast<std::uint64_t>(data.size()));
      const GaussianDraws gd = timer.stage("gaussian", [&] { return sample_gaussian(law, draws, master); });
      write_matrix_csv(stage.path("gaussian_draws.csv"), gd.draws, column_names("g", grid.rows()));
      report["gaussian_draws"] = {{"count", draws}, {"seed", master}, {"clamped_mass", gd.clamped_mass}};
    }
    write_text(stage.path("influence.json"), report.dump(2) + "\n");
    summary(c.out, "kp_min_singular_value", sigma);
    for (Eigen::Index g = 0; g < grid.rows(); ++g) {
      summary(c.out, "sd_gauss[g" + std::to_string(g) + "]", std::sqrt(std::max(0.0, law.covariance(g, g))));
    }
    return ok;
  };
}

Job run_mc_law(Context& c, ObjectReader& r) {
  ModelConfig m;
  if (const json* g = r.optional("generator")) m.generator = generator_from_json(*g);
  m.kernel = kernel_from_json(r.required("kernel"));
  m.loss = loss_from_json(r.required("loss"));
  m.lambda = positive_number(r, "lambda");
  m.n_ref = positive_int(r, "n_ref", m.n_ref, kMinReferenceSize);
  const int n = positive_int(r, "n", 0);
  const int replicates = positive_int(r, "M", 0);
  const Points grid = points_from_json(r.required("grid"), "grid");
  r.finish();
  check_grid_dim(grid, m.generator.dim);
  const std::uint64_t seed = require_seed(c.flags);
  return [=, &c](Staging& stage, Timer& timer) {
    const SvmFit ref = timer.stage("reference", [&] {
      return reference_fit(m.generator, m.kernel, m.loss, m.lambda, m.n_ref, derive_seed(seed, streams::reference, 0));
    });
    const auto master = derive_seed(seed, streams::monte_carlo, static_cast<std::uint64_t>(n));
    const SamplingLaw law = timer.stage("monte-carlo", [&] {
      return mc_sampling_law(m.generator, m.kernel, m.loss, m.lambda, n, replicates, grid, ref, master,
                             c.flags.jobs);
    });
    const Eigen::VectorXd ref_on_grid = evaluate_on_grid(ref, grid);
    write_matrix_csv(stage.path("mc_draws.csv"), law.draws, column_names("g", grid.rows()));
    json sidecar{{"seed", seed},
                 {"master_seed", master},
                 {"n", n},
                 {"requested", replicates},
                 {"replicate_index", law.replicate_index},
                 {"failed", law.failed},
                 {"grid", points_to_json(grid)},
                 {"reference", {{"n_ref", m.n_ref}, {"on_grid", std::vector<double>(ref_on_grid.begin(), ref_on_grid.end())}}},
                 {"draws_file", "mc_draws.csv"}};
    write_text(stage.path("mc_law.json"), sidecar.dump(2) + "\n");
    summary(c.out, "replicates_completed", static_cast<double>(law.replicate_index.size()));
    for (Eigen::Index g = 0; g < grid.rows(); ++g) {
      const Eigen::VectorXd col = law.draws.col(g);
      summary(c.out, "mean_mc[g" + std::to_string(g) + "]", col.mean());
    }
    return ok;
  };
}

ModelConfig read_model(ObjectReader& r, ModelConfig m) {
  if (const json* g = r.optional("kernel")) m.kernel = kernel_from_json(*g);
  if (const json* l = r.optional("loss")) m.loss = loss_from_json(*l);
  if (r.has("lambda")) m.lambda = positive_number(r, "lambda");
  m.lambda_perturbation = r.boolean_or("lambda_perturbation", m.lambda_perturbation);
  m.n_ref = positive_int(r, "n_ref", m.n_ref, kMinReferenceSize);
  return m;
}

bool wants_classification(const ObjectReader& r, const json& config) {
  if (!r.has("generator")) return false;
  const json& g = config.at("generator");
  return g.is_object() && g.contains("kind") && g["kind"] == "classification_gaussian_mixture";
}

Job run_consistency(Context& c, ObjectReader& r) {
  ConsistencyConfig cfg = wants_classification(r, c.config) ? ConsistencyConfig::default_classification()
                                                            : ConsistencyConfig::default_regression();
  if (const json* g = r.optional("generator")) cfg.model.generator = generator_from_json(*g);
  cfg.model = read_model(r, cfg.model);
  if (const json* ladder = r.optional("n_ladder")) {
    if (!ladder->is_array()) throw ConfigError("cli", "'n_ladder' must be an array of integers", "n_ladder");
    cfg.n_ladder.clear();
    for (const auto& v : *ladder) {
      if (!v.is_number_integer()) throw ConfigError("cli", "'n_ladder' must be an array of integers", "n_ladder");
      cfg.n_ladder.push_back(v.get<int>());
    }
  }
  cfg.bootstrap_replicates = r.integer_or("B", cfg.bootstrap_replicates);
  cfg.mc_replicates = r.integer_or("M", cfg.mc_replicates);
  cfg.gaussian_draws = r.integer_or("gaussian_draws", cfg.gaussian_draws);
  cfg.bl_resolution = r.integer_or("bl_resolution", cfg.bl_resolution);
  if (const json* g = r.optional("grid")) cfg.grid = points_from_json(*g, "grid");
  r.finish();
  cfg.validate();
  const std::uint64_t seed = require_seed(c.flags);
  return [=, &c](Staging& stage, Timer& timer) {
    const ConsistencyReport report =
        timer.stage("consistency", [&] { return consistency_experiment(cfg, seed, c.flags.jobs); });
    write_text(stage.path("consistency.json"), to_json_value(report).dump(2) + "\n");
    write_text(stage.path("consistency.csv"), consistency_csv(report));
    for (const auto& rung : report.ladder) {
      const std::string tag = "[n=" + std::to_string(rung.n) + "]";
      summary(c.out, "median_ks_boot_mc" + tag, rung.median_ks_boot_mc);
      summary(c.out, "median_bl_boot_mc" + tag, rung.median_bl_boot_mc);
      summary(c.out, "median_ks_gauss_mc" + tag, rung.median_ks_gauss_mc);
      summary(c.out, "median_ks_gauss_boot" + tag, rung.median_ks_gauss_boot);
    }
    summary(c.out, "monotone_median_ks", report.monotone ? 1.0 : 0.0);
    return ok;
  };
}

Job run_coverage(Context& c, ObjectReader& r) {
  CoverageConfig cfg = CoverageConfig::default_regression();
  if (const json* g = r.optional("generator")) cfg.model.generator = generator_from_json(*g);
  cfg.model = read_model(r, cfg.model);
  cfg.n = r.integer_or("n", cfg.n);
  cfg.bootstrap_replicates = r.integer_or("B", cfg.bootstrap_replicates);
  cfg.reps = r.integer_or("reps", cfg.reps);
  cfg.level = r.number_or("level", cfg.level);
  if (const json* x = r.optional("x0")) {
    const Points p = points_from_json(json::array({*x}), "x0");
    cfg.x0 = p.row(0).transpose();
  }
  r.finish();
  cfg.validate();
  const std::uint64_t seed = require_seed(c.flags);
  return [=, &c](Staging& stage, Timer& timer) {
    const CoverageReport report =
        timer.stage("coverage", [&] { return coverage_experiment(cfg, seed, c.flags.jobs); });
    write_text(stage.path("coverage.json"), to_json_value(report).dump(2) + "\n");
    write_text(stage.path("coverage.csv"), coverage_csv(report));
    summary(c.out, "coverage", report.coverage);
    summary(c.out, "standard_error", report.standard_error);
    summary(c.out, "mean_width", report.mean_width);
    summary(c.out, "failed", report.failed);
    return ok;
  };
}

int dispatch(Context& c) {
  c.config = [&] {
    try {
      return json::parse(read_text(c.flags.config));
    } catch (const json::parse_error& e) {
      throw ConfigError("cli", "config " + c.flags.config + " is not valid JSON: " + e.what(), "--config");
    }
  }();
  if (!c.config.is_object()) throw ConfigError("cli", "config must be a JSON object", "--config");
  c.config_dir = fs::path(c.flags.config).parent_path();

  const auto& allowed = kAllowedKeys.at(c.flags.command);
  for (const auto& item : c.config.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError("cli", "config key '" + item.key() + "' is not used by command '" + c.flags.command + "'",
                        item.key());
    }
  }
  ObjectReader r(c.config, "");
  if (const json* cmd = r.optional("command")) {
    if (!cmd->is_string() || cmd->get<std::string>() != c.flags.command) {
      throw ConfigError("cli", "config declares command " + cmd->dump() + " but '" + c.flags.command + "' was run",
                        "command");
    }
  }
  fs::path out_dir = c.flags.out;
  if (const json* o = r.optional("output_dir")) {
    if (!o->is_string()) throw ConfigError("cli", "'output_dir' must be a string", "output_dir");
    if (out_dir.empty()) out_dir = o->get<std::string>();
  }
  if (out_dir.empty()) throw ConfigError("cli", "no output directory: pass --out or set output_dir", "--out");

  using Runner = Job (*)(Context&, ObjectReader&);
  const std::map<std::string, Runner> runners{{"fit", run_fit},           {"bootstrap", run_bootstrap},
                                              {"influence", run_influence}, {"mc-law", run_mc_law},
                                              {"consistency", run_consistency}, {"coverage", run_coverage}};
  // Every key is read and validated before the output directory is touched.
  const Job job = runners.at(c.flags.command)(c, r);
  Staging stage(out_dir);
  Timer timer(c.err);
  const int code = job(stage, timer);
  write_text(stage.path("timing.json"), timer.to_json().dump(2) + "\n");
  stage.commit();
  return code;
}

std::string error_json(const std::string& kind, const std::string& origin, const std::string& message,
                       const std::string& key) {
  json e{{"kind", kind}, {"origin", origin}, {"message", message}};
  if (!key.empty()) e["key"] = key;
  return json{{"error", e}}.dump();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bootstrap and delta-method inference for kernel SVMs with smooth losses", "svmboot"};
  app.require_subcommand(1);
  Flags flags;
  const std::map<std::string, std::string> help{
      {"fit", "fit one SVM and write its coefficients"},
      {"bootstrap", "Efron bootstrap of the fit on a grid"},
      {"influence", "influence functions and the Gaussian limit law on a grid"},
      {"mc-law", "Monte-Carlo sampling law of sqrt(n)(f_n - f_ref) on a grid"},
      {"consistency", "bootstrap vs Monte-Carlo vs Gaussian law distances along an n-ladder"},
      {"coverage", "coverage of percentile bootstrap intervals"},
  };
  for (const auto& name : kCommands) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", flags.config, "JSON config file")->required();
    sub->add_option("--seed", flags.seed, "master seed (required whenever randomness is involved)");
    sub->add_option("--jobs", flags.jobs, "worker threads; results do not depend on it")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", flags.out, "output directory (overrides output_dir)");
    sub->callback([&flags, name] { flags.command = name; });
  }

  if (!args.empty() && !args.front().starts_with('-') &&
      std::find(kCommands.begin(), kCommands.end(), args.front()) == kCommands.end()) {
    err << error_json("config", "cli", "unknown command '" + args.front() + "'", "command") << '\n';
    return config_error;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << error_json("config", "cli", e.what(), "") << '\n';
    return config_error;
  }

  Context c{flags, json{}, {}, out, err};
  try {
    return dispatch(c);
  } catch (const ConfigError& e) {
    err << error_json("config", e.origin(), e.what(), e.key()) << '\n';
    return config_error;
  } catch (const InputError& e) {
    err << error_json("input", e.origin(), e.what(), "") << '\n';
    return config_error;
  } catch (const IoError& e) {
    err << error_json("io", e.origin(), e.what(), "") << '\n';
    return io_error;
  } catch (const Error& e) {
    err << error_json(std::string(to_string(e.kind())), e.origin(), e.what(), "") << '\n';
    return numeric_error;
  } catch (const fs::filesystem_error& e) {
    err << error_json("io", "cli", e.what(), "") << '\n';
    return io_error;
  } catch (const std::exception& e) {
    err << error_json("numeric", "cli", e.what(), "") << '\n';
    return numeric_error;
  }
}

}  // namespace svmboot::cli
