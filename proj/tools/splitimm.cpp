// splitimm: splitting trees with immigration — parameters, scale function,
// population simulation, validation suites, and theta/b estimation.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "splitimm/cmj.hpp"
#include "splitimm/errors.hpp"
#include "splitimm/estimate.hpp"
#include "splitimm/immigration.hpp"
#include "splitimm/model.hpp"
#include "splitimm/scale.hpp"
#include "splitimm/validate.hpp"

namespace {

using nlohmann::ordered_json;
using namespace splitimm;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

ordered_json json_number(double x) {
  if (std::isfinite(x)) return x;
  return x > 0 ? "inf" : "-inf";
}

struct RunConfig {
  LifespanModel model{2.0, Exponential{1.0}};
  std::optional<ImmigrationConfig> immigration;
  double t = 1.0;
  std::int64_t replicates = 100;
  std::uint64_t seed = 42;
  double h = 0.0;        // 0 = solver default
  double horizon = 0.0;  // 0 = derived from t
  int workers = 1;
  std::string out;
};

LifespanModel parse_model(const ordered_json& j) {
  double b = j.value("b", 2.0);
  std::string family = j.value("family", "exponential");
  if (family == "exponential") return {b, Exponential{j.value("d", 1.0)}};
  if (family == "dirac") return {b, DiracFinite{j.value("a", 1.0)}};
  if (family == "dirac_infinite") return {b, DiracInfinite{}};
  if (family == "uniform") return {b, Uniform{j.value("lo", 0.0), j.value("hi", 1.0)}};
  if (family == "gamma") return {b, GammaDist{j.value("shape", 1.0), j.value("rate", 1.0)}};
  throw InputError("unknown lifespan family: " + family);
}

ImmigrationConfig parse_immigration(const ordered_json& j) {
  std::string which = j.value("model", "I");
  if (which == "I") return {j.value("theta", 2.0), ModelI{}};
  if (which == "II") {
    std::vector<double> p = j.value("p", std::vector<double>{0.5, 0.5});
    return {j.value("theta", 2.0), ModelII{p}};
  }
  if (which == "III") return ImmigrationConfig(ModelIII{FisherLogSeries{j.value("a", 1.0)}});
  throw InputError("unknown immigration model: " + which);
}

RunConfig load_config(const std::string& path) {
  RunConfig config;
  if (path.empty()) return config;
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path);
  ordered_json j = ordered_json::parse(in);
  if (j.contains("model")) config.model = parse_model(j["model"]);
  if (j.contains("immigration")) config.immigration = parse_immigration(j["immigration"]);
  if (j.contains("run")) {
    const auto& r = j["run"];
    config.t = r.value("t", config.t);
    config.replicates = r.value("replicates", config.replicates);
    config.seed = r.value("seed", config.seed);
    config.h = r.value("h", config.h);
    config.horizon = r.value("horizon", config.horizon);
    config.workers = r.value("workers", config.workers);
    config.out = r.value("out", config.out);
  }
  return config;
}

void emit(const std::string& out_path, const std::string& payload) {
  if (out_path.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw InputError("cannot open output file: " + out_path);
  out << payload;
}

int cmd_params(const RunConfig& config) {
  DerivedParams params = malthusian(config.model);
  ordered_json j;
  j["eta"] = json_number(params.eta);
  j["c"] = json_number(params.c);
  j["m"] = json_number(params.m);
  j["p_ext"] = json_number(params.p_ext);
  emit(config.out, j.dump(2) + "\n");
  return 0;
}

int cmd_scale(const RunConfig& config) {
  DerivedParams params = malthusian(config.model);
  double h = config.h > 0.0 ? config.h : default_scale_step(params);
  double horizon = config.horizon > 0.0 ? config.horizon : std::max(config.t, 10.0);
  ScaleGrid grid = solve_scale(config.model, params, horizon, h);
  std::ostringstream csv;
  csv << "t,W,Wprime,exp_scaled\n";
  for (std::size_t k = 0; k < grid.values.size(); ++k) {
    double t = grid.h * static_cast<double>(k);
    csv << fmt17(t) << ',' << fmt17(grid.values[k]) << ',' << fmt17(grid.derivs[k]) << ','
        << fmt17(std::exp(-params.eta * t) * grid.values[k]) << '\n';
  }
  emit(config.out, csv.str());
  return 0;
}

const char* immigration_label(const ImmigrationConfig& config) {
  if (std::holds_alternative<ModelI>(config.model())) return "I";
  if (std::holds_alternative<ModelII>(config.model())) return "II";
  return "III";
}

int cmd_simulate(const RunConfig& config) {
  if (config.replicates < 1) throw InputError("replicates must be >= 1");
  ImmigrationConfig imm = config.immigration.value_or(ImmigrationConfig(2.0, ModelI{}));
  DerivedParams params = malthusian(config.model);
  auto n = static_cast<std::size_t>(config.replicates);
  std::vector<PopulationSnapshot> snapshots(n);
  run_replicates(n, config.workers, [&](std::size_t i) {
    RngStream stream = stream_for(config.seed, i);
    snapshots[i] = simulate_immigration(config.model, params, imm, config.t, stream);
  });
  std::ostringstream csv;
  csv << "replicate,model,t,type_label,immigration_time,abundance,total\n";
  const char* label = immigration_label(imm);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& family : snapshots[i].families) {
      csv << i << ',' << label << ',' << fmt17(config.t) << ',' << family.type_label << ','
          << fmt17(family.immigration_time) << ',' << family.abundance << ','
          << snapshots[i].total << '\n';
    }
  }
  emit(config.out, csv.str());
  return 0;
}

int cmd_validate(const RunConfig& config, const std::string& suite) {
  ValidateOptions options{config.seed, config.workers};
  std::vector<TestReport> reports = run_suite(suite, options);
  ordered_json array = ordered_json::array();
  bool all_passed = true;
  for (const auto& r : reports) {
    ordered_json j;
    j["name"] = r.name;
    j["statistic"] = json_number(r.statistic);
    j["p_value"] = std::isnan(r.p_value) ? ordered_json() : json_number(r.p_value);
    j["n"] = r.n;
    j["passed"] = r.passed;
    j["level"] = json_number(r.level);
    array.push_back(j);
    all_passed = all_passed && r.passed;
  }
  emit(config.out, array.dump(2) + "\n");
  return all_passed ? 0 : 1;
}

int cmd_estimate(const RunConfig& config, std::vector<double> fractions,
                 const std::string& in_path) {
  if (!in_path.empty()) {
    std::ifstream in(in_path);
    if (!in) throw InputError("cannot open fractions file: " + in_path);
    double x;
    while (in >> x) fractions.push_back(x);
  }
  AlphaEstimate estimate = estimate_alpha(fractions);
  ordered_json j;
  j["alpha_hat"] = json_number(estimate.alpha_hat);
  j["ci_low"] = json_number(estimate.ci_low);
  j["ci_high"] = json_number(estimate.ci_high);
  j["k_used"] = estimate.k_used;
  emit(config.out, j.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Supercritical splitting trees with Poissonian immigration"};
  app.require_subcommand(1);

  std::string config_path, out_path, suite = "all", fractions_file;
  std::optional<std::uint64_t> seed_flag;
  std::optional<std::int64_t> replicates_flag;
  std::optional<double> t_flag, h_flag, horizon_flag;
  std::optional<int> workers_flag;
  bool reseed = false;
  std::vector<double> fractions;

  app.add_option("--config", config_path, "JSON config file ({model, immigration, run})");
  app.add_option("--seed", seed_flag, "RNG seed (overrides config)");
  app.add_option("--replicates", replicates_flag, "Number of replicates");
  app.add_option("--t", t_flag, "Observation time");
  app.add_option("--out", out_path, "Output path (default: stdout)");
  app.add_option("--workers", workers_flag, "Worker threads (results independent of the count)");
  app.add_flag("--reseed", reseed, "Draw a fresh seed instead of the pinned default");

  auto* params_cmd = app.add_subcommand("params", "Print eta, c, m, p_ext as JSON");
  auto* scale_cmd = app.add_subcommand("scale", "Emit the scale function W as CSV");
  scale_cmd->add_option("--step", h_flag, "Solver grid step");
  scale_cmd->add_option("--horizon", horizon_flag, "Solver horizon");
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate populations with immigration");
  auto* validate_cmd = app.add_subcommand("validate", "Run a validation suite");
  validate_cmd->add_option("--suite", suite, "One of: scale, transient, limits, gem, model2, model3, spine, lemmas, all");
  auto* estimate_cmd = app.add_subcommand("estimate", "Estimate theta/b from ranked fractions");
  estimate_cmd->add_option("--fractions", fractions, "Age-ranked surviving fractions")
      ->delimiter(',');
  estimate_cmd->add_option("--in", fractions_file, "File of whitespace-separated fractions");

  // global flags remain usable after the subcommand name
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig config = load_config(config_path);
    if (seed_flag) config.seed = *seed_flag;
    if (replicates_flag) config.replicates = *replicates_flag;
    if (t_flag) config.t = *t_flag;
    if (h_flag) config.h = *h_flag;
    if (horizon_flag) config.horizon = *horizon_flag;
    if (workers_flag) config.workers = *workers_flag;
    if (!out_path.empty()) config.out = out_path;
    if (reseed) {
      auto now = std::chrono::steady_clock::now().time_since_epoch().count();
      config.seed = mix64(static_cast<std::uint64_t>(now));
    }

    if (params_cmd->parsed()) return cmd_params(config);
    if (scale_cmd->parsed()) return cmd_scale(config);
    if (simulate_cmd->parsed()) return cmd_simulate(config);
    if (validate_cmd->parsed()) return cmd_validate(config, suite);
    if (estimate_cmd->parsed()) return cmd_estimate(config, fractions, fractions_file);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
