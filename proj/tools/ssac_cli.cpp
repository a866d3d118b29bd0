#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ssac/analysis.hpp"
#include "ssac/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitMismatch = 4;

struct CommonOpts {
  std::string config_path;
  std::string out_dir;        // overrides config output_dir when set
  int seeds = 0;              // overrides config n_seeds when > 0
  std::vector<std::string> overrides;  // dotted.key=value
};

// Applies "a.b.c=value" into the config JSON; the value is parsed as JSON
// when possible, else taken as a string.
void apply_override(json& j, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos)
    throw ssac::InvalidModel("override must look like key=value: " + kv);
  const std::string path = kv.substr(0, eq);
  const std::string raw = kv.substr(eq + 1);

  json* node = &j;
  std::istringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) throw ssac::InvalidModel("empty override key");
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = &((*node)[parts[i]]);

  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  (*node)[parts.back()] = std::move(value);
}

ssac::ExperimentConfig load_with_overrides(const CommonOpts& opts) {
  std::ifstream in(opts.config_path, std::ios::binary);
  if (!in) throw ssac::InvalidModel("cannot open config: " + opts.config_path);
  std::ostringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw ssac::InvalidModel(std::string("config parse error: ") + e.what());
  }
  for (const auto& kv : opts.overrides) apply_override(j, kv);
  ssac::ExperimentConfig config = ssac::parse_config(j.dump());
  if (!opts.out_dir.empty()) config.output_dir = opts.out_dir;
  if (opts.seeds > 0) config.n_seeds = opts.seeds;
  config.validate();
  return config;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "experiment config JSON")->required();
  cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
  cmd->add_option("--seeds", opts.seeds, "number of seeds (overrides config)");
  cmd->add_option("--override", opts.overrides,
                  "dotted key=value applied to the config, repeatable");
}

int cmd_oracle(const CommonOpts& opts) {
  ssac::ExperimentConfig config;
  ssac::AssumptionReport report;
  try {
    config = load_with_overrides(opts);
    const ssac::Instance instance = ssac::build_instance(config);
    const ssac::AcConfig ac = ssac::build_ac_config(config, instance, 0);
    fs::create_directories(config.output_dir);
    report = ssac::make_assumption_report(instance, ac.omega_radius);
    ssac::write_assumption_report(
        (fs::path(config.output_dir) / "assumption_report.json").string(), report);
    ssac::write_oracle_csv((fs::path(config.output_dir) / "oracle.csv").string(),
                           instance);
  } catch (const ssac::InvalidModel& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  std::cout << "oracle report written to " << config.output_dir
            << " (mu=" << report.mu_estimate << ", delta=" << report.delta_estimate
            << ")\n";
  return kExitOk;
}

int cmd_run(const CommonOpts& opts) {
  ssac::ExperimentConfig config;
  try {
    config = load_with_overrides(opts);
    const ssac::Instance instance = ssac::build_instance(config);
    const std::string hash = ssac::config_hash(config);
    fs::create_directories(config.output_dir);
    for (int s = 0; s < config.n_seeds; ++s) {
      const ssac::AcConfig ac = ssac::build_ac_config(config, instance, s);
      ssac::IterateLog log =
          ssac::run(instance.mdp, instance.policy_class, instance.features, ac);
      log.config_hash = hash;
      const std::string stem = "log_seed" + std::to_string(s);
      ssac::write_log_csv((fs::path(config.output_dir) / (stem + ".csv")).string(), log);
      ssac::write_run_summary(
          (fs::path(config.output_dir) / (stem + ".json")).string(), log);
      std::cout << stem << ": final grad_sq=" << log.rows.back().grad_sq
                << " delta_sq=" << log.rows.back().delta_sq << "\n";
    }
  } catch (const ssac::InvalidModel& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int analyze_logs(const ssac::ExperimentConfig& config,
                 const std::vector<ssac::IterateLog>& logs) {
  const std::string hash = ssac::config_hash(config);
  for (const auto& log : logs)
    if (log.config_hash != hash) {
      std::cerr << "config hash mismatch: log has " << log.config_hash << ", config is "
                << hash << "\n";
      return kExitMismatch;
    }

  const ssac::Instance instance = ssac::build_instance(config);
  const ssac::AcConfig ac = ssac::build_ac_config(config, instance, 0);
  ssac::EstimateOptions est;
  est.seed = config.run.seed;
  const ssac::ConstantSet consts = ssac::estimate_constants(
      instance.mdp, instance.policy_class, instance.features, instance.theta_grid, est);

  const auto grad_med = ssac::median_series(logs, ssac::LogSeries::kGradSq);
  const auto delta_med = ssac::median_series(logs, ssac::LogSeries::kDeltaSq);
  const std::int64_t T = logs[0].total_steps;

  auto nearest = [](const std::vector<std::pair<std::int64_t, double>>& series,
                    std::int64_t t) {
    double best = 0.0;
    std::int64_t gap = std::numeric_limits<std::int64_t>::max();
    for (const auto& [idx, v] : series)
      if (std::llabs(idx - t) < gap) {
        gap = std::llabs(idx - t);
        best = v;
      }
    return best;
  };

  // Boundary terms from the run itself: tracking error at T/2 and the
  // objective drop over the second half (medians across seeds).
  std::vector<std::pair<std::int64_t, double>> value_med;
  {
    std::vector<ssac::IterateLog> tmp = logs;  // reuse median machinery on values
    for (auto& log : tmp)
      for (auto& row : log.rows) row.grad_sq = row.value;
    value_med = ssac::median_series(tmp, ssac::LogSeries::kGradSq);
  }
  ssac::BoundaryTerms boundary;
  boundary.delta_sq_at_half = nearest(delta_med, T / 2);
  boundary.value_gap =
      std::max(0.0, nearest(value_med, T / 2) - nearest(value_med, T));

  const double alpha_T = ac.alpha_schedule.at(T);
  const double beta_T = config.run.freeze_actor ? alpha_T * 1e-12 : ac.beta_schedule.at(T);

  ssac::AnalysisReport report;
  report.config_hash = hash;
  report.constants = consts;
  report.primary = ssac::theorem_coefficients(consts, T, alpha_T, beta_T, boundary, true);
  report.variant = ssac::theorem_coefficients(consts, T, alpha_T, beta_T, boundary, false);
  try {
    report.bound = ssac::small_gain_bound(report.primary);
    report.bound_finite = true;
  } catch (const ssac::GainTooLarge&) {
    report.bound = std::numeric_limits<double>::infinity();
    report.bound_finite = false;
  }
  report.constraints = ssac::step_constraint_check(consts, ac.alpha_schedule.at(T / 2),
                                                  ac.beta_schedule.at(T / 2));
  report.tail_grad_sq = ssac::tail_average(grad_med, T);
  report.tail_delta_sq = ssac::tail_average(delta_med, T);

  const std::int64_t t_min = 128;
  try {
    report.grad_fit = ssac::fit_power_law(
        ssac::tail_average_series(grad_med, t_min, T), false);
    report.has_grad_fit = true;
  } catch (const ssac::InsufficientData&) {
  } catch (const ssac::WindowIncomplete&) {
  }
  try {
    report.delta_fit = ssac::fit_power_law(
        ssac::tail_average_series(delta_med, t_min, T), consts.delta > 1e-12);
    report.has_delta_fit = true;
  } catch (const ssac::InsufficientData&) {
  } catch (const ssac::WindowIncomplete&) {
  }

  fs::create_directories(config.output_dir);
  ssac::write_analysis_report(
      (fs::path(config.output_dir) / "analysis.json").string(), report);

  std::vector<ssac::PlotRow> plot;
  std::ostringstream grad_dat, delta_dat;
  for (std::int64_t t = t_min; t <= T; t *= 2) {
    ssac::PlotRow row;
    row.t = t;
    try {
      row.tail_grad_sq = ssac::tail_average(grad_med, t);
      row.tail_delta_sq = ssac::tail_average(delta_med, t);
    } catch (const ssac::WindowIncomplete&) {
      continue;
    }
    ssac::BoundaryTerms bt;
    bt.delta_sq_at_half = nearest(delta_med, t / 2);
    bt.value_gap = std::max(0.0, nearest(value_med, t / 2) - nearest(value_med, t));
    try {
      row.predicted_bound = ssac::small_gain_bound(ssac::theorem_coefficients(
          consts, t, ac.alpha_schedule.at(t),
          config.run.freeze_actor ? ac.alpha_schedule.at(t) * 1e-12
                                  : ac.beta_schedule.at(t),
          bt, true));
    } catch (const ssac::GainTooLarge&) {
      row.predicted_bound = std::numeric_limits<double>::infinity();
    }
    plot.push_back(row);
    grad_dat << t << ' ' << row.tail_grad_sq << "\n";
    delta_dat << t << ' ' << row.tail_delta_sq << "\n";
  }
  ssac::write_plot_csv((fs::path(config.output_dir) / "plot.csv").string(), plot);
  std::ofstream((fs::path(config.output_dir) / "grad.dat").string()) << grad_dat.str();
  std::ofstream((fs::path(config.output_dir) / "delta.dat").string()) << delta_dat.str();

  std::cout << "analysis written to " << config.output_dir << " (bound="
            << report.bound << ", tail delta_sq=" << report.tail_delta_sq << ")\n";
  return kExitOk;
}

int cmd_analyze(const CommonOpts& opts, std::vector<std::string> log_paths) {
  try {
    const ssac::ExperimentConfig config = load_with_overrides(opts);
    if (log_paths.empty()) {
      for (const auto& entry : fs::directory_iterator(config.output_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("log_seed", 0) == 0 && entry.path().extension() == ".csv")
          log_paths.push_back(entry.path().string());
      }
      std::sort(log_paths.begin(), log_paths.end());
    }
    if (log_paths.empty())
      throw ssac::InvalidModel("no logs given and none found in " + config.output_dir);
    std::vector<ssac::IterateLog> logs;
    logs.reserve(log_paths.size());
    for (const auto& path : log_paths) logs.push_back(ssac::read_log_csv(path));
    return analyze_logs(config, logs);
  } catch (const ssac::InvalidModel& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_sweep(const CommonOpts& opts) {
  // Seed sweep: run every seed, then analyze the pooled logs.
  const int rc = cmd_run(opts);
  if (rc != kExitOk) return rc;
  return cmd_analyze(opts, {});
}

int cmd_gen_mdp(const std::string& out_path, int n_states, int n_actions, double gamma,
                std::uint64_t seed, double cost_scale) {
  try {
    const ssac::FiniteMdp mdp =
        ssac::random_mdp(n_states, n_actions, gamma, seed, cost_scale);
    ssac::save_mdp(mdp, out_path);
  } catch (const ssac::InvalidModel& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  std::cout << "mdp written to " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"single-sample single-timescale actor-critic experiment driver"};
  app.require_subcommand(1);

  CommonOpts oracle_opts, run_opts, analyze_opts, sweep_opts;
  std::vector<std::string> analyze_logs_arg;

  CLI::App* oracle = app.add_subcommand("oracle", "assumption and per-theta reports");
  add_common(oracle, oracle_opts);

  CLI::App* run = app.add_subcommand("run", "execute the coupled recursion per seed");
  add_common(run, run_opts);

  CLI::App* analyze =
      app.add_subcommand("analyze", "constants, bound, rate fits from logs");
  add_common(analyze, analyze_opts);
  analyze->add_option("logs", analyze_logs_arg, "log CSV paths (default: output dir)");

  CLI::App* sweep = app.add_subcommand("sweep", "run all seeds, then analyze");
  add_common(sweep, sweep_opts);

  std::string gen_out = "mdp.json";
  int gen_states = 3, gen_actions = 2;
  double gen_gamma = 0.5, gen_cost_scale = 1.0;
  std::uint64_t gen_seed = 1;
  CLI::App* gen = app.add_subcommand("gen-mdp", "write a random MDP file");
  gen->add_option("--out", gen_out, "output path");
  gen->add_option("--states", gen_states, "number of states");
  gen->add_option("--actions", gen_actions, "number of actions");
  gen->add_option("--gamma", gen_gamma, "discount factor");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--cost-scale", gen_cost_scale, "cost scale");

  CLI11_PARSE(app, argc, argv);

  if (oracle->parsed()) return cmd_oracle(oracle_opts);
  if (run->parsed()) return cmd_run(run_opts);
  if (analyze->parsed()) return cmd_analyze(analyze_opts, analyze_logs_arg);
  if (sweep->parsed()) return cmd_sweep(sweep_opts);
  if (gen->parsed())
    return cmd_gen_mdp(gen_out, gen_states, gen_actions, gen_gamma, gen_seed,
                       gen_cost_scale);
  return kExitOk;
}
