#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ssac/actor_critic.hpp"
#include "ssac/analysis.hpp"
#include "ssac/critic_oracle.hpp"
#include "ssac/mdp.hpp"
#include "ssac/policy.hpp"

namespace ssac {

/// MDP source: either a JSON file or the seeded random generator.
struct MdpSpec {
  std::string file;  // non-empty: load from file, generator fields ignored
  int n_states = 3;
  int n_actions = 2;
  double gamma = 0.5;
  std::uint64_t seed = 1;
  double cost_scale = 1.0;
};

struct FeatureSpec {
  enum class Kind { kTabular, kFile, kRandom };
  Kind kind = Kind::kTabular;
  std::string path;          // kFile
  int rank = 1;              // kRandom: number of columns
  std::uint64_t seed = 1;    // kRandom
};

struct PolicySpec {
  double epsilon_floor = 0.05;
  std::string psi_file;  // empty: tabular indicator features
};

struct ThetaGridSpec {
  int count = 32;
  double box = 1.0;  // uniform draws from [-box, box]^d
  std::uint64_t seed = 7;
};

struct RunSpec {
  std::int64_t total_steps = 1000;
  double actor_scale = -1.0;   // < 0: derive from recommended_actor_scale
  double omega_radius = -1.0;  // < 0: derive from the analytic radius
  double alpha_scale = 1.0;
  std::int64_t diag_stride = 100;
  std::uint64_t seed = 0;
  std::string critic_mode = "exact";  // or "rollout"
  std::int64_t burn_in = 100;
  bool rescale_actor = true;
  bool freeze_actor = false;  // beta == 0: pure critic tracking
};

struct ExperimentConfig {
  MdpSpec mdp;
  FeatureSpec features;
  PolicySpec policy;
  RunSpec run;
  ThetaGridSpec theta_grid;
  std::string output_dir = "out";
  int n_seeds = 1;

  void validate() const;  // throws InvalidModel naming the first bad field
};

ExperimentConfig parse_config(const std::string& json_text);
std::string serialize_config(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

/// FNV-1a hash (hex) of the canonical serialized config; covers every
/// behavior-affecting field.
std::string config_hash(const ExperimentConfig& config);

FiniteMdp load_mdp(const std::string& path);
void save_mdp(const FiniteMdp& mdp, const std::string& path);

FeatureMatrix load_features(const std::string& path);
void save_features(const FeatureMatrix& features, const std::string& path);

/// Random unit-row feature map with `rank` independent columns.
FeatureMatrix random_features(int n_sa, int rank, std::uint64_t seed);

std::vector<Eigen::VectorXd> make_theta_grid(const ThetaGridSpec& spec, int dim);

/// Everything a run or oracle sweep needs, materialized from a config.
struct Instance {
  FiniteMdp mdp;
  SoftmaxPolicy policy_class;
  FeatureMatrix features;
  std::vector<Eigen::VectorXd> theta_grid;
};

Instance build_instance(const ExperimentConfig& config);

/// AcConfig for one seed, resolving "auto" actor scale / radius against the
/// instance. derived_seed = mix of run.seed and the seed index.
AcConfig build_ac_config(const ExperimentConfig& config, const Instance& instance,
                         int seed_index);

void write_log_csv(const std::string& path, const IterateLog& log);
IterateLog read_log_csv(const std::string& path);

void write_run_summary(const std::string& path, const IterateLog& log);

struct AssumptionReport {
  bool c_max_ok = false;
  double slem = 0.0;
  std::int64_t t_mix = 0;
  double k_score = 0.0;
  double k_prime = 0.0;
  double k_dprime = 0.0;
  bool features_ok = false;
  double delta_estimate = 0.0;
  double mu_estimate = 0.0;
  bool projection_ok = false;
  double omega_radius = 0.0;
};

AssumptionReport make_assumption_report(const Instance& instance, double omega_radius);
void write_assumption_report(const std::string& path, const AssumptionReport& report);
AssumptionReport read_assumption_report(const std::string& path);

/// Per-theta oracle CSV: index, margin, approximation error, ||omega_theta||,
/// second-largest eigenvalue modulus.
void write_oracle_csv(const std::string& path, const Instance& instance);

struct AnalysisReport {
  std::string config_hash;
  ConstantSet constants;
  GainCoefficients primary;       // scaled-error coefficients
  GainCoefficients variant;       // raw-error coefficients
  double bound = 0.0;             // small-gain bound, inf if 2ce >= 1
  bool bound_finite = false;
  StepConstraintReport constraints;
  bool has_grad_fit = false;
  RateFit grad_fit;
  bool has_delta_fit = false;
  RateFit delta_fit;
  double tail_grad_sq = 0.0;   // tail average at T
  double tail_delta_sq = 0.0;
};

void write_analysis_report(const std::string& path, const AnalysisReport& report);
AnalysisReport read_analysis_report(const std::string& path);

struct PlotRow {
  std::int64_t t = 0;
  double tail_grad_sq = 0.0;
  double tail_delta_sq = 0.0;
  double predicted_bound = 0.0;
};

void write_plot_csv(const std::string& path, const std::vector<PlotRow>& rows);

/// Median across logs of one diagnostic series; logs must share checkpoints.
std::vector<std::pair<std::int64_t, double>> median_series(
    const std::vector<IterateLog>& logs, LogSeries which);

}  // namespace ssac
