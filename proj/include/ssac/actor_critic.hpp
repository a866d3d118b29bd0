#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ssac/critic_oracle.hpp"
#include "ssac/gradient.hpp"
#include "ssac/mdp.hpp"
#include "ssac/policy.hpp"
#include "ssac/sampler.hpp"

namespace ssac {

struct Schedule {
  enum class Kind { kInvSqrt, kConstant };
  Kind kind = Kind::kInvSqrt;
  double scale = 1.0;

  double at(std::int64_t t) const {
    return kind == Kind::kInvSqrt ? scale / std::sqrt(static_cast<double>(t)) : scale;
  }
};

struct AcConfig {
  std::int64_t total_steps = 1000;
  double actor_scale = 0.01;   // c'
  double omega_radius = 1.0;   // R_Omega
  Schedule alpha_schedule{Schedule::Kind::kInvSqrt, 1.0};
  Schedule beta_schedule{Schedule::Kind::kInvSqrt, 0.01};  // scale tracks actor_scale
  std::int64_t diag_stride = 100;
  SamplerConfig sampler;
  Eigen::VectorXd theta_init;  // empty: zeros
  Eigen::VectorXd omega_init;  // empty: zeros

  void validate() const;
};

struct DiagRow {
  std::int64_t t = 0;
  double grad_sq = 0.0;   // ||grad V(theta_t)||^2, exact
  double delta_sq = 0.0;  // ||omega_t - omega_{theta_t}||^2, exact
  double value = 0.0;     // V(theta_t)
  double omega_norm = 0.0;
  double theta_norm = 0.0;
};

struct IterateLog {
  std::vector<DiagRow> rows;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::int64_t total_steps = 0;
  std::int64_t diag_stride = 0;
  std::int64_t oracle_samples = 0;
  std::int64_t mdp_transitions = 0;
  double empirical_l_omega = 0.0;  // max ratio over consecutive diagnostic points
  Eigen::VectorXd final_theta;
  Eigen::VectorXd final_omega;
};

/// Euclidean projection onto the ball of radius r.
Eigen::VectorXd project_ball(const Eigen::VectorXd& omega, double r);

struct ProjectionReport {
  bool ok = false;
  double margin = 0.0;         // r - max ||omega_theta|| over the grid
  double max_omega_norm = 0.0;
  double analytic_radius = 0.0;  // (2/mu) C_max sufficient radius
};

/// Checks that the ball of radius r contains every grid omega_theta in its
/// interior, and reports the analytic sufficient radius.
ProjectionReport validate_projection_radius(const FiniteMdp& mdp,
                                            const FeatureMatrix& features,
                                            const SoftmaxPolicy& policy_class,
                                            const std::vector<Eigen::VectorXd>& theta_grid,
                                            double r);

struct AcState {
  Eigen::VectorXd theta;
  Eigen::VectorXd omega;
  std::int64_t t = 1;
};

/// One coupled update: one actor sample, one critic sample.
AcState step(const AcState& state, const FiniteMdp& mdp,
             const SoftmaxPolicy& policy_class, const FeatureMatrix& features,
             const AcConfig& config, Sampler& sampler);

/// Full run of the coupled recursion with oracle diagnostics every
/// diag_stride steps (and at the final step).
IterateLog run(const FiniteMdp& mdp, const SoftmaxPolicy& policy_class,
               const FeatureMatrix& features, const AcConfig& config);

}  // namespace ssac
