#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "ssac/critic_oracle.hpp"
#include "ssac/mdp.hpp"
#include "ssac/policy.hpp"
#include "ssac/rng.hpp"

namespace ssac {

enum class CriticMode { kExact, kRollout };

struct SamplerConfig {
  std::uint64_t seed = 0;
  CriticMode critic_mode = CriticMode::kExact;
  std::int64_t burn_in = 100;      // rollout mode only
  std::int64_t horizon_cap = 0;    // 0: choose so geometric tail mass <= 1e-9
  bool rescale_actor = true;       // multiply the sampled actor direction by 1/(1-gamma)
};

struct ActorTuple {
  int s = 0;
  int a = 0;
  std::int64_t horizon = 0;  // drawn geometric length
};

struct CriticTuple {
  int s1 = 0, a1 = 0;  // (s', a'), stationary in exact mode
  int s2 = 0, a2 = 0;  // (s'', a''), one MDP step ahead
  double cost = 0.0;   // c(s', a')
};

/// Owns two independent RNG streams (actor, critic) derived from the master
/// seed, plus sample counters. Single-threaded; one instance per run.
class Sampler {
 public:
  Sampler(const FiniteMdp& mdp, const SamplerConfig& config);

  ActorTuple sample_actor_tuple(const SoftmaxPolicy& policy);
  CriticTuple sample_critic_tuple(const SoftmaxPolicy& policy);

  const SamplerConfig& config() const { return config_; }
  std::int64_t horizon_cap() const { return horizon_cap_; }
  std::int64_t oracle_samples() const { return oracle_samples_; }
  std::int64_t mdp_transitions() const { return mdp_transitions_; }

 private:
  const FiniteMdp& mdp_;
  SamplerConfig config_;
  std::int64_t horizon_cap_;
  Rng actor_rng_;
  Rng critic_rng_;
  Eigen::VectorXd rho_warm_;  // warm start for the per-theta stationary solve
  std::int64_t oracle_samples_ = 0;
  std::int64_t mdp_transitions_ = 0;
};

struct NoiseStatistics {
  Eigen::VectorXd mean_a, mean_c;  // empirical noise means (should be ~0)
  Eigen::VectorXd se_a, se_c;      // componentwise standard errors of the means
  double sigma_a2 = 0.0;           // mean ||w_a||^2
  double sigma_c2 = 0.0;           // mean ||w_c||^2
  double sigma_a4 = 0.0;           // sqrt(mean ||w_a||^4), the sigma_a' estimate
  double max_cross_corr = 0.0;     // max |corr(w_a_i, w_c_j)| over components
};

/// Empirical moments of the actor/critic noises at frozen (theta, omega).
/// w_a is the (rescaled) sampled actor direction minus g(theta, omega);
/// w_c is the sampled TD direction minus (-A_theta omega + b_theta).
NoiseStatistics noise_statistics(const FiniteMdp& mdp, const SoftmaxPolicy& policy,
                                 const FeatureMatrix& features,
                                 const Eigen::VectorXd& omega, std::int64_t n_draws,
                                 Sampler& sampler);

}  // namespace ssac
