#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "ssac/errors.hpp"
#include "ssac/rng.hpp"

namespace ssac {

/// Finite MDP with deterministic per-(s,a) costs. Transition rows are
/// indexed by the flat state-action pair sa = s * n_actions + a.
class FiniteMdp {
 public:
  FiniteMdp(int n_states, int n_actions, Eigen::MatrixXd transition,
            Eigen::VectorXd cost, double c_max, double gamma, Eigen::VectorXd eta);

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  int n_sa() const { return n_states_ * n_actions_; }
  int sa_index(int s, int a) const { return s * n_actions_ + a; }

  /// (n_sa x n_states) matrix; row (s,a) is P(.|s,a).
  const Eigen::MatrixXd& transition() const { return transition_; }
  const Eigen::VectorXd& cost() const { return cost_; }
  double c_max() const { return c_max_; }
  double gamma() const { return gamma_; }
  const Eigen::VectorXd& eta() const { return eta_; }

 private:
  int n_states_;
  int n_actions_;
  Eigen::MatrixXd transition_;
  Eigen::VectorXd cost_;
  double c_max_;
  double gamma_;
  Eigen::VectorXd eta_;
};

/// Distribution over state-action pairs (nonnegative, sums to 1 within 1e-10).
class SaDistribution {
 public:
  explicit SaDistribution(Eigen::VectorXd probs);
  const Eigen::VectorXd& probs() const { return probs_; }
  double operator[](Eigen::Index i) const { return probs_[i]; }
  Eigen::Index size() const { return probs_.size(); }

 private:
  Eigen::VectorXd probs_;
};

/// State-action transition matrix P_theta[(s,a),(s',a')] = P(s'|s,a) pi(a'|s').
/// policy_probs is (n_states x n_actions), one action distribution per row.
Eigen::MatrixXd sa_transition_matrix(const FiniteMdp& mdp,
                                     const Eigen::MatrixXd& policy_probs);

/// State-level transition matrix P_theta(s'|s) = sum_a pi(a|s) P(s'|s,a).
Eigen::MatrixXd state_transition_matrix(const FiniteMdp& mdp,
                                        const Eigen::MatrixXd& policy_probs);

/// Exact Q-values: solves (I - gamma P_theta) Q = c.
Eigen::VectorXd q_values(const FiniteMdp& mdp, const Eigen::MatrixXd& policy_probs);

/// J(s) = sum_a pi(a|s) Q(s,a).
Eigen::VectorXd state_values(const FiniteMdp& mdp, const Eigen::MatrixXd& policy_probs);

/// V = eta^T J.
double value_objective(const FiniteMdp& mdp, const Eigen::MatrixXd& policy_probs);

/// Stationary distribution of a row-stochastic SA matrix. Eigen-solve with a
/// power-iteration polish; throws NonUniqueStationary if eigenvalue 1 has
/// numerical multiplicity > 1 (tolerance 1e-8).
SaDistribution stationary_distribution(const Eigen::MatrixXd& p_theta);

/// Warm-started power iteration toward the stationary distribution; cheap
/// enough for per-step use when theta drifts slowly. No uniqueness check.
Eigen::VectorXd stationary_power_iteration(const Eigen::MatrixXd& p_theta,
                                           const Eigen::VectorXd& warm_start,
                                           double tol = 1e-13,
                                           int max_iters = 200000);

/// Discounted state-action visitation nu_theta from eta, via the resolvent
/// d = (1-gamma)(I - gamma P_state^T)^{-1} eta, nu(s,a) = d(s) pi(a|s).
SaDistribution discounted_visitation(const FiniteMdp& mdp,
                                     const Eigen::MatrixXd& policy_probs);

struct MixingDiagnostics {
  double slem = 0.0;     // second-largest eigenvalue modulus
  std::int64_t t_mix = 0;  // smallest t with worst-case ||rho_t - rho||_1 <= 0.01
};

/// Spectral-gap and mixing-time report for an SA transition matrix.
/// Iteration over point-mass starts, capped at 1e5 steps.
MixingDiagnostics mixing_diagnostics(const Eigen::MatrixXd& p_theta);

/// Random MDP family: Dirichlet(1,...,1) transition rows, costs uniform in
/// [-1,1] (then scaled by cost_scale), uniform eta.
FiniteMdp random_mdp(int n_states, int n_actions, double gamma, std::uint64_t seed,
                     double cost_scale = 1.0);

}  // namespace ssac
