#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ssac/errors.hpp"

namespace ssac {

/// Softmax policy with a uniform exploration floor:
///   pi_theta(a|s) = (1 - eps) softmax_a(theta^T psi(s,.)) + eps / n_actions.
/// Policy features psi(s,a) are rows of an (n_sa x d_theta) matrix; the
/// default is the tabular indicator map (psi = identity).
class SoftmaxPolicy {
 public:
  SoftmaxPolicy(int n_states, int n_actions, Eigen::MatrixXd psi,
                Eigen::VectorXd theta, double epsilon_floor);

  /// Tabular-feature policy with theta = 0.
  static SoftmaxPolicy tabular(int n_states, int n_actions, double epsilon_floor);

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  int dim() const { return static_cast<int>(theta_.size()); }
  const Eigen::VectorXd& theta() const { return theta_; }
  const Eigen::MatrixXd& psi() const { return psi_; }
  double epsilon_floor() const { return epsilon_floor_; }

  /// Value with the same feature map and floor but new parameters.
  SoftmaxPolicy with_theta(Eigen::VectorXd theta) const;

  Eigen::VectorXd action_probs(int s) const;

  /// All rows at once, (n_states x n_actions).
  Eigen::MatrixXd all_action_probs() const;

  /// Exact gradient of log pi_theta(a|s), floor included.
  Eigen::VectorXd score(int s, int a) const;

 private:
  int n_states_;
  int n_actions_;
  Eigen::MatrixXd psi_;
  Eigen::VectorXd theta_;
  double epsilon_floor_;
};

struct SmoothnessReport {
  double k_score = 0.0;       // empirical max of ||grad log pi||
  double k_prime = 0.0;       // empirical max of ||grad pi||
  double k_dprime = 0.0;      // empirical max spectral norm of hess pi (probed)
  double k_analytic = 0.0;    // 2 max ||psi||, valid bound when eps_floor = 0
  bool has_analytic = false;
};

/// Empirical smoothness constants over a set of theta samples. The Hessian
/// is probed by central differences of grad pi with step 1e-4.
SmoothnessReport smoothness_report(const SoftmaxPolicy& policy,
                                   const std::vector<Eigen::VectorXd>& theta_samples);

}  // namespace ssac
