#pragma once

#include <Eigen/Dense>

#include "ssac/critic_oracle.hpp"
#include "ssac/mdp.hpp"
#include "ssac/policy.hpp"

namespace ssac {

/// Discounted-sum policy-gradient functional
///   g_hat(theta, Q) = 1/(1-gamma) sum_{s,a} nu_theta(s,a) Q(s,a) score(theta,s,a).
/// With Q = Q*_theta this is the exact gradient of the value objective.
Eigen::VectorXd g_hat(const FiniteMdp& mdp, const SoftmaxPolicy& policy,
                      const Eigen::VectorXd& q);

/// g(theta, omega) = g_hat(theta, Phi omega).
Eigen::VectorXd g_of_omega(const FiniteMdp& mdp, const SoftmaxPolicy& policy,
                           const FeatureMatrix& features, const Eigen::VectorXd& omega);

/// Exact gradient of V at the policy's parameters.
Eigen::VectorXd exact_gradient(const FiniteMdp& mdp, const SoftmaxPolicy& policy);

}  // namespace ssac
