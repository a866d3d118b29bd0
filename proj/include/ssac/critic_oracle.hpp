#pragma once

#include <utility>

#include <Eigen/Dense>

#include "ssac/errors.hpp"
#include "ssac/mdp.hpp"
#include "ssac/policy.hpp"

namespace ssac {

/// Critic feature matrix, one row phi(s,a) per state-action pair.
/// Rows have Euclidean norm <= 1; columns are linearly independent
/// (smallest singular value > 1e-8).
class FeatureMatrix {
 public:
  explicit FeatureMatrix(Eigen::MatrixXd phi);

  static FeatureMatrix tabular(int n_sa);

  const Eigen::MatrixXd& phi() const { return phi_; }
  int dim() const { return static_cast<int>(phi_.cols()); }
  Eigen::VectorXd row(int sa) const { return phi_.row(sa).transpose(); }

 private:
  Eigen::MatrixXd phi_;
};

/// Expected TD matrix/vector pair A_theta, b_theta.
struct TdPair {
  Eigen::MatrixXd a_matrix;
  Eigen::VectorXd b_vector;
};

/// A_theta = Phi^T D (gamma P_theta - I) Phi, b_theta = -Phi^T D c, with
/// D = diag(rho_theta) over state-action pairs.
TdPair expected_td_pair(const FiniteMdp& mdp, const SoftmaxPolicy& policy,
                        const FeatureMatrix& features);

/// Solves A_theta omega = b_theta; throws SingularA if cond(A) > 1e12.
Eigen::VectorXd td_fixed_point(const TdPair& td);

/// m_theta = -lambda_max((A + A^T)/2); negative values report an
/// exploration failure rather than throwing.
double exploration_margin(const TdPair& td);

struct InverseNormCheck {
  double inverse_norm;  // spectral norm of A^{-1}
  double bound;         // 1 / m_theta
};

/// ||A^{-1}|| against the margin bound; requires m_theta > 0.
InverseNormCheck inverse_norm_check(const TdPair& td);

/// delta_theta = sum_sa nu_theta(s,a) |Q*(s,a) - phi(s,a)^T omega_theta|.
double approximation_error(const FiniteMdp& mdp, const SoftmaxPolicy& policy,
                           const FeatureMatrix& features);

struct SplittingCheck {
  double lhs;  // (omega - omega_theta)^T A_theta (omega - omega_theta)
  double rhs;  // -(1-gamma)||Phi d||_D^2 - gamma ||Phi d||_Dir^2
  double gap;  // |lhs - rhs|
};

/// Both sides of the gradient-splitting identity at a given omega.
SplittingCheck splitting_check(const FiniteMdp& mdp, const SoftmaxPolicy& policy,
                               const FeatureMatrix& features, const Eigen::VectorXd& omega);

/// Verifies the one-step critic contraction
///   ||omega - omega_theta - alpha (-A omega + b)|| <= (1 - alpha mu/4) ||omega - omega_theta||
/// with mu = 2 m_theta. Requires alpha <= mu / (2 L_nabla^2), L_nabla = 2.
bool contraction_check(const TdPair& td, const Eigen::VectorXd& omega,
                       const Eigen::VectorXd& omega_theta, double alpha);

}  // namespace ssac
