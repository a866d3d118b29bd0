#include "ssac/critic_oracle.hpp"

#include <cmath>

namespace ssac {

FeatureMatrix::FeatureMatrix(Eigen::MatrixXd phi) : phi_(std::move(phi)) {
  if (phi_.rows() == 0 || phi_.cols() == 0)
    throw InvalidModel("feature matrix must be nonempty");
  for (Eigen::Index r = 0; r < phi_.rows(); ++r)
    if (phi_.row(r).norm() > 1.0 + 1e-12)
      throw InvalidModel("feature row " + std::to_string(r) + " exceeds unit norm");
  const auto sv = phi_.jacobiSvd().singularValues();
  if (sv[sv.size() - 1] <= 1e-8)
    throw InvalidModel("feature columns are linearly dependent");
}

FeatureMatrix FeatureMatrix::tabular(int n_sa) {
  return FeatureMatrix(Eigen::MatrixXd::Identity(n_sa, n_sa));
}

TdPair expected_td_pair(const FiniteMdp& mdp, const SoftmaxPolicy& policy,
                        const FeatureMatrix& features) {
  if (features.phi().rows() != mdp.n_sa())
    throw DimensionMismatch("feature rows do not match state-action count");
  const Eigen::MatrixXd probs = policy.all_action_probs();
  const Eigen::MatrixXd p_theta = sa_transition_matrix(mdp, probs);
  const SaDistribution rho = stationary_distribution(p_theta);
  const Eigen::MatrixXd weighted = rho.probs().asDiagonal() *
      (mdp.gamma() * p_theta - Eigen::MatrixXd::Identity(mdp.n_sa(), mdp.n_sa())) *
      features.phi();
  TdPair td;
  td.a_matrix = features.phi().transpose() * weighted;
  td.b_vector = -features.phi().transpose() * (rho.probs().asDiagonal() * mdp.cost());
  return td;
}

Eigen::VectorXd td_fixed_point(const TdPair& td) {
  const auto svd = td.a_matrix.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv[sv.size() - 1] <= 0.0 || sv[0] / sv[sv.size() - 1] > 1e12)
    throw SingularA("A_theta condition number exceeds 1e12");
  Eigen::VectorXd omega = svd.solve(td.b_vector);
  const double residual = (td.a_matrix * omega - td.b_vector).norm();
  if (residual > 1e-9)
    throw SingularA("TD fixed-point residual " + std::to_string(residual));
  return omega;
}

double exploration_margin(const TdPair& td) {
  const Eigen::MatrixXd sym = 0.5 * (td.a_matrix + td.a_matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  return -es.eigenvalues().maxCoeff();
}

InverseNormCheck inverse_norm_check(const TdPair& td) {
  const double margin = exploration_margin(td);
  if (margin <= 0.0) throw SingularA("exploration margin is not positive");
  const auto sv = td.a_matrix.jacobiSvd().singularValues();
  if (sv[sv.size() - 1] <= 0.0) throw SingularA("A_theta is singular");
  return InverseNormCheck{1.0 / sv[sv.size() - 1], 1.0 / margin};
}

double approximation_error(const FiniteMdp& mdp, const SoftmaxPolicy& policy,
                           const FeatureMatrix& features) {
  const TdPair td = expected_td_pair(mdp, policy, features);
  const Eigen::VectorXd omega = td_fixed_point(td);
  const Eigen::MatrixXd probs = policy.all_action_probs();
  const SaDistribution nu = discounted_visitation(mdp, probs);
  const Eigen::VectorXd q = q_values(mdp, probs);
  const Eigen::VectorXd residual = (q - features.phi() * omega).cwiseAbs();
  return nu.probs().dot(residual);
}

SplittingCheck splitting_check(const FiniteMdp& mdp, const SoftmaxPolicy& policy,
                               const FeatureMatrix& features,
                               const Eigen::VectorXd& omega) {
  const TdPair td = expected_td_pair(mdp, policy, features);
  const Eigen::VectorXd omega_theta = td_fixed_point(td);
  const Eigen::VectorXd diff = omega - omega_theta;
  const Eigen::VectorXd x = features.phi() * diff;

  const Eigen::MatrixXd probs = policy.all_action_probs();
  const Eigen::MatrixXd p_theta = sa_transition_matrix(mdp, probs);
  const SaDistribution rho = stationary_distribution(p_theta);

  double d_norm_sq = 0.0;
  for (int sa = 0; sa < mdp.n_sa(); ++sa) d_norm_sq += rho[sa] * x[sa] * x[sa];

  // Dirichlet seminorm with the canonical 1/2; without it the identity
  // picks up a spurious gamma (x^T D P x - x^T D x) term.
  double dir_sq = 0.0;
  for (int sa = 0; sa < mdp.n_sa(); ++sa)
    for (int sa2 = 0; sa2 < mdp.n_sa(); ++sa2) {
      const double w = rho[sa] * p_theta(sa, sa2);
      const double d = x[sa] - x[sa2];
      dir_sq += 0.5 * w * d * d;
    }

  SplittingCheck out;
  out.lhs = diff.dot(td.a_matrix * diff);
  out.rhs = -(1.0 - mdp.gamma()) * d_norm_sq - mdp.gamma() * dir_sq;
  out.gap = std::abs(out.lhs - out.rhs);
  return out;
}

bool contraction_check(const TdPair& td, const Eigen::VectorXd& omega,
                       const Eigen::VectorXd& omega_theta, double alpha) {
  const double margin = exploration_margin(td);
  const double mu = 2.0 * margin;
  const double l_nabla = 2.0;
  if (alpha > mu / (2.0 * l_nabla * l_nabla))
    throw StepTooLarge("alpha exceeds mu / (2 L_nabla^2)");
  const Eigen::VectorXd td_direction = -td.a_matrix * omega + td.b_vector;
  const double lhs = (omega - omega_theta - alpha * td_direction).norm();
  const double rhs = (1.0 - alpha * mu / 4.0) * (omega - omega_theta).norm();
  return lhs <= rhs + 1e-12;
}

}  // namespace ssac
