#include "ssac/gradient.hpp"

namespace ssac {

Eigen::VectorXd g_hat(const FiniteMdp& mdp, const SoftmaxPolicy& policy,
                      const Eigen::VectorXd& q) {
  if (q.size() != mdp.n_sa())
    throw DimensionMismatch("Q vector length does not match state-action count");
  const Eigen::MatrixXd probs = policy.all_action_probs();
  const SaDistribution nu = discounted_visitation(mdp, probs);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(policy.dim());
  const double scale = 1.0 / (1.0 - mdp.gamma());
  for (int s = 0; s < mdp.n_states(); ++s)
    for (int a = 0; a < mdp.n_actions(); ++a) {
      const int sa = mdp.sa_index(s, a);
      if (nu[sa] == 0.0) continue;
      g += scale * nu[sa] * q[sa] * policy.score(s, a);
    }
  return g;
}

Eigen::VectorXd g_of_omega(const FiniteMdp& mdp, const SoftmaxPolicy& policy,
                           const FeatureMatrix& features, const Eigen::VectorXd& omega) {
  return g_hat(mdp, policy, features.phi() * omega);
}

Eigen::VectorXd exact_gradient(const FiniteMdp& mdp, const SoftmaxPolicy& policy) {
  return g_hat(mdp, policy, q_values(mdp, policy.all_action_probs()));
}

}  // namespace ssac
