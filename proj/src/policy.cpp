#include "ssac/policy.hpp"

#include <cmath>

namespace ssac {

SoftmaxPolicy::SoftmaxPolicy(int n_states, int n_actions, Eigen::MatrixXd psi,
                             Eigen::VectorXd theta, double epsilon_floor)
    : n_states_(n_states),
      n_actions_(n_actions),
      psi_(std::move(psi)),
      theta_(std::move(theta)),
      epsilon_floor_(epsilon_floor) {
  if (psi_.rows() != static_cast<Eigen::Index>(n_states_) * n_actions_)
    throw DimensionMismatch("psi must have one row per state-action pair");
  if (psi_.cols() != theta_.size())
    throw DimensionMismatch("theta dimension does not match psi columns");
  if (epsilon_floor_ < 0.0 || epsilon_floor_ >= 1.0)
    throw InvalidModel("epsilon_floor must lie in [0,1)");
}

SoftmaxPolicy SoftmaxPolicy::tabular(int n_states, int n_actions, double epsilon_floor) {
  const int n_sa = n_states * n_actions;
  return SoftmaxPolicy(n_states, n_actions, Eigen::MatrixXd::Identity(n_sa, n_sa),
                       Eigen::VectorXd::Zero(n_sa), epsilon_floor);
}

SoftmaxPolicy SoftmaxPolicy::with_theta(Eigen::VectorXd theta) const {
  return SoftmaxPolicy(n_states_, n_actions_, psi_, std::move(theta), epsilon_floor_);
}

Eigen::VectorXd SoftmaxPolicy::action_probs(int s) const {
  Eigen::VectorXd logits(n_actions_);
  for (int a = 0; a < n_actions_; ++a)
    logits[a] = psi_.row(static_cast<Eigen::Index>(s) * n_actions_ + a).dot(theta_);
  const double shift = logits.maxCoeff();
  Eigen::VectorXd p = (logits.array() - shift).exp();
  p /= p.sum();
  return (1.0 - epsilon_floor_) * p +
         Eigen::VectorXd::Constant(n_actions_, epsilon_floor_ / n_actions_);
}

Eigen::MatrixXd SoftmaxPolicy::all_action_probs() const {
  Eigen::MatrixXd probs(n_states_, n_actions_);
  for (int s = 0; s < n_states_; ++s) probs.row(s) = action_probs(s).transpose();
  return probs;
}

Eigen::VectorXd SoftmaxPolicy::score(int s, int a) const {
  Eigen::VectorXd logits(n_actions_);
  for (int b = 0; b < n_actions_; ++b)
    logits[b] = psi_.row(static_cast<Eigen::Index>(s) * n_actions_ + b).dot(theta_);
  const double shift = logits.maxCoeff();
  Eigen::VectorXd p = (logits.array() - shift).exp();
  p /= p.sum();

  // grad p_a = p_a (psi_a - sum_b p_b psi_b); pi = (1-eps) p_a + eps/A.
  Eigen::VectorXd mean_psi = Eigen::VectorXd::Zero(dim());
  for (int b = 0; b < n_actions_; ++b)
    mean_psi += p[b] * psi_.row(static_cast<Eigen::Index>(s) * n_actions_ + b).transpose();
  const Eigen::VectorXd grad_p =
      p[a] * (psi_.row(static_cast<Eigen::Index>(s) * n_actions_ + a).transpose() - mean_psi);

  const double pi = (1.0 - epsilon_floor_) * p[a] + epsilon_floor_ / n_actions_;
  if (pi <= 0.0)
    throw ZeroProbabilityAction("pi(a|s) = 0 at s=" + std::to_string(s) +
                                " a=" + std::to_string(a));
  return (1.0 - epsilon_floor_) * grad_p / pi;
}

namespace {

Eigen::VectorXd grad_pi(const SoftmaxPolicy& policy, const Eigen::VectorXd& theta,
                        int s, int a) {
  const SoftmaxPolicy p = policy.with_theta(theta);
  return p.action_probs(s)[a] <= 0.0
             ? Eigen::VectorXd::Zero(policy.dim())
             : Eigen::VectorXd(p.action_probs(s)[a] * p.score(s, a));
}

}  // namespace

SmoothnessReport smoothness_report(const SoftmaxPolicy& policy,
                                   const std::vector<Eigen::VectorXd>& theta_samples) {
  if (theta_samples.empty())
    throw InsufficientData("smoothness_report needs at least one theta sample");
  SmoothnessReport rep;
  const int d = policy.dim();
  const double h = 1e-4;
  for (const auto& theta : theta_samples) {
    const SoftmaxPolicy p = policy.with_theta(theta);
    for (int s = 0; s < policy.n_states(); ++s) {
      for (int a = 0; a < policy.n_actions(); ++a) {
        rep.k_score = std::max(rep.k_score, p.score(s, a).norm());
        rep.k_prime = std::max(rep.k_prime, grad_pi(policy, theta, s, a).norm());
        if (d == 0) continue;
        Eigen::MatrixXd hess(d, d);
        for (int i = 0; i < d; ++i) {
          Eigen::VectorXd tp = theta, tm = theta;
          tp[i] += h;
          tm[i] -= h;
          hess.col(i) = (grad_pi(policy, tp, s, a) - grad_pi(policy, tm, s, a)) / (2.0 * h);
        }
        hess = 0.5 * (hess + hess.transpose()).eval();
        rep.k_dprime = std::max(
            rep.k_dprime, hess.jacobiSvd().singularValues().size() > 0
                              ? hess.jacobiSvd().singularValues()[0]
                              : 0.0);
      }
    }
  }
  if (policy.epsilon_floor() == 0.0) {
    rep.has_analytic = true;
    rep.k_analytic = 0.0;
    for (Eigen::Index r = 0; r < policy.psi().rows(); ++r)
      rep.k_analytic = std::max(rep.k_analytic, 2.0 * policy.psi().row(r).norm());
  }
  return rep;
}

}  // namespace ssac
