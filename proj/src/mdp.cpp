#include "ssac/mdp.hpp"

#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

namespace ssac {

namespace {

void check_distribution(const Eigen::VectorXd& v, double tol, const std::string& name) {
  if ((v.array() < -1e-15).any())
    throw InvalidModel(name + " has negative entries");
  if (std::abs(v.sum() - 1.0) > tol)
    throw InvalidModel(name + " does not sum to 1");
}

}  // namespace

FiniteMdp::FiniteMdp(int n_states, int n_actions, Eigen::MatrixXd transition,
                     Eigen::VectorXd cost, double c_max, double gamma,
                     Eigen::VectorXd eta)
    : n_states_(n_states),
      n_actions_(n_actions),
      transition_(std::move(transition)),
      cost_(std::move(cost)),
      c_max_(c_max),
      gamma_(gamma),
      eta_(std::move(eta)) {
  if (n_states_ <= 0 || n_actions_ <= 0) throw InvalidModel("state/action counts must be positive");
  if (n_sa() > 2000) throw InvalidModel("instance exceeds the n_states*n_actions <= 2000 cap");
  if (transition_.rows() != n_sa() || transition_.cols() != n_states_)
    throw DimensionMismatch("transition tensor shape mismatch");
  if (cost_.size() != n_sa()) throw DimensionMismatch("cost table shape mismatch");
  if (eta_.size() != n_states_) throw DimensionMismatch("eta shape mismatch");
  if (!(gamma_ > 0.0 && gamma_ < 1.0)) throw InvalidModel("gamma must lie in (0,1)");
  if (!(c_max_ > 0.0)) throw InvalidModel("c_max must be positive");
  for (int i = 0; i < n_sa(); ++i) {
    Eigen::VectorXd row = transition_.row(i);
    check_distribution(row, 1e-12, "transition row " + std::to_string(i));
    if (std::abs(cost_[i]) > c_max_ + 1e-15)
      throw InvalidModel("cost exceeds c_max at pair " + std::to_string(i));
  }
  check_distribution(eta_, 1e-12, "eta");
}

SaDistribution::SaDistribution(Eigen::VectorXd probs) : probs_(std::move(probs)) {
  check_distribution(probs_, 1e-10, "state-action distribution");
}

Eigen::MatrixXd sa_transition_matrix(const FiniteMdp& mdp,
                                     const Eigen::MatrixXd& policy_probs) {
  if (policy_probs.rows() != mdp.n_states() || policy_probs.cols() != mdp.n_actions())
    throw DimensionMismatch("policy_probs shape does not match mdp");
  const int n = mdp.n_sa();
  Eigen::MatrixXd p(n, n);
  for (int s = 0; s < mdp.n_states(); ++s)
    for (int a = 0; a < mdp.n_actions(); ++a) {
      const int row = mdp.sa_index(s, a);
      for (int s2 = 0; s2 < mdp.n_states(); ++s2)
        for (int a2 = 0; a2 < mdp.n_actions(); ++a2)
          p(row, mdp.sa_index(s2, a2)) = mdp.transition()(row, s2) * policy_probs(s2, a2);
    }
  return p;
}

Eigen::MatrixXd state_transition_matrix(const FiniteMdp& mdp,
                                        const Eigen::MatrixXd& policy_probs) {
  if (policy_probs.rows() != mdp.n_states() || policy_probs.cols() != mdp.n_actions())
    throw DimensionMismatch("policy_probs shape does not match mdp");
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(mdp.n_states(), mdp.n_states());
  for (int s = 0; s < mdp.n_states(); ++s)
    for (int a = 0; a < mdp.n_actions(); ++a)
      p.row(s) += policy_probs(s, a) * mdp.transition().row(mdp.sa_index(s, a));
  return p;
}

Eigen::VectorXd q_values(const FiniteMdp& mdp, const Eigen::MatrixXd& policy_probs) {
  const Eigen::MatrixXd p = sa_transition_matrix(mdp, policy_probs);
  const int n = mdp.n_sa();
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n, n) - mdp.gamma() * p;
  Eigen::VectorXd q = lhs.partialPivLu().solve(mdp.cost());
  const double residual = (q - mdp.cost() - mdp.gamma() * p * q).lpNorm<Eigen::Infinity>();
  if (residual > 1e-9)
    throw InvalidModel("Bellman solve degenerated, residual " + std::to_string(residual));
  return q;
}

Eigen::VectorXd state_values(const FiniteMdp& mdp, const Eigen::MatrixXd& policy_probs) {
  const Eigen::VectorXd q = q_values(mdp, policy_probs);
  Eigen::VectorXd j = Eigen::VectorXd::Zero(mdp.n_states());
  for (int s = 0; s < mdp.n_states(); ++s)
    for (int a = 0; a < mdp.n_actions(); ++a)
      j[s] += policy_probs(s, a) * q[mdp.sa_index(s, a)];
  return j;
}

double value_objective(const FiniteMdp& mdp, const Eigen::MatrixXd& policy_probs) {
  return mdp.eta().dot(state_values(mdp, policy_probs));
}

SaDistribution stationary_distribution(const Eigen::MatrixXd& p_theta) {
  const Eigen::Index n = p_theta.rows();
  Eigen::EigenSolver<Eigen::MatrixXd> es(p_theta.transpose());
  int at_one = 0;
  Eigen::Index best = 0;
  double best_gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double gap = std::abs(es.eigenvalues()[i] - std::complex<double>(1.0, 0.0));
    if (gap < 1e-8) ++at_one;
    if (gap < best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  if (at_one > 1)
    throw NonUniqueStationary("eigenvalue 1 has numerical multiplicity " + std::to_string(at_one));

  Eigen::VectorXd rho = es.eigenvectors().col(best).real();
  if (rho.sum() < 0) rho = -rho;
  rho = rho.cwiseMax(0.0);
  rho /= rho.sum();
  // Polish the eigenvector to the 1e-10 fixed-point contract.
  rho = stationary_power_iteration(p_theta, rho, 1e-13);
  const double residual = (p_theta.transpose() * rho - rho).lpNorm<1>();
  if (residual > 1e-10)
    throw NonUniqueStationary("stationary fixed point residual " + std::to_string(residual));
  return SaDistribution(rho);
}

Eigen::VectorXd stationary_power_iteration(const Eigen::MatrixXd& p_theta,
                                           const Eigen::VectorXd& warm_start,
                                           double tol, int max_iters) {
  Eigen::VectorXd rho = warm_start.cwiseMax(0.0);
  rho /= rho.sum();
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd next = p_theta.transpose() * rho;
    next /= next.sum();
    const double diff = (next - rho).lpNorm<1>();
    rho = next;
    if (diff <= tol) break;
  }
  return rho;
}

SaDistribution discounted_visitation(const FiniteMdp& mdp,
                                     const Eigen::MatrixXd& policy_probs) {
  const Eigen::MatrixXd p_state = state_transition_matrix(mdp, policy_probs);
  const int ns = mdp.n_states();
  Eigen::MatrixXd lhs =
      Eigen::MatrixXd::Identity(ns, ns) - mdp.gamma() * p_state.transpose();
  Eigen::VectorXd d = (1.0 - mdp.gamma()) * lhs.partialPivLu().solve(mdp.eta());
  Eigen::VectorXd nu(mdp.n_sa());
  for (int s = 0; s < ns; ++s)
    for (int a = 0; a < mdp.n_actions(); ++a)
      nu[mdp.sa_index(s, a)] = d[s] * policy_probs(s, a);
  nu = nu.cwiseMax(0.0);
  nu /= nu.sum();
  return SaDistribution(nu);
}

MixingDiagnostics mixing_diagnostics(const Eigen::MatrixXd& p_theta) {
  const Eigen::Index n = p_theta.rows();
  MixingDiagnostics out;

  Eigen::EigenSolver<Eigen::MatrixXd> es(p_theta);
  double largest = 0.0, second = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = std::abs(es.eigenvalues()[i]);
    if (m > largest) {
      second = largest;
      largest = m;
    } else if (m > second) {
      second = m;
    }
  }
  out.slem = second;

  const SaDistribution rho = stationary_distribution(p_theta);  // may throw
  Eigen::MatrixXd dist = Eigen::MatrixXd::Identity(n, n);  // row i: point mass at i
  const std::int64_t cap = 100000;
  for (std::int64_t t = 1; t <= cap; ++t) {
    dist = dist * p_theta;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      worst = std::max(worst, (dist.row(i).transpose() - rho.probs()).lpNorm<1>());
    if (worst <= 0.01) {
      out.t_mix = t;
      return out;
    }
  }
  throw MixingCapExceeded("chain did not mix within 1e5 steps");
}

FiniteMdp random_mdp(int n_states, int n_actions, double gamma, std::uint64_t seed,
                     double cost_scale) {
  Rng rng(mix_seed(seed, 0x6d6470ULL));
  const int n_sa = n_states * n_actions;
  Eigen::MatrixXd p(n_sa, n_states);
  for (int i = 0; i < n_sa; ++i) {
    Eigen::VectorXd row(n_states);
    for (int s = 0; s < n_states; ++s) row[s] = sample_gamma(rng, 1.0);
    p.row(i) = row / row.sum();
  }
  Eigen::VectorXd cost(n_sa);
  for (int i = 0; i < n_sa; ++i) cost[i] = cost_scale * uniform_range(rng, -1.0, 1.0);
  Eigen::VectorXd eta = Eigen::VectorXd::Constant(n_states, 1.0 / n_states);
  return FiniteMdp(n_states, n_actions, std::move(p), std::move(cost),
                   std::max(cost_scale, 1e-12), gamma, std::move(eta));
}

}  // namespace ssac
