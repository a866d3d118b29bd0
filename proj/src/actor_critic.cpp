#include "ssac/actor_critic.hpp"

#include <cmath>

namespace ssac {

void AcConfig::validate() const {
  if (total_steps < 2) throw InvalidModel("total_steps must be >= 2");
  if (!(omega_radius > 0.0)) throw InvalidModel("omega_radius must be positive");
  if (!(actor_scale > 0.0)) throw InvalidModel("actor_scale must be positive");
  if (diag_stride < 1) throw InvalidModel("diag_stride must be >= 1");
}

Eigen::VectorXd project_ball(const Eigen::VectorXd& omega, double r) {
  const double norm = omega.norm();
  if (norm <= r) return omega;
  return (r / norm) * omega;
}

ProjectionReport validate_projection_radius(const FiniteMdp& mdp,
                                            const FeatureMatrix& features,
                                            const SoftmaxPolicy& policy_class,
                                            const std::vector<Eigen::VectorXd>& theta_grid,
                                            double r) {
  ProjectionReport out;
  double min_margin = std::numeric_limits<double>::infinity();
  for (const auto& theta : theta_grid) {
    const SoftmaxPolicy policy = policy_class.with_theta(theta);
    const TdPair td = expected_td_pair(mdp, policy, features);
    min_margin = std::min(min_margin, exploration_margin(td));
    out.max_omega_norm = std::max(out.max_omega_norm, td_fixed_point(td).norm());
  }
  const double mu = 2.0 * min_margin;
  out.analytic_radius = mu > 0.0 ? (2.0 / mu) * mdp.c_max()
                                 : std::numeric_limits<double>::infinity();
  out.margin = r - out.max_omega_norm;
  out.ok = out.margin > 0.0;
  return out;
}

AcState step(const AcState& state, const FiniteMdp& mdp,
             const SoftmaxPolicy& policy_class, const FeatureMatrix& features,
             const AcConfig& config, Sampler& sampler) {
  const SoftmaxPolicy policy = policy_class.with_theta(state.theta);
  const double alpha = config.alpha_schedule.at(state.t);
  const double beta = config.beta_schedule.at(state.t);
  const double actor_scale =
      config.sampler.rescale_actor ? 1.0 / (1.0 - mdp.gamma()) : 1.0;

  const ActorTuple at = sampler.sample_actor_tuple(policy);
  const CriticTuple ct = sampler.sample_critic_tuple(policy);

  AcState next;
  next.t = state.t + 1;

  const int sa = mdp.sa_index(at.s, at.a);
  next.theta = state.theta - beta * actor_scale * features.row(sa).dot(state.omega) *
                                policy.score(at.s, at.a);

  const int sa1 = mdp.sa_index(ct.s1, ct.a1);
  const int sa2 = mdp.sa_index(ct.s2, ct.a2);
  const double td_error = ct.cost + mdp.gamma() * features.row(sa2).dot(state.omega) -
                          features.row(sa1).dot(state.omega);
  next.omega = project_ball(state.omega + alpha * td_error * features.row(sa1),
                            config.omega_radius);
  return next;
}

namespace {

DiagRow diagnostics(std::int64_t t, const FiniteMdp& mdp, const SoftmaxPolicy& policy,
                    const FeatureMatrix& features, const AcState& state,
                    Eigen::VectorXd* omega_theta_out) {
  DiagRow row;
  row.t = t;
  row.grad_sq = exact_gradient(mdp, policy).squaredNorm();
  const Eigen::VectorXd omega_theta = td_fixed_point(expected_td_pair(mdp, policy, features));
  row.delta_sq = (state.omega - omega_theta).squaredNorm();
  row.value = value_objective(mdp, policy.all_action_probs());
  row.omega_norm = state.omega.norm();
  row.theta_norm = state.theta.norm();
  if (omega_theta_out) *omega_theta_out = omega_theta;
  return row;
}

}  // namespace

IterateLog run(const FiniteMdp& mdp, const SoftmaxPolicy& policy_class,
               const FeatureMatrix& features, const AcConfig& config) {
  config.validate();
  Sampler sampler(mdp, config.sampler);

  AcState state;
  state.theta = config.theta_init.size() > 0 ? config.theta_init
                                             : Eigen::VectorXd::Zero(policy_class.dim());
  state.omega = config.omega_init.size() > 0 ? config.omega_init
                                             : Eigen::VectorXd::Zero(features.dim());
  state.t = 1;

  IterateLog log;
  log.seed = config.sampler.seed;
  log.total_steps = config.total_steps;
  log.diag_stride = config.diag_stride;

  Eigen::VectorXd prev_theta, prev_omega_theta;
  bool have_prev = false;

  for (;;) {
    const bool diag_due =
        (state.t - 1) % config.diag_stride == 0 || state.t == config.total_steps;
    if (diag_due) {
      const SoftmaxPolicy policy = policy_class.with_theta(state.theta);
      try {
        Eigen::VectorXd omega_theta;
        log.rows.push_back(diagnostics(state.t, mdp, policy, features, state, &omega_theta));
        if (have_prev) {
          const double dtheta = (state.theta - prev_theta).norm();
          if (dtheta > 0.0)
            log.empirical_l_omega = std::max(
                log.empirical_l_omega, (omega_theta - prev_omega_theta).norm() / dtheta);
        }
        prev_theta = state.theta;
        prev_omega_theta = omega_theta;
        have_prev = true;
      } catch (const std::exception& e) {
        throw std::runtime_error("diagnostics failed at iteration " +
                                 std::to_string(state.t) + ": " + e.what());
      }
    }
    if (state.t == config.total_steps) break;
    try {
      state = step(state, mdp, policy_class, features, config, sampler);
    } catch (const std::exception& e) {
      throw std::runtime_error("update failed at iteration " + std::to_string(state.t) +
                               ": " + e.what());
    }
  }

  log.oracle_samples = sampler.oracle_samples();
  log.mdp_transitions = sampler.mdp_transitions();
  log.final_theta = state.theta;
  log.final_omega = state.omega;
  return log;
}

}  // namespace ssac
