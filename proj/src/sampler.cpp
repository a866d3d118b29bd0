#include "ssac/sampler.hpp"

#include <cmath>

#include "ssac/gradient.hpp"

namespace ssac {

namespace {
constexpr std::uint64_t kActorStream = 0x61637472ULL;
constexpr std::uint64_t kCriticStream = 0x63726974ULL;
}  // namespace

Sampler::Sampler(const FiniteMdp& mdp, const SamplerConfig& config)
    : mdp_(mdp),
      config_(config),
      actor_rng_(mix_seed(config.seed, kActorStream)),
      critic_rng_(mix_seed(config.seed, kCriticStream)),
      rho_warm_(Eigen::VectorXd::Constant(mdp.n_sa(), 1.0 / mdp.n_sa())) {
  if (config_.burn_in < 1) throw InvalidModel("burn_in must be >= 1");
  horizon_cap_ = config_.horizon_cap;
  if (horizon_cap_ <= 0)
    horizon_cap_ = static_cast<std::int64_t>(
        std::ceil(std::log(1e-9) / std::log(mdp.gamma())));
  if (horizon_cap_ < 1) horizon_cap_ = 1;
}

ActorTuple Sampler::sample_actor_tuple(const SoftmaxPolicy& policy) {
  // Geometric horizon P(T=t) = (1-gamma) gamma^t, tail mass folded into the cap.
  double u = uniform01(actor_rng_);
  while (u >= 1.0) u = uniform01(actor_rng_);
  std::int64_t horizon = static_cast<std::int64_t>(
      std::floor(std::log1p(-u) / std::log(mdp_.gamma())));
  if (horizon > horizon_cap_) horizon = horizon_cap_;

  int s = static_cast<int>(sample_categorical(mdp_.eta(), actor_rng_));
  for (std::int64_t t = 0; t < horizon; ++t) {
    const int a = static_cast<int>(sample_categorical(policy.action_probs(s), actor_rng_));
    s = static_cast<int>(
        sample_categorical(mdp_.transition().row(mdp_.sa_index(s, a)).transpose(), actor_rng_));
    ++mdp_transitions_;
  }
  const int a = static_cast<int>(sample_categorical(policy.action_probs(s), actor_rng_));
  ++oracle_samples_;
  return ActorTuple{s, a, horizon};
}

CriticTuple Sampler::sample_critic_tuple(const SoftmaxPolicy& policy) {
  CriticTuple out;
  const Eigen::MatrixXd probs = policy.all_action_probs();
  if (config_.critic_mode == CriticMode::kExact) {
    const Eigen::MatrixXd p_theta = sa_transition_matrix(mdp_, probs);
    rho_warm_ = stationary_power_iteration(p_theta, rho_warm_, 1e-13);
    const int sa = static_cast<int>(sample_categorical(rho_warm_, critic_rng_));
    out.s1 = sa / mdp_.n_actions();
    out.a1 = sa % mdp_.n_actions();
  } else {
    int s = static_cast<int>(sample_categorical(mdp_.eta(), critic_rng_));
    int a = static_cast<int>(sample_categorical(policy.action_probs(s), critic_rng_));
    for (std::int64_t t = 0; t < config_.burn_in; ++t) {
      s = static_cast<int>(
          sample_categorical(mdp_.transition().row(mdp_.sa_index(s, a)).transpose(), critic_rng_));
      a = static_cast<int>(sample_categorical(policy.action_probs(s), critic_rng_));
      ++mdp_transitions_;
    }
    out.s1 = s;
    out.a1 = a;
  }
  out.s2 = static_cast<int>(sample_categorical(
      mdp_.transition().row(mdp_.sa_index(out.s1, out.a1)).transpose(), critic_rng_));
  out.a2 = static_cast<int>(sample_categorical(policy.action_probs(out.s2), critic_rng_));
  out.cost = mdp_.cost()[mdp_.sa_index(out.s1, out.a1)];
  ++mdp_transitions_;
  ++oracle_samples_;
  return out;
}

NoiseStatistics noise_statistics(const FiniteMdp& mdp, const SoftmaxPolicy& policy,
                                 const FeatureMatrix& features,
                                 const Eigen::VectorXd& omega, std::int64_t n_draws,
                                 Sampler& sampler) {
  if (n_draws < 1000) throw InsufficientData("noise_statistics needs >= 1e3 draws");
  const double gamma = mdp.gamma();
  const double actor_scale = sampler.config().rescale_actor ? 1.0 / (1.0 - gamma) : 1.0;

  const Eigen::VectorXd g_mean = actor_scale * (1.0 - gamma) *
                                 g_of_omega(mdp, policy, features, omega);
  const TdPair td = expected_td_pair(mdp, policy, features);
  const Eigen::VectorXd td_mean = -td.a_matrix * omega + td.b_vector;

  const int da = policy.dim();
  const int dc = features.dim();
  Eigen::VectorXd sum_a = Eigen::VectorXd::Zero(da), sumsq_a = Eigen::VectorXd::Zero(da);
  Eigen::VectorXd sum_c = Eigen::VectorXd::Zero(dc), sumsq_c = Eigen::VectorXd::Zero(dc);
  Eigen::MatrixXd sum_cross = Eigen::MatrixXd::Zero(da, dc);
  double sum_na2 = 0.0, sum_nc2 = 0.0, sum_na4 = 0.0;

  for (std::int64_t i = 0; i < n_draws; ++i) {
    const ActorTuple at = sampler.sample_actor_tuple(policy);
    const int sa = mdp.sa_index(at.s, at.a);
    const Eigen::VectorXd w_a =
        actor_scale * features.row(sa).dot(omega) * policy.score(at.s, at.a) - g_mean;

    const CriticTuple ct = sampler.sample_critic_tuple(policy);
    const int sa1 = mdp.sa_index(ct.s1, ct.a1);
    const int sa2 = mdp.sa_index(ct.s2, ct.a2);
    const double td_error = ct.cost + gamma * features.row(sa2).dot(omega) -
                            features.row(sa1).dot(omega);
    const Eigen::VectorXd w_c = -td_error * features.row(sa1) - td_mean;

    sum_a += w_a;
    sumsq_a += w_a.cwiseAbs2();
    sum_c += w_c;
    sumsq_c += w_c.cwiseAbs2();
    sum_cross += w_a * w_c.transpose();
    const double na2 = w_a.squaredNorm();
    sum_na2 += na2;
    sum_na4 += na2 * na2;
    sum_nc2 += w_c.squaredNorm();
  }

  const double n = static_cast<double>(n_draws);
  NoiseStatistics out;
  out.mean_a = sum_a / n;
  out.mean_c = sum_c / n;
  out.se_a = ((sumsq_a / n - out.mean_a.cwiseAbs2()).cwiseMax(0.0) / n).cwiseSqrt();
  out.se_c = ((sumsq_c / n - out.mean_c.cwiseAbs2()).cwiseMax(0.0) / n).cwiseSqrt();
  out.sigma_a2 = sum_na2 / n;
  out.sigma_c2 = sum_nc2 / n;
  out.sigma_a4 = std::sqrt(sum_na4 / n);
  const Eigen::VectorXd sd_a = (sumsq_a / n - out.mean_a.cwiseAbs2()).cwiseMax(1e-300).cwiseSqrt();
  const Eigen::VectorXd sd_c = (sumsq_c / n - out.mean_c.cwiseAbs2()).cwiseMax(1e-300).cwiseSqrt();
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < dc; ++j) {
      const double cov = sum_cross(i, j) / n - out.mean_a[i] * out.mean_c[j];
      const double corr = cov / (sd_a[i] * sd_c[j]);
      if (std::isfinite(corr)) out.max_cross_corr = std::max(out.max_cross_corr, std::abs(corr));
    }
  return out;
}

}  // namespace ssac
