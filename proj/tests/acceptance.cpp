// Acceptance suite: one pass/fail line per criterion, exit code = #failures.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "ssac/actor_critic.hpp"
#include "ssac/analysis.hpp"
#include "ssac/critic_oracle.hpp"
#include "ssac/gradient.hpp"
#include "ssac/io.hpp"
#include "ssac/mdp.hpp"
#include "ssac/policy.hpp"
#include "ssac/rng.hpp"
#include "ssac/sampler.hpp"

using namespace ssac;

namespace {

int g_failures = 0;

void report(int idx, const char* name, bool pass, const std::string& detail) {
  std::printf("%s: criterion %d %s (%s)\n", pass ? "PASS" : "FAIL", idx, name,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

Eigen::VectorXd random_theta(int dim, double box, Rng& rng) {
  Eigen::VectorXd theta(dim);
  for (int i = 0; i < dim; ++i) theta[i] = uniform_range(rng, -box, box);
  return theta;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// ---------------------------------------------------------------------------

void criterion_1_policy_gradient() {
  Rng rng(101);
  double worst = 0.0;
  for (int m = 0; m < 20; ++m) {
    const int ns = 2 + static_cast<int>(rng() % 4);  // 2..5 states
    const int na = 2 + static_cast<int>(rng() % 2);  // 2..3 actions
    const FiniteMdp mdp = random_mdp(ns, na, 0.8, 1000 + m);
    const SoftmaxPolicy base = SoftmaxPolicy::tabular(ns, na, 0.05);
    const double h = 1e-5;
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::VectorXd theta = random_theta(base.dim(), 1.0, rng);
      const Eigen::VectorXd grad = exact_gradient(mdp, base.with_theta(theta));
      Eigen::VectorXd fd(base.dim());
      for (int i = 0; i < base.dim(); ++i) {
        Eigen::VectorXd tp = theta, tm = theta;
        tp[i] += h;
        tm[i] -= h;
        fd[i] = (value_objective(mdp, base.with_theta(tp).all_action_probs()) -
                 value_objective(mdp, base.with_theta(tm).all_action_probs())) /
                (2.0 * h);
      }
      const double rel = (grad - fd).norm() / std::max(1.0, fd.norm());
      worst = std::max(worst, rel);
    }
  }
  report(1, "policy-gradient vs finite differences", worst <= 1e-5,
         "max rel err " + fmt(worst) + " over 400 cases, tol 1e-5");
}

void criterion_2_splitting() {
  Rng rng(202);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int ns = 2 + static_cast<int>(rng() % 3);
    const int na = 2 + static_cast<int>(rng() % 2);
    const FiniteMdp mdp = random_mdp(ns, na, 0.1 + 0.8 * uniform01(rng), 2000 + trial);
    const SoftmaxPolicy base = SoftmaxPolicy::tabular(ns, na, 0.05);
    const SoftmaxPolicy policy = base.with_theta(random_theta(base.dim(), 1.5, rng));
    const FeatureMatrix features = FeatureMatrix::tabular(ns * na);
    const Eigen::VectorXd omega = random_theta(features.dim(), 2.0, rng);
    const SplittingCheck check = splitting_check(mdp, policy, features, omega);
    worst = std::max(worst, check.gap);
  }
  report(2, "gradient-splitting identity", worst <= 1e-8,
         "max |lhs-rhs| " + fmt(worst) + " over 100 triples, tol 1e-8");
}

void criterion_3_inverse_norm() {
  Rng rng(303);
  int checked = 0, violations = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  int trial = 0;
  while (checked < 200) {
    const int ns = 2 + static_cast<int>(rng() % 3);
    const int na = 2 + static_cast<int>(rng() % 2);
    const FiniteMdp mdp = random_mdp(ns, na, 0.1 + 0.8 * uniform01(rng), 3000 + trial);
    ++trial;
    const SoftmaxPolicy base = SoftmaxPolicy::tabular(ns, na, 0.05);
    const SoftmaxPolicy policy = base.with_theta(random_theta(base.dim(), 1.5, rng));
    const TdPair td = expected_td_pair(mdp, policy, FeatureMatrix::tabular(ns * na));
    if (exploration_margin(td) <= 0.0) continue;
    const InverseNormCheck check = inverse_norm_check(td);
    ++checked;
    if (check.inverse_norm > check.bound + 1e-12) ++violations;
    worst_slack = std::min(worst_slack, check.bound - check.inverse_norm);
  }
  report(3, "inverse-norm bound", violations == 0,
         std::to_string(violations) + " violations over 200 instances, min slack " +
             fmt(worst_slack));
}

void criterion_4_contraction() {
  Rng rng(404);
  int violations = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int ns = 2 + static_cast<int>(rng() % 3);
    const int na = 2 + static_cast<int>(rng() % 2);
    const FiniteMdp mdp = random_mdp(ns, na, 0.1 + 0.8 * uniform01(rng), 4000 + trial);
    const SoftmaxPolicy base = SoftmaxPolicy::tabular(ns, na, 0.05);
    const SoftmaxPolicy policy = base.with_theta(random_theta(base.dim(), 1.5, rng));
    const FeatureMatrix features = FeatureMatrix::tabular(ns * na);
    const TdPair td = expected_td_pair(mdp, policy, features);
    const double margin = exploration_margin(td);
    if (margin <= 0.0) continue;
    const double mu = 2.0 * margin;
    const double alpha = uniform01(rng) * mu / 8.0;
    if (alpha <= 0.0) continue;
    const Eigen::VectorXd omega_theta = td_fixed_point(td);
    const Eigen::VectorXd omega =
        omega_theta + random_theta(features.dim(), 2.0, rng);
    if (!contraction_check(td, omega, omega_theta, alpha)) ++violations;
  }
  report(4, "critic one-step contraction", violations == 0,
         std::to_string(violations) + " violations over 500 draws");
}

void criterion_5_small_gain() {
  Rng rng(505);
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    GainCoefficients g;
    g.a = 2.0 * uniform01(rng);
    g.b = 2.0 * uniform01(rng);
    g.c = uniform01(rng);
    g.e = uniform01(rng);
    if (2.0 * g.c * g.e >= 0.9) g.e = 0.4 / std::max(g.c, 1e-6);
    g.d = 2.0 * uniform01(rng);
    // The monotone map (x, z) <- (a + b sqrt(x) + c z, d + e x) converges to
    // the extremal pair satisfying both gain inequalities with equality.
    double x = 0.0, z = 0.0;
    for (int it = 0; it < 10000; ++it) {
      const double zn = g.d + g.e * x;
      const double xn = g.a + g.b * std::sqrt(x) + g.c * zn;
      if (std::abs(xn - x) < 1e-13 && std::abs(zn - z) < 1e-13) break;
      x = xn;
      z = zn;
    }
    if (x > small_gain_bound(g) + 1e-9) ++violations;
  }
  report(5, "small-gain bound soundness", violations == 0,
         std::to_string(violations) + " violations over 1000 sequence pairs");
}

void criterion_6_sampler() {
  const FiniteMdp mdp = random_mdp(3, 2, 0.8, 606);
  Rng rng(607);
  const SoftmaxPolicy base = SoftmaxPolicy::tabular(3, 2, 0.05);
  const SoftmaxPolicy policy = base.with_theta(random_theta(base.dim(), 1.0, rng));
  SamplerConfig cfg;
  cfg.seed = 608;
  Sampler sampler(mdp, cfg);
  const int n = 100000;
  Eigen::VectorXd actor_counts = Eigen::VectorXd::Zero(6);
  Eigen::VectorXd critic_counts = Eigen::VectorXd::Zero(6);
  for (int i = 0; i < n; ++i) {
    const ActorTuple at = sampler.sample_actor_tuple(policy);
    actor_counts[mdp.sa_index(at.s, at.a)] += 1.0;
    const CriticTuple ct = sampler.sample_critic_tuple(policy);
    critic_counts[mdp.sa_index(ct.s1, ct.a1)] += 1.0;
  }
  const Eigen::VectorXd nu =
      discounted_visitation(mdp, policy.all_action_probs()).probs();
  const Eigen::VectorXd rho =
      stationary_distribution(sa_transition_matrix(mdp, policy.all_action_probs()))
          .probs();
  const double tv_actor = 0.5 * (actor_counts / n - nu).cwiseAbs().sum();
  const double tv_critic = 0.5 * (critic_counts / n - rho).cwiseAbs().sum();

  const FeatureMatrix features = FeatureMatrix::tabular(6);
  const Eigen::VectorXd omega = random_theta(6, 1.0, rng);
  const NoiseStatistics ns = noise_statistics(mdp, policy, features, omega, n, sampler);
  bool noise_ok = true;
  for (int i = 0; i < ns.mean_a.size(); ++i)
    noise_ok = noise_ok && std::abs(ns.mean_a[i]) <= 4.0 * ns.se_a[i] + 1e-12;
  for (int i = 0; i < ns.mean_c.size(); ++i)
    noise_ok = noise_ok && std::abs(ns.mean_c[i]) <= 4.0 * ns.se_c[i] + 1e-12;

  report(6, "sampler fidelity",
         tv_actor <= 0.02 && tv_critic <= 0.02 && noise_ok,
         "actor TV " + fmt(tv_actor) + ", critic TV " + fmt(tv_critic) +
             ", noise means within 4 SE: " + (noise_ok ? "yes" : "no"));
}

// ---------------------------------------------------------------------------
// Shared configuration for the long-run criteria (7-11).

ExperimentConfig base_config() {
  ExperimentConfig cfg;
  cfg.mdp.n_states = 3;
  cfg.mdp.n_actions = 2;
  cfg.mdp.gamma = 0.1;
  cfg.mdp.seed = 2;
  cfg.features.kind = FeatureSpec::Kind::kTabular;
  cfg.policy.epsilon_floor = 0.05;
  cfg.run.total_steps = 200000;
  cfg.run.diag_stride = 256;
  cfg.run.seed = 6;
  cfg.theta_grid.count = 32;
  cfg.theta_grid.box = 0.9;
  cfg.theta_grid.seed = 7;
  cfg.n_seeds = 5;
  return cfg;
}

std::vector<IterateLog> run_seeds(const ExperimentConfig& cfg, const Instance& inst) {
  std::vector<IterateLog> logs;
  for (int i = 0; i < cfg.n_seeds; ++i) {
    const AcConfig ac = build_ac_config(cfg, inst, i);
    logs.push_back(run(inst.mdp, inst.policy_class, inst.features, ac));
  }
  return logs;
}

double tail_at(const std::vector<std::pair<std::int64_t, double>>& series,
               std::int64_t t) {
  return tail_average(series, t);
}

void criterion_7_frozen_actor() {
  ExperimentConfig cfg = base_config();
  cfg.run.freeze_actor = true;
  cfg.run.total_steps = 100000;
  cfg.run.diag_stride = 100;
  const Instance inst = build_instance(cfg);
  const std::vector<IterateLog> logs = run_seeds(cfg, inst);
  const auto med = median_series(logs, LogSeries::kDeltaSq);
  std::vector<std::pair<std::int64_t, double>> pts;
  for (const auto& p : med)
    if (p.first >= 100 && p.first <= 100000) pts.push_back(p);
  const RateFit fit = fit_power_law(pts, false);
  report(7, "frozen-actor critic tracking rate", fit.exponent <= -0.4,
         "fitted exponent " + fmt(fit.exponent) + " over t in [1e2,1e5], need <= -0.4");
}

struct LongRunResult {
  std::vector<std::pair<std::int64_t, double>> grad_med, delta_med, value_med;
  ExperimentConfig cfg;
  Instance inst;
  AcConfig ac;
};

LongRunResult long_run(const ExperimentConfig& cfg) {
  Instance inst = build_instance(cfg);
  AcConfig ac = build_ac_config(cfg, inst, 0);
  const std::vector<IterateLog> logs = run_seeds(cfg, inst);
  std::vector<IterateLog> tmp = logs;
  for (auto& log : tmp)
    for (auto& row : log.rows) row.grad_sq = row.value;
  return LongRunResult{median_series(logs, LogSeries::kGradSq),
                       median_series(logs, LogSeries::kDeltaSq),
                       median_series(tmp, LogSeries::kGradSq),
                       cfg, std::move(inst), ac};
}

void criteria_8_9_10() {
  const std::int64_t kCheckpoints[4] = {1 << 10, 1 << 12, 1 << 14, 1 << 17};

  const LongRunResult tab = long_run(base_config());

  // Criterion 8: monotone tails and fitted exponents on the full-basis run.
  double tg[4], td[4];
  for (int i = 0; i < 4; ++i) {
    tg[i] = tail_at(tab.grad_med, kCheckpoints[i]);
    td[i] = tail_at(tab.delta_med, kCheckpoints[i]);
  }
  const bool mono = tg[0] > tg[1] && tg[1] > tg[2] && tg[2] > tg[3] &&
                    td[0] > td[1] && td[1] > td[2] && td[2] > td[3];
  const RateFit grad_fit =
      fit_power_law(tail_average_series(tab.grad_med, 1 << 10, 1 << 17), false);
  const RateFit delta_fit =
      fit_power_law(tail_average_series(tab.delta_med, 1 << 10, 1 << 17), false);
  const bool exps_ok = grad_fit.exponent >= -0.7 && grad_fit.exponent <= -0.3 &&
                       delta_fit.exponent >= -0.7 && delta_fit.exponent <= -0.3;
  report(8, "qualitative rate with exact features", mono && exps_ok,
         "tails monotone: " + std::string(mono ? "yes" : "no") +
             ", grad exponent " + fmt(grad_fit.exponent) + ", tracking exponent " +
             fmt(delta_fit.exponent) + ", need both in [-0.7,-0.3]");

  // Criterion 9: rank-deficient twin plateaus while the full-basis twin drops.
  ExperimentConfig twin_cfg = base_config();
  twin_cfg.features.kind = FeatureSpec::Kind::kRandom;
  twin_cfg.features.rank = 5;
  twin_cfg.features.seed = 1;
  twin_cfg.run.actor_scale = tab.ac.actor_scale;  // twins differ only in features
  const LongRunResult twin = long_run(twin_cfg);
  const double twin_delta = approximation_error(twin.inst.mdp,
                                                twin.inst.policy_class,
                                                twin.inst.features);
  const double twin_ratio = tail_at(twin.delta_med, 1 << 14) /
                            tail_at(twin.delta_med, 1 << 17);
  const double full_ratio = td[2] / td[3];
  report(9, "approximation-error floor", twin_delta > 0.01 && twin_ratio <= 2.0 &&
             full_ratio >= 4.0,
         "twin error-at-zero " + fmt(twin_delta) + ", twin 2^14->2^17 drop " +
             fmt(twin_ratio) + "x (need <= 2), full-basis drop " + fmt(full_ratio) +
             "x (need >= 4)");

  // Criterion 10: constraint pipeline on the full-basis configuration.
  EstimateOptions opt;
  opt.seed = 1010;
  const ConstantSet consts = estimate_constants(
      tab.inst.mdp, tab.inst.policy_class, tab.inst.features, tab.inst.theta_grid, opt);
  const std::int64_t T = tab.cfg.run.total_steps;
  auto nearest = [](const std::vector<std::pair<std::int64_t, double>>& s,
                    std::int64_t t) {
    double best = s.front().second;
    std::int64_t gap = std::numeric_limits<std::int64_t>::max();
    for (const auto& p : s)
      if (std::abs(p.first - t) < gap) { gap = std::abs(p.first - t); best = p.second; }
    return best;
  };
  BoundaryTerms boundary;
  boundary.delta_sq_at_half = nearest(tab.delta_med, T / 2);
  boundary.value_gap =
      std::max(0.0, nearest(tab.value_med, T / 2) - nearest(tab.value_med, T));
  const GainCoefficients gains = theorem_coefficients(
      consts, T, tab.ac.alpha_schedule.at(T), tab.ac.beta_schedule.at(T), boundary, true);
  const StepConstraintReport half = step_constraint_check(
      consts, tab.ac.alpha_schedule.at(T / 2), tab.ac.beta_schedule.at(T / 2));
  const StepConstraintReport end = step_constraint_check(
      consts, tab.ac.alpha_schedule.at(T), tab.ac.beta_schedule.at(T));
  double bound = std::numeric_limits<double>::infinity();
  bool finite = false;
  if (gains.gain_ok()) {
    bound = small_gain_bound(gains);
    finite = true;
  }
  const double tail_delta = tail_at(tab.delta_med, T);
  report(10, "constraint pipeline and bound", half.ok && end.ok && finite &&
             tail_delta <= bound,
         std::string("side conditions at T/2 and T: ") +
             (half.ok && end.ok ? "all hold" : "violated") + ", 2ce " +
             fmt(2.0 * gains.c * gains.e) + " < 1: " + (finite ? "yes" : "no") +
             ", tail tracking error " + fmt(tail_delta) + " <= bound " + fmt(bound));
}

void criterion_11_determinism() {
  ExperimentConfig cfg = base_config();
  cfg.run.total_steps = 5000;
  cfg.run.diag_stride = 100;
  cfg.n_seeds = 2;
  const Instance inst = build_instance(cfg);
  bool identical = true;
  for (int i = 0; i < cfg.n_seeds; ++i) {
    const AcConfig ac = build_ac_config(cfg, inst, i);
    const IterateLog a = run(inst.mdp, inst.policy_class, inst.features, ac);
    const IterateLog b = run(inst.mdp, inst.policy_class, inst.features, ac);
    const std::string pa = "/tmp/ssac_accept_a.csv", pb = "/tmp/ssac_accept_b.csv";
    write_log_csv(pa, a);
    write_log_csv(pb, b);
    std::ifstream fa(pa, std::ios::binary), fb(pb, std::ios::binary);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    identical = identical && !sa.str().empty() && sa.str() == sb.str();
    std::remove(pa.c_str());
    std::remove(pb.c_str());
  }
  report(11, "run determinism", identical,
         identical ? "repeated runs produce byte-identical logs"
                   : "logs differ between repeated runs");
}

template <typename F>
void guarded(int idx, const char* name, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    report(idx, name, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  guarded(1, "policy-gradient vs finite differences", criterion_1_policy_gradient);
  guarded(2, "gradient-splitting identity", criterion_2_splitting);
  guarded(3, "inverse-norm bound", criterion_3_inverse_norm);
  guarded(4, "critic one-step contraction", criterion_4_contraction);
  guarded(5, "small-gain bound soundness", criterion_5_small_gain);
  guarded(6, "sampler fidelity", criterion_6_sampler);
  guarded(7, "frozen-actor critic tracking rate", criterion_7_frozen_actor);
  guarded(8, "long-run criteria", criteria_8_9_10);
  guarded(11, "run determinism", criterion_11_determinism);
  return g_failures;
}
