#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ssac/actor_critic.hpp"
#include "ssac/critic_oracle.hpp"
#include "ssac/mdp.hpp"
#include "ssac/policy.hpp"

namespace ssac {

/// Problem constants entering the convergence bounds. mu and delta are grid
/// certificates; the Lipschitz constants and lambda_hess are empirical probes.
struct ConstantSet {
  double mu = 0.0;
  double delta = 0.0;
  double delta_bar = 0.0;      // K delta / (1 - gamma)
  double l_nabla = 2.0;        // exact
  double l_g = 0.0;            // K ||Phi|| / (1 - gamma), analytic
  double l_omega = 0.0;
  double l_v = 0.0;
  double k_score = 0.0;
  double sigma_a2 = 0.0;
  double sigma_c2 = 0.0;
  double sigma_a4 = 0.0;       // second moment proxy for ||w_a||^2 (fourth-moment root)
  double c_alpha = 1.4142135623730951;  // sqrt(2) for 1/sqrt(t) schedules
  double c_beta = 1.4142135623730951;
  double lambda_hess = 0.0;    // probed Hessian aggregate for theta -> omega_theta
};

struct GainCoefficients {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0, e = 0.0;
  bool gain_ok() const { return 2.0 * c * e < 1.0; }
};

struct EstimateOptions {
  std::uint64_t seed = 0;
  std::int64_t noise_draws = 20000;
  int noise_points = 3;    // grid points probed for noise moments
  int hessian_points = 3;  // grid points probed for lambda_hess
};

/// Grid sweep producing every constant needed by the bound evaluation.
ConstantSet estimate_constants(const FiniteMdp& mdp, const SoftmaxPolicy& policy_class,
                               const FeatureMatrix& features,
                               const std::vector<Eigen::VectorXd>& theta_grid,
                               const EstimateOptions& options = {});

/// (2a + b^2 + 2cd) / (1 - 2ce); throws GainTooLarge when 2ce >= 1.
double small_gain_bound(const GainCoefficients& g);

struct BoundaryTerms {
  double delta_sq_at_half = 0.0;   // ||omega_{T/2} - omega_{theta_{T/2}}||^2
  double value_gap = 0.0;          // V(theta_{T/2}) - V(theta_T)
};

/// Gain coefficients of the two convergence relations, evaluated from the
/// constants. use_delta_bar selects the (K/(1-gamma))-scaled error in the a
/// and b terms; the unscaled variant is kept for comparison.
GainCoefficients theorem_coefficients(const ConstantSet& consts, std::int64_t T,
                                      double alpha_T, double beta_T,
                                      const BoundaryTerms& boundary,
                                      bool use_delta_bar = true);

struct StepConstraintReport {
  bool ok = false;
  double lhs = 0.0;            // value of the combined step constraint
  bool step_constraint = false;  // lhs <= 1/2
  bool beta_side = false;        // 24 c_beta beta L_omega <= 1
  bool alpha_side = false;       // alpha <= mu / (2 L_nabla^2)
  bool beta_lv = false;          // beta <= 1 / (6 L_V)
  bool cprime_ok = false;        // beta/alpha <= mu/(8 L_omega) / (4 c_beta^2 L_g^2)
  bool alt_side = false;         // 96 c_beta <= 2 / (alpha mu), checked independently
};

StepConstraintReport step_constraint_check(const ConstantSet& consts, double alpha_t,
                                           double beta_t);

/// Default actor step scale c': largest of the admissible formulas, clipped
/// to [1e-4, 1].
double recommended_actor_scale(const ConstantSet& consts);

/// Mean of the series entries with index in [t/2, t-1]. Entries are
/// (index, value) pairs; throws WindowIncomplete if fewer than 2 fall in
/// the window.
double tail_average(const std::vector<std::pair<std::int64_t, double>>& series,
                    std::int64_t t);

/// (t, tail_average(t)) at geometrically spaced checkpoints t = t_min, 2 t_min, ...
std::vector<std::pair<std::int64_t, double>> tail_average_series(
    const std::vector<std::pair<std::int64_t, double>>& series, std::int64_t t_min,
    std::int64_t t_max);

struct RateFit {
  double exponent = 0.0;
  double exponent_se = 0.0;  // standard error of the fitted slope
  double amplitude = 0.0;    // multiplier in amplitude * t^exponent
  double floor = 0.0;        // subtracted asymptote estimate (0 when disabled)
  int points_used = 0;
};

/// Least-squares power-law fit of tail-average points on log-log scale.
/// With subtract_floor, the asymptote is estimated by two-point
/// extrapolation f = 2 v(T) - v(T/4) and removed before fitting.
RateFit fit_power_law(const std::vector<std::pair<std::int64_t, double>>& points,
                      bool subtract_floor);

enum class LogSeries { kGradSq, kDeltaSq };

/// Power-law fit of a run's tail-averaged diagnostics from t_min up.
RateFit rate_fit(const IterateLog& log, LogSeries which, std::int64_t t_min,
                 bool subtract_floor = false);

/// Extracts (t, value) pairs for one diagnostic column.
std::vector<std::pair<std::int64_t, double>> log_series(const IterateLog& log,
                                                        LogSeries which);

}  // namespace ssac
