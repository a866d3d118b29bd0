#include "ssac/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ssac/gradient.hpp"
#include "ssac/rng.hpp"
#include "ssac/sampler.hpp"

namespace ssac {

namespace {

// Spectral norm of the finite-difference Hessian of one coordinate of
// theta -> omega_theta, probed at a single grid point.
double hessian_norms_at(const FiniteMdp& mdp, const SoftmaxPolicy& policy_class,
                        const FeatureMatrix& features, const Eigen::VectorXd& theta,
                        Eigen::VectorXd* per_coord_max) {
  const int d = static_cast<int>(theta.size());
  const int dc = features.dim();
  const double h = 1e-3;

  auto omega_at = [&](const Eigen::VectorXd& th) {
    return td_fixed_point(expected_td_pair(mdp, policy_class.with_theta(th), features));
  };

  const Eigen::VectorXd base = omega_at(theta);
  std::vector<Eigen::MatrixXd> hess(dc, Eigen::MatrixXd::Zero(d, d));

  for (int j = 0; j < d; ++j) {
    Eigen::VectorXd tp = theta, tm = theta;
    tp[j] += h;
    tm[j] -= h;
    const Eigen::VectorXd op = omega_at(tp), om = omega_at(tm);
    for (int i = 0; i < dc; ++i)
      hess[i](j, j) = (op[i] - 2.0 * base[i] + om[i]) / (h * h);
    for (int k = j + 1; k < d; ++k) {
      Eigen::VectorXd tpp = theta, tpm = theta, tmp = theta, tmm = theta;
      tpp[j] += h; tpp[k] += h;
      tpm[j] += h; tpm[k] -= h;
      tmp[j] -= h; tmp[k] += h;
      tmm[j] -= h; tmm[k] -= h;
      const Eigen::VectorXd opp = omega_at(tpp), opm = omega_at(tpm),
                            omp = omega_at(tmp), omm = omega_at(tmm);
      for (int i = 0; i < dc; ++i) {
        const double v = (opp[i] - opm[i] - omp[i] + omm[i]) / (4.0 * h * h);
        hess[i](j, k) = v;
        hess[i](k, j) = v;
      }
    }
  }

  double agg = 0.0;
  for (int i = 0; i < dc; ++i) {
    const double s = hess[i].jacobiSvd().singularValues()[0];
    (*per_coord_max)[i] = std::max((*per_coord_max)[i], s);
    agg += s * s;
  }
  return std::sqrt(agg);
}

}  // namespace

ConstantSet estimate_constants(const FiniteMdp& mdp, const SoftmaxPolicy& policy_class,
                               const FeatureMatrix& features,
                               const std::vector<Eigen::VectorXd>& theta_grid,
                               const EstimateOptions& options) {
  if (theta_grid.size() < 2)
    throw InsufficientData("estimate_constants needs at least 2 grid points");

  ConstantSet out;
  const double gamma = mdp.gamma();
  const std::size_t n = theta_grid.size();

  std::vector<Eigen::VectorXd> omegas(n), grads(n);
  double min_margin = std::numeric_limits<double>::infinity();
  double max_delta = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const SoftmaxPolicy policy = policy_class.with_theta(theta_grid[i]);
    const TdPair td = expected_td_pair(mdp, policy, features);
    min_margin = std::min(min_margin, exploration_margin(td));
    omegas[i] = td_fixed_point(td);
    grads[i] = exact_gradient(mdp, policy);
    max_delta = std::max(max_delta, approximation_error(mdp, policy, features));
  }
  out.mu = 2.0 * min_margin;
  out.delta = max_delta;

  // Lipschitz ratios over every grid pair; omegas and gradients are cached
  // so the quadratic pass stays cheap.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dtheta = (theta_grid[i] - theta_grid[j]).norm();
      if (dtheta <= 0.0) continue;
      out.l_omega = std::max(out.l_omega, (omegas[i] - omegas[j]).norm() / dtheta);
      out.l_v = std::max(out.l_v, (grads[i] - grads[j]).norm() / dtheta);
    }

  const SmoothnessReport smooth = smoothness_report(policy_class, theta_grid);
  out.k_score = smooth.has_analytic ? std::max(smooth.k_score, smooth.k_analytic)
                                    : smooth.k_score;
  out.delta_bar = out.k_score * out.delta / (1.0 - gamma);
  out.l_g = out.k_score * features.phi().jacobiSvd().singularValues()[0] / (1.0 - gamma);

  // Noise second moments: worst case over a few probed grid points, each
  // evaluated at its own TD fixed point.
  const int n_noise = std::min<int>(options.noise_points, static_cast<int>(n));
  for (int p = 0; p < n_noise; ++p) {
    const std::size_t idx = (p * (n - 1)) / std::max(1, n_noise - 1);
    const SoftmaxPolicy policy = policy_class.with_theta(theta_grid[idx]);
    SamplerConfig sc;
    sc.seed = mix_seed(options.seed, 0x6e6f6973ULL + p);
    Sampler sampler(mdp, sc);
    const NoiseStatistics ns =
        noise_statistics(mdp, policy, features, omegas[idx], options.noise_draws, sampler);
    out.sigma_a2 = std::max(out.sigma_a2, ns.sigma_a2);
    out.sigma_c2 = std::max(out.sigma_c2, ns.sigma_c2);
    out.sigma_a4 = std::max(out.sigma_a4, ns.sigma_a4);
  }

  // Curvature of theta -> omega_theta, probed at a few grid points.
  const int n_hess = std::min<int>(options.hessian_points, static_cast<int>(n));
  Eigen::VectorXd per_coord = Eigen::VectorXd::Zero(features.dim());
  for (int p = 0; p < n_hess; ++p) {
    const std::size_t idx = (p * (n - 1)) / std::max(1, n_hess - 1);
    hessian_norms_at(mdp, policy_class, features, theta_grid[idx], &per_coord);
  }
  out.lambda_hess = per_coord.norm();

  return out;
}

double small_gain_bound(const GainCoefficients& g) {
  const double denom = 1.0 - 2.0 * g.c * g.e;
  if (!(denom > 0.0))
    throw GainTooLarge("small-gain condition violated: 2ce = " +
                       std::to_string(2.0 * g.c * g.e));
  return (2.0 * g.a + g.b * g.b + 2.0 * g.c * g.d) / denom;
}

GainCoefficients theorem_coefficients(const ConstantSet& consts, std::int64_t T,
                                      double alpha_T, double beta_T,
                                      const BoundaryTerms& boundary,
                                      bool use_delta_bar) {
  if (T < 2) throw InvalidModel("theorem_coefficients needs T >= 2");
  if (!(alpha_T > 0.0) || !(beta_T > 0.0))
    throw InvalidModel("step sizes must be positive");
  const double mu = consts.mu;
  if (!(mu > 0.0)) throw InvalidModel("mu must be positive");

  const double err = use_delta_bar ? consts.delta_bar : consts.delta;
  const double ca = consts.c_alpha, cb = consts.c_beta;
  const double lw = consts.l_omega;
  const double td = static_cast<double>(T);

  GainCoefficients g;
  g.a = (1.0 / alpha_T) * (8.0 / (mu * td)) * boundary.delta_sq_at_half +
        ca * ca * alpha_T * (8.0 / mu) * consts.sigma_c2 +
        2.0 * lw * lw * (cb * cb * beta_T * beta_T / alpha_T) * (8.0 / mu) *
            consts.sigma_a2 +
        6.0 * lw * lw * (cb * cb * beta_T * beta_T / alpha_T) * (8.0 / mu) * err * err;
  g.b = (cb * cb * beta_T * beta_T * consts.sigma_a4 * (consts.lambda_hess / 2.0) +
         cb * beta_T * lw * err) /
        (alpha_T * mu);
  g.c = (cb * beta_T / alpha_T) * (8.0 * lw / mu);
  g.d = 8.0 * (boundary.value_gap / (beta_T * td) + cb * consts.delta_bar * consts.delta_bar +
               cb * cb * beta_T * 0.75 * consts.l_v * consts.sigma_a2);
  g.e = cb * consts.l_g * consts.l_g;
  return g;
}

StepConstraintReport step_constraint_check(const ConstantSet& consts, double alpha_t,
                                           double beta_t) {
  if (!(alpha_t > 0.0) || !(beta_t > 0.0))
    throw InvalidModel("step sizes must be positive");
  if (!(consts.mu > 0.0)) throw InvalidModel("mu must be positive");

  const double cb = consts.c_beta;
  const double lw = consts.l_omega;
  const double mu = consts.mu;
  const double cprime = beta_t / alpha_t;

  StepConstraintReport r;
  r.lhs = 6.0 * lw * lw * (cb * cb * beta_t * beta_t / alpha_t) * (8.0 / mu) *
              consts.l_g * consts.l_g +
          (cb * beta_t / alpha_t) * (2.0 * lw / mu) +
          (cb * beta_t / alpha_t) * (4.0 / mu) * lw * consts.l_g;
  r.step_constraint = r.lhs <= 0.5;
  r.beta_side = 24.0 * cb * beta_t * lw <= 1.0;
  r.alpha_side = alpha_t <= mu / (2.0 * consts.l_nabla * consts.l_nabla);
  r.beta_lv = consts.l_v > 0.0 ? beta_t <= 1.0 / (6.0 * consts.l_v) : true;
  r.cprime_ok =
      cprime <= (mu / (8.0 * lw)) / (4.0 * cb * cb * consts.l_g * consts.l_g);
  r.alt_side = 96.0 * cb <= 2.0 / (alpha_t * mu);
  r.ok = r.step_constraint && r.beta_side && r.alpha_side && r.beta_lv && r.cprime_ok;
  return r;
}

double recommended_actor_scale(const ConstantSet& consts) {
  if (!(consts.mu > 0.0) || !(consts.l_omega > 0.0) || !(consts.l_g > 0.0))
    throw InvalidModel("recommended_actor_scale needs positive mu, L_omega, L_g");
  const double cb = consts.c_beta;
  const double c1 = consts.mu / (cb * consts.l_omega);
  const double c2 = consts.mu / (consts.l_omega * consts.l_g * cb);
  const double c3 =
      (consts.mu / (8.0 * consts.l_omega)) / (4.0 * cb * cb * consts.l_g * consts.l_g);
  return std::clamp(std::min({c1, c2, c3}), 1e-4, 1.0);
}

double tail_average(const std::vector<std::pair<std::int64_t, double>>& series,
                    std::int64_t t) {
  const std::int64_t lo = t / 2, hi = t - 1;
  double sum = 0.0;
  int count = 0;
  for (const auto& [idx, value] : series)
    if (idx >= lo && idx <= hi) {
      sum += value;
      ++count;
    }
  if (count < 2)
    throw WindowIncomplete("tail_average window [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "] holds " + std::to_string(count) +
                           " logged points (need >= 2)");
  return sum / count;
}

std::vector<std::pair<std::int64_t, double>> tail_average_series(
    const std::vector<std::pair<std::int64_t, double>>& series, std::int64_t t_min,
    std::int64_t t_max) {
  std::vector<std::pair<std::int64_t, double>> out;
  for (std::int64_t t = t_min; t <= t_max; t *= 2)
    out.emplace_back(t, tail_average(series, t));
  return out;
}

RateFit fit_power_law(const std::vector<std::pair<std::int64_t, double>>& points,
                      bool subtract_floor) {
  RateFit fit;
  if (subtract_floor && points.size() >= 3) {
    // Two-point extrapolation against v(t) = f + a t^{-1/2}: the asymptote is
    // f = 2 v(T) - v(T/4). The median-of-tail alternative overshoots the
    // floor and badly biases the exponent.
    const auto& last = points.back();
    const std::int64_t quarter_t = last.first / 4;
    const auto quarter = std::min_element(
        points.begin(), points.end(), [&](const auto& x, const auto& y) {
          return std::abs(x.first - quarter_t) < std::abs(y.first - quarter_t);
        });
    fit.floor = std::max(0.0, 2.0 * last.second - quarter->second);
  }

  std::vector<std::pair<double, double>> xy;
  for (const auto& [t, v] : points) {
    const double y = v - fit.floor;
    if (!(y > 0.0) || t < 1) continue;
    xy.emplace_back(std::log(static_cast<double>(t)), std::log(y));
  }
  const int m = static_cast<int>(xy.size());
  if (m < 3) throw InsufficientData("fit_power_law has " + std::to_string(m) +
                                    " usable points (need >= 3)");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [lx, ly] : xy) {
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = m * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0))
    throw InsufficientData("fit_power_law: degenerate abscissae");
  fit.exponent = (m * sxy - sx * sy) / denom;
  const double intercept = (sy - fit.exponent * sx) / m;
  fit.amplitude = std::exp(intercept);
  double rss = 0.0;
  for (const auto& [lx, ly] : xy) {
    const double r = ly - (intercept + fit.exponent * lx);
    rss += r * r;
  }
  if (m > 2) fit.exponent_se = std::sqrt(rss / (m - 2) / (sxx - sx * sx / m));
  fit.points_used = m;
  return fit;
}

std::vector<std::pair<std::int64_t, double>> log_series(const IterateLog& log,
                                                        LogSeries which) {
  std::vector<std::pair<std::int64_t, double>> out;
  out.reserve(log.rows.size());
  for (const auto& row : log.rows)
    out.emplace_back(row.t, which == LogSeries::kGradSq ? row.grad_sq : row.delta_sq);
  return out;
}

RateFit rate_fit(const IterateLog& log, LogSeries which, std::int64_t t_min,
                 bool subtract_floor) {
  const auto series = log_series(log, which);
  if (series.empty()) throw InsufficientData("rate_fit: empty log");
  const auto points = tail_average_series(series, t_min, log.total_steps);
  if (points.size() < 10)
    throw InsufficientData("rate_fit has " + std::to_string(points.size()) +
                           " checkpoints (need >= 10)");
  return fit_power_law(points, subtract_floor);
}

}  // namespace ssac
