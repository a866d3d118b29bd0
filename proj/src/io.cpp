#include "ssac/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ssac/gradient.hpp"
#include "ssac/rng.hpp"

namespace ssac {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidModel("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidModel("cannot write file: " + path);
  out << text;
  if (!out) throw InvalidModel("write failed: " + path);
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw InvalidModel("matrix field must be a nonempty array");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols)
      throw InvalidModel("ragged matrix rows");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["mdp"] = {{"file", c.mdp.file},
              {"n_states", c.mdp.n_states},
              {"n_actions", c.mdp.n_actions},
              {"gamma", c.mdp.gamma},
              {"seed", c.mdp.seed},
              {"cost_scale", c.mdp.cost_scale}};
  const char* kind = c.features.kind == FeatureSpec::Kind::kTabular ? "tabular"
                     : c.features.kind == FeatureSpec::Kind::kFile  ? "file"
                                                                    : "random";
  j["features"] = {{"kind", kind},
                   {"path", c.features.path},
                   {"rank", c.features.rank},
                   {"seed", c.features.seed}};
  j["policy"] = {{"epsilon_floor", c.policy.epsilon_floor},
                 {"psi_file", c.policy.psi_file}};
  j["run"] = {{"total_steps", c.run.total_steps},
              {"actor_scale", c.run.actor_scale},
              {"omega_radius", c.run.omega_radius},
              {"alpha_scale", c.run.alpha_scale},
              {"diag_stride", c.run.diag_stride},
              {"seed", c.run.seed},
              {"critic_mode", c.run.critic_mode},
              {"burn_in", c.run.burn_in},
              {"rescale_actor", c.run.rescale_actor},
              {"freeze_actor", c.run.freeze_actor}};
  j["theta_grid"] = {{"count", c.theta_grid.count},
                     {"box", c.theta_grid.box},
                     {"seed", c.theta_grid.seed}};
  j["output_dir"] = c.output_dir;
  j["n_seeds"] = c.n_seeds;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  const json m = j.value("mdp", json::object());
  c.mdp.file = m.value("file", std::string());
  c.mdp.n_states = m.value("n_states", c.mdp.n_states);
  c.mdp.n_actions = m.value("n_actions", c.mdp.n_actions);
  c.mdp.gamma = m.value("gamma", c.mdp.gamma);
  c.mdp.seed = m.value("seed", c.mdp.seed);
  c.mdp.cost_scale = m.value("cost_scale", c.mdp.cost_scale);

  if (j.contains("features")) {
    const json& f = j.at("features");
    const std::string kind = f.value("kind", std::string("tabular"));
    if (kind == "tabular") c.features.kind = FeatureSpec::Kind::kTabular;
    else if (kind == "file") c.features.kind = FeatureSpec::Kind::kFile;
    else if (kind == "random") c.features.kind = FeatureSpec::Kind::kRandom;
    else throw InvalidModel("features.kind must be tabular, file, or random");
    c.features.path = f.value("path", std::string());
    c.features.rank = f.value("rank", c.features.rank);
    c.features.seed = f.value("seed", c.features.seed);
  }
  if (j.contains("policy")) {
    const json& p = j.at("policy");
    c.policy.epsilon_floor = p.value("epsilon_floor", c.policy.epsilon_floor);
    c.policy.psi_file = p.value("psi_file", std::string());
  }
  if (j.contains("run")) {
    const json& r = j.at("run");
    c.run.total_steps = r.value("total_steps", c.run.total_steps);
    c.run.actor_scale = r.value("actor_scale", c.run.actor_scale);
    c.run.omega_radius = r.value("omega_radius", c.run.omega_radius);
    c.run.alpha_scale = r.value("alpha_scale", c.run.alpha_scale);
    c.run.diag_stride = r.value("diag_stride", c.run.diag_stride);
    c.run.seed = r.value("seed", c.run.seed);
    c.run.critic_mode = r.value("critic_mode", c.run.critic_mode);
    c.run.burn_in = r.value("burn_in", c.run.burn_in);
    c.run.rescale_actor = r.value("rescale_actor", c.run.rescale_actor);
    c.run.freeze_actor = r.value("freeze_actor", c.run.freeze_actor);
  }
  if (j.contains("theta_grid")) {
    const json& g = j.at("theta_grid");
    c.theta_grid.count = g.value("count", c.theta_grid.count);
    c.theta_grid.box = g.value("box", c.theta_grid.box);
    c.theta_grid.seed = g.value("seed", c.theta_grid.seed);
  }
  c.output_dir = j.value("output_dir", c.output_dir);
  c.n_seeds = j.value("n_seeds", c.n_seeds);
  return c;
}

json rate_fit_to_json(const RateFit& f) {
  return {{"exponent", f.exponent},
          {"exponent_se", f.exponent_se},
          {"amplitude", f.amplitude},
          {"floor", f.floor},
          {"points_used", f.points_used}};
}

RateFit rate_fit_from_json(const json& j) {
  RateFit f;
  f.exponent = j.at("exponent").get<double>();
  f.exponent_se = j.at("exponent_se").get<double>();
  f.amplitude = j.at("amplitude").get<double>();
  f.floor = j.at("floor").get<double>();
  f.points_used = j.at("points_used").get<int>();
  return f;
}

json gains_to_json(const GainCoefficients& g) {
  return {{"a", g.a}, {"b", g.b}, {"c", g.c}, {"d", g.d}, {"e", g.e}};
}

GainCoefficients gains_from_json(const json& j) {
  GainCoefficients g;
  g.a = j.at("a").get<double>();
  g.b = j.at("b").get<double>();
  g.c = j.at("c").get<double>();
  g.d = j.at("d").get<double>();
  g.e = j.at("e").get<double>();
  return g;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (mdp.file.empty()) {
    if (mdp.n_states < 1) throw InvalidModel("mdp.n_states must be >= 1");
    if (mdp.n_actions < 1) throw InvalidModel("mdp.n_actions must be >= 1");
    if (!(mdp.gamma > 0.0 && mdp.gamma < 1.0))
      throw InvalidModel("mdp.gamma must lie in (0, 1)");
  } else if (!std::ifstream(mdp.file)) {
    throw InvalidModel("mdp.file does not exist: " + mdp.file);
  }
  if (features.kind == FeatureSpec::Kind::kFile && !std::ifstream(features.path))
    throw InvalidModel("features.path does not exist: " + features.path);
  if (features.kind == FeatureSpec::Kind::kRandom && features.rank < 1)
    throw InvalidModel("features.rank must be >= 1");
  if (!(policy.epsilon_floor >= 0.0 && policy.epsilon_floor < 1.0))
    throw InvalidModel("policy.epsilon_floor must lie in [0, 1)");
  if (!policy.psi_file.empty() && !std::ifstream(policy.psi_file))
    throw InvalidModel("policy.psi_file does not exist: " + policy.psi_file);
  if (run.total_steps < 2) throw InvalidModel("run.total_steps must be >= 2");
  if (run.diag_stride < 1) throw InvalidModel("run.diag_stride must be >= 1");
  if (run.critic_mode != "exact" && run.critic_mode != "rollout")
    throw InvalidModel("run.critic_mode must be exact or rollout");
  if (theta_grid.count < 2) throw InvalidModel("theta_grid.count must be >= 2");
  if (!(theta_grid.box > 0.0)) throw InvalidModel("theta_grid.box must be positive");
  if (n_seeds < 1) throw InvalidModel("n_seeds must be >= 1");
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InvalidModel(std::string("config parse error: ") + e.what());
  }
  return config_from_json(j);
}

std::string serialize_config(const ExperimentConfig& config) {
  return config_to_json(config).dump(2) + "\n";
}

ExperimentConfig load_config(const std::string& path) {
  return parse_config(read_file(path));
}

std::string config_hash(const ExperimentConfig& config) {
  // output_dir and n_seeds do not change the trajectory of any single run,
  // so logs stay comparable across output locations and seed-count choices.
  ExperimentConfig canonical = config;
  canonical.output_dir.clear();
  canonical.n_seeds = 1;
  const std::string canon = config_to_json(canonical).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

FiniteMdp load_mdp(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw InvalidModel("mdp parse error in " + path + ": " + e.what());
  }
  return FiniteMdp(j.at("n_states").get<int>(), j.at("n_actions").get<int>(),
                   matrix_from_json(j.at("transition")), vector_from_json(j.at("cost")),
                   j.at("c_max").get<double>(), j.at("gamma").get<double>(),
                   vector_from_json(j.at("eta")));
}

void save_mdp(const FiniteMdp& mdp, const std::string& path) {
  json j;
  j["n_states"] = mdp.n_states();
  j["n_actions"] = mdp.n_actions();
  j["gamma"] = mdp.gamma();
  j["c_max"] = mdp.c_max();
  j["transition"] = matrix_to_json(mdp.transition());
  j["cost"] = vector_to_json(mdp.cost());
  j["eta"] = vector_to_json(mdp.eta());
  write_file(path, j.dump(2) + "\n");
}

FeatureMatrix load_features(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw InvalidModel("feature parse error in " + path + ": " + e.what());
  }
  return FeatureMatrix(matrix_from_json(j.at("phi")));
}

void save_features(const FeatureMatrix& features, const std::string& path) {
  write_file(path, json{{"phi", matrix_to_json(features.phi())}}.dump(2) + "\n");
}

FeatureMatrix random_features(int n_sa, int rank, std::uint64_t seed) {
  if (rank < 1 || rank > n_sa)
    throw InvalidModel("random_features rank must lie in [1, n_sa]");
  Rng rng(mix_seed(seed, 0x66656174ULL));
  for (int attempt = 0; attempt < 64; ++attempt) {
    Eigen::MatrixXd phi(n_sa, rank);
    for (int i = 0; i < n_sa; ++i)
      for (int k = 0; k < rank; ++k) phi(i, k) = standard_normal(rng);
    for (int i = 0; i < n_sa; ++i) {
      const double norm = phi.row(i).norm();
      if (norm > 0.0) phi.row(i) /= norm;
    }
    if (phi.jacobiSvd().singularValues().minCoeff() > 1e-6) return FeatureMatrix(phi);
  }
  throw InvalidModel("random_features failed to draw independent columns");
}

std::vector<Eigen::VectorXd> make_theta_grid(const ThetaGridSpec& spec, int dim) {
  Rng rng(mix_seed(spec.seed, 0x67726964ULL));
  std::vector<Eigen::VectorXd> grid(spec.count);
  for (auto& theta : grid) {
    theta.resize(dim);
    for (int i = 0; i < dim; ++i) theta[i] = uniform_range(rng, -spec.box, spec.box);
  }
  return grid;
}

Instance build_instance(const ExperimentConfig& config) {
  config.validate();

  FiniteMdp mdp = config.mdp.file.empty()
                      ? random_mdp(config.mdp.n_states, config.mdp.n_actions,
                                   config.mdp.gamma, config.mdp.seed,
                                   config.mdp.cost_scale)
                      : load_mdp(config.mdp.file);

  FeatureMatrix features =
      config.features.kind == FeatureSpec::Kind::kTabular
          ? FeatureMatrix::tabular(mdp.n_sa())
          : (config.features.kind == FeatureSpec::Kind::kFile
                 ? load_features(config.features.path)
                 : random_features(mdp.n_sa(), config.features.rank,
                                   config.features.seed));
  if (features.phi().rows() != mdp.n_sa())
    throw InvalidModel("feature rows do not match the number of state-action pairs");

  SoftmaxPolicy policy_class = [&] {
    if (config.policy.psi_file.empty())
      return SoftmaxPolicy::tabular(mdp.n_states(), mdp.n_actions(),
                                    config.policy.epsilon_floor);
    json j;
    try {
      j = json::parse(read_file(config.policy.psi_file));
    } catch (const json::exception& e) {
      throw InvalidModel("psi parse error in " + config.policy.psi_file + ": " + e.what());
    }
    Eigen::MatrixXd psi = matrix_from_json(j.at("psi"));
    const Eigen::Index d = psi.cols();
    return SoftmaxPolicy(mdp.n_states(), mdp.n_actions(), std::move(psi),
                         Eigen::VectorXd::Zero(d), config.policy.epsilon_floor);
  }();

  std::vector<Eigen::VectorXd> grid =
      make_theta_grid(config.theta_grid, policy_class.dim());
  return Instance{std::move(mdp), std::move(policy_class), std::move(features),
                  std::move(grid)};
}

AcConfig build_ac_config(const ExperimentConfig& config, const Instance& instance,
                         int seed_index) {
  AcConfig ac;
  ac.total_steps = config.run.total_steps;
  ac.diag_stride = config.run.diag_stride;
  ac.sampler.seed = mix_seed(config.run.seed, 0x73656564ULL + seed_index);
  ac.sampler.critic_mode = config.run.critic_mode == "exact" ? CriticMode::kExact
                                                             : CriticMode::kRollout;
  ac.sampler.burn_in = config.run.burn_in;
  ac.sampler.rescale_actor = config.run.rescale_actor;
  ac.alpha_schedule = Schedule{Schedule::Kind::kInvSqrt, config.run.alpha_scale};

  double mu = 0.0, max_omega = 0.0;
  if (config.run.actor_scale < 0.0 || config.run.omega_radius < 0.0) {
    double min_margin = std::numeric_limits<double>::infinity();
    for (const auto& theta : instance.theta_grid) {
      const SoftmaxPolicy policy = instance.policy_class.with_theta(theta);
      const TdPair td = expected_td_pair(instance.mdp, policy, instance.features);
      min_margin = std::min(min_margin, exploration_margin(td));
      max_omega = std::max(max_omega, td_fixed_point(td).norm());
    }
    mu = 2.0 * min_margin;
    if (!(mu > 0.0))
      throw InvalidModel("cannot auto-derive step scale: nonpositive margin on the grid");
  }

  if (config.run.actor_scale < 0.0) {
    ConstantSet consts = estimate_constants(instance.mdp, instance.policy_class,
                                            instance.features, instance.theta_grid);
    ac.actor_scale = recommended_actor_scale(consts);
  } else {
    ac.actor_scale = config.run.actor_scale;
  }
  ac.omega_radius = config.run.omega_radius < 0.0
                        ? std::max((2.0 / mu) * instance.mdp.c_max(), 2.0 * max_omega)
                        : config.run.omega_radius;
  ac.beta_schedule = config.run.freeze_actor
                         ? Schedule{Schedule::Kind::kConstant, 0.0}
                         : Schedule{Schedule::Kind::kInvSqrt, ac.actor_scale};
  return ac;
}

void write_log_csv(const std::string& path, const IterateLog& log) {
  std::ostringstream out;
  out << "# seed=" << log.seed << "\n";
  out << "# config_hash=" << log.config_hash << "\n";
  out << "# total_steps=" << log.total_steps << "\n";
  out << "# diag_stride=" << log.diag_stride << "\n";
  out << "# oracle_samples=" << log.oracle_samples << "\n";
  out << "# mdp_transitions=" << log.mdp_transitions << "\n";
  out << "# empirical_l_omega=" << fmt(log.empirical_l_omega) << "\n";
  out << "# final_theta=";
  for (Eigen::Index i = 0; i < log.final_theta.size(); ++i)
    out << (i ? "," : "") << fmt(log.final_theta[i]);
  out << "\n# final_omega=";
  for (Eigen::Index i = 0; i < log.final_omega.size(); ++i)
    out << (i ? "," : "") << fmt(log.final_omega[i]);
  out << "\nt,grad_sq,delta_sq,value,omega_norm,theta_norm\n";
  for (const auto& row : log.rows)
    out << row.t << ',' << fmt(row.grad_sq) << ',' << fmt(row.delta_sq) << ','
        << fmt(row.value) << ',' << fmt(row.omega_norm) << ',' << fmt(row.theta_norm)
        << "\n";
  write_file(path, out.str());
}

namespace {

Eigen::VectorXd parse_csv_vector(const std::string& text) {
  if (text.empty()) return Eigen::VectorXd();
  std::vector<double> vals;
  std::istringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace

IterateLog read_log_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  IterateLog log;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      if (key == "seed") log.seed = std::stoull(value);
      else if (key == "config_hash") log.config_hash = value;
      else if (key == "total_steps") log.total_steps = std::stoll(value);
      else if (key == "diag_stride") log.diag_stride = std::stoll(value);
      else if (key == "oracle_samples") log.oracle_samples = std::stoll(value);
      else if (key == "mdp_transitions") log.mdp_transitions = std::stoll(value);
      else if (key == "empirical_l_omega") log.empirical_l_omega = std::stod(value);
      else if (key == "final_theta") log.final_theta = parse_csv_vector(value);
      else if (key == "final_omega") log.final_omega = parse_csv_vector(value);
      continue;
    }
    if (line.empty() || line[0] == 't') continue;  // header row
    DiagRow row;
    std::istringstream ls(line);
    std::string tok;
    std::getline(ls, tok, ','); row.t = std::stoll(tok);
    std::getline(ls, tok, ','); row.grad_sq = std::stod(tok);
    std::getline(ls, tok, ','); row.delta_sq = std::stod(tok);
    std::getline(ls, tok, ','); row.value = std::stod(tok);
    std::getline(ls, tok, ','); row.omega_norm = std::stod(tok);
    std::getline(ls, tok, ','); row.theta_norm = std::stod(tok);
    log.rows.push_back(row);
  }
  return log;
}

void write_run_summary(const std::string& path, const IterateLog& log) {
  json j;
  j["seed"] = log.seed;
  j["config_hash"] = log.config_hash;
  j["total_steps"] = log.total_steps;
  j["diag_stride"] = log.diag_stride;
  j["oracle_samples"] = log.oracle_samples;
  j["mdp_transitions"] = log.mdp_transitions;
  j["empirical_l_omega"] = log.empirical_l_omega;
  if (!log.rows.empty()) {
    j["final_grad_sq"] = log.rows.back().grad_sq;
    j["final_delta_sq"] = log.rows.back().delta_sq;
    j["final_value"] = log.rows.back().value;
  }
  write_file(path, j.dump(2) + "\n");
}

AssumptionReport make_assumption_report(const Instance& instance, double omega_radius) {
  AssumptionReport r;
  r.c_max_ok = instance.mdp.cost().cwiseAbs().maxCoeff() <= instance.mdp.c_max();
  r.features_ok = true;  // FeatureMatrix construction enforces the invariants
  r.omega_radius = omega_radius;

  double min_margin = std::numeric_limits<double>::infinity();
  double max_delta = 0.0, max_omega = 0.0;
  double max_slem = 0.0;
  std::int64_t max_tmix = 0;
  for (const auto& theta : instance.theta_grid) {
    const SoftmaxPolicy policy = instance.policy_class.with_theta(theta);
    const TdPair td = expected_td_pair(instance.mdp, policy, instance.features);
    min_margin = std::min(min_margin, exploration_margin(td));
    max_delta = std::max(max_delta,
                         approximation_error(instance.mdp, policy, instance.features));
    max_omega = std::max(max_omega, td_fixed_point(td).norm());
    const MixingDiagnostics mix = mixing_diagnostics(
        sa_transition_matrix(instance.mdp, policy.all_action_probs()));
    max_slem = std::max(max_slem, mix.slem);
    max_tmix = std::max(max_tmix, mix.t_mix);
  }
  r.mu_estimate = 2.0 * min_margin;
  r.delta_estimate = max_delta;
  r.slem = max_slem;
  r.t_mix = max_tmix;
  r.projection_ok = omega_radius > max_omega;

  const SmoothnessReport smooth =
      smoothness_report(instance.policy_class, instance.theta_grid);
  r.k_score = smooth.has_analytic ? std::max(smooth.k_score, smooth.k_analytic)
                                  : smooth.k_score;
  r.k_prime = smooth.k_prime;
  r.k_dprime = smooth.k_dprime;
  return r;
}

void write_assumption_report(const std::string& path, const AssumptionReport& r) {
  json j;
  j["c_max_ok"] = r.c_max_ok;
  j["mixing"] = {{"slem", r.slem}, {"t_mix", r.t_mix}};
  j["smoothness"] = {{"k", r.k_score}, {"k_prime", r.k_prime}, {"k_dprime", r.k_dprime}};
  j["features_ok"] = r.features_ok;
  j["delta_estimate"] = r.delta_estimate;
  j["mu_estimate"] = r.mu_estimate;
  j["projection_ok"] = r.projection_ok;
  j["omega_radius"] = r.omega_radius;
  write_file(path, j.dump(2) + "\n");
}

AssumptionReport read_assumption_report(const std::string& path) {
  const json j = json::parse(read_file(path));
  AssumptionReport r;
  r.c_max_ok = j.at("c_max_ok").get<bool>();
  r.slem = j.at("mixing").at("slem").get<double>();
  r.t_mix = j.at("mixing").at("t_mix").get<std::int64_t>();
  r.k_score = j.at("smoothness").at("k").get<double>();
  r.k_prime = j.at("smoothness").at("k_prime").get<double>();
  r.k_dprime = j.at("smoothness").at("k_dprime").get<double>();
  r.features_ok = j.at("features_ok").get<bool>();
  r.delta_estimate = j.at("delta_estimate").get<double>();
  r.mu_estimate = j.at("mu_estimate").get<double>();
  r.projection_ok = j.at("projection_ok").get<bool>();
  r.omega_radius = j.at("omega_radius").get<double>();
  return r;
}

void write_oracle_csv(const std::string& path, const Instance& instance) {
  std::ostringstream out;
  out << "index,margin,approx_error,omega_norm,slem\n";
  for (std::size_t i = 0; i < instance.theta_grid.size(); ++i) {
    const SoftmaxPolicy policy = instance.policy_class.with_theta(instance.theta_grid[i]);
    const TdPair td = expected_td_pair(instance.mdp, policy, instance.features);
    const MixingDiagnostics mix = mixing_diagnostics(
        sa_transition_matrix(instance.mdp, policy.all_action_probs()));
    out << i << ',' << fmt(exploration_margin(td)) << ','
        << fmt(approximation_error(instance.mdp, policy, instance.features)) << ','
        << fmt(td_fixed_point(td).norm()) << ',' << fmt(mix.slem) << "\n";
  }
  write_file(path, out.str());
}

void write_analysis_report(const std::string& path, const AnalysisReport& r) {
  json j;
  j["config_hash"] = r.config_hash;
  j["constants"] = {{"mu", r.constants.mu},
                    {"delta", r.constants.delta},
                    {"delta_bar", r.constants.delta_bar},
                    {"l_nabla", r.constants.l_nabla},
                    {"l_g", r.constants.l_g},
                    {"l_omega", r.constants.l_omega},
                    {"l_v", r.constants.l_v},
                    {"k", r.constants.k_score},
                    {"sigma_a2", r.constants.sigma_a2},
                    {"sigma_c2", r.constants.sigma_c2},
                    {"sigma_a4", r.constants.sigma_a4},
                    {"c_alpha", r.constants.c_alpha},
                    {"c_beta", r.constants.c_beta},
                    {"lambda_hess", r.constants.lambda_hess}};
  j["coefficients"] = {{"primary", gains_to_json(r.primary)},
                       {"variant", gains_to_json(r.variant)}};
  j["bound"] = r.bound;
  j["bound_finite"] = r.bound_finite;
  j["constraints"] = {{"ok", r.constraints.ok},
                      {"lhs", r.constraints.lhs},
                      {"step_constraint", r.constraints.step_constraint},
                      {"beta_side", r.constraints.beta_side},
                      {"alpha_side", r.constraints.alpha_side},
                      {"beta_lv", r.constraints.beta_lv},
                      {"cprime_ok", r.constraints.cprime_ok},
                      {"alt_side", r.constraints.alt_side}};
  if (r.has_grad_fit) j["grad_fit"] = rate_fit_to_json(r.grad_fit);
  if (r.has_delta_fit) j["delta_fit"] = rate_fit_to_json(r.delta_fit);
  j["tail_grad_sq"] = r.tail_grad_sq;
  j["tail_delta_sq"] = r.tail_delta_sq;
  write_file(path, j.dump(2) + "\n");
}

AnalysisReport read_analysis_report(const std::string& path) {
  const json j = json::parse(read_file(path));
  AnalysisReport r;
  r.config_hash = j.at("config_hash").get<std::string>();
  const json& c = j.at("constants");
  r.constants.mu = c.at("mu").get<double>();
  r.constants.delta = c.at("delta").get<double>();
  r.constants.delta_bar = c.at("delta_bar").get<double>();
  r.constants.l_nabla = c.at("l_nabla").get<double>();
  r.constants.l_g = c.at("l_g").get<double>();
  r.constants.l_omega = c.at("l_omega").get<double>();
  r.constants.l_v = c.at("l_v").get<double>();
  r.constants.k_score = c.at("k").get<double>();
  r.constants.sigma_a2 = c.at("sigma_a2").get<double>();
  r.constants.sigma_c2 = c.at("sigma_c2").get<double>();
  r.constants.sigma_a4 = c.at("sigma_a4").get<double>();
  r.constants.c_alpha = c.at("c_alpha").get<double>();
  r.constants.c_beta = c.at("c_beta").get<double>();
  r.constants.lambda_hess = c.at("lambda_hess").get<double>();
  r.primary = gains_from_json(j.at("coefficients").at("primary"));
  r.variant = gains_from_json(j.at("coefficients").at("variant"));
  r.bound = j.at("bound").get<double>();
  r.bound_finite = j.at("bound_finite").get<bool>();
  const json& k = j.at("constraints");
  r.constraints.ok = k.at("ok").get<bool>();
  r.constraints.lhs = k.at("lhs").get<double>();
  r.constraints.step_constraint = k.at("step_constraint").get<bool>();
  r.constraints.beta_side = k.at("beta_side").get<bool>();
  r.constraints.alpha_side = k.at("alpha_side").get<bool>();
  r.constraints.beta_lv = k.at("beta_lv").get<bool>();
  r.constraints.cprime_ok = k.at("cprime_ok").get<bool>();
  r.constraints.alt_side = k.at("alt_side").get<bool>();
  r.has_grad_fit = j.contains("grad_fit");
  if (r.has_grad_fit) r.grad_fit = rate_fit_from_json(j.at("grad_fit"));
  r.has_delta_fit = j.contains("delta_fit");
  if (r.has_delta_fit) r.delta_fit = rate_fit_from_json(j.at("delta_fit"));
  r.tail_grad_sq = j.at("tail_grad_sq").get<double>();
  r.tail_delta_sq = j.at("tail_delta_sq").get<double>();
  return r;
}

void write_plot_csv(const std::string& path, const std::vector<PlotRow>& rows) {
  std::ostringstream out;
  out << "t,tail_avg_grad_sq,tail_avg_delta_sq,predicted_bound\n";
  for (const auto& row : rows)
    out << row.t << ',' << fmt(row.tail_grad_sq) << ',' << fmt(row.tail_delta_sq) << ','
        << fmt(row.predicted_bound) << "\n";
  write_file(path, out.str());
}

std::vector<std::pair<std::int64_t, double>> median_series(
    const std::vector<IterateLog>& logs, LogSeries which) {
  if (logs.empty()) throw InsufficientData("median_series: no logs");
  const std::size_t n_rows = logs[0].rows.size();
  for (const auto& log : logs)
    if (log.rows.size() != n_rows)
      throw InvalidModel("median_series: logs have mismatched checkpoints");

  std::vector<std::pair<std::int64_t, double>> out;
  out.reserve(n_rows);
  std::vector<double> vals(logs.size());
  for (std::size_t i = 0; i < n_rows; ++i) {
    for (std::size_t s = 0; s < logs.size(); ++s) {
      const DiagRow& row = logs[s].rows[i];
      if (row.t != logs[0].rows[i].t)
        throw InvalidModel("median_series: logs have mismatched checkpoints");
      vals[s] = which == LogSeries::kGradSq ? row.grad_sq : row.delta_sq;
    }
    std::sort(vals.begin(), vals.end());
    const std::size_t m = vals.size();
    const double med = m % 2 ? vals[m / 2] : 0.5 * (vals[m / 2 - 1] + vals[m / 2]);
    out.emplace_back(logs[0].rows[i].t, med);
  }
  return out;
}

}  // namespace ssac
