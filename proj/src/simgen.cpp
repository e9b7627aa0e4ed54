#include "propproc/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "propproc/csv.hpp"
#include "propproc/errors.hpp"
#include "propproc/pipeline.hpp"
#include "propproc/rng.hpp"
#include "propproc/stats.hpp"

namespace propproc {

double BaselineHazard::eval(double t) const {
  if (type == "constant") return value;
  if (type == "linear") return std::max(0.0, intercept + slope * t);
  // piecewise: last segment extends beyond the final breakpoint
  double v = values.empty() ? 0.0 : values.front();
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (t >= times[i]) v = values[i];
  }
  return v;
}

void SimConfig::validate() const {
  if (n < 2) throw ConfigError("sim.n must be >= 2");
  if (!(L > 0.0)) throw ConfigError("sim.L must be positive");
  if (tv_covariates.empty()) throw ConfigError("sim.tv_covariates must be nonempty");
  if (beta_tv.size() != tv_covariates.size()) {
    throw ConfigError("sim.beta_tv length must match sim.tv_covariates");
  }
  if (beta_baseline.size() != baseline_covariates.size()) {
    throw ConfigError("sim.beta_baseline length must match sim.baseline_covariates");
  }
  if (missing_prob < 0.0 || missing_prob > 1.0) {
    throw ConfigError("sim.missing_prob must be in [0, 1]");
  }
  if (measurement_sd < 0.0) throw ConfigError("sim.measurement_sd must be >= 0");
  if (sim_grid_cells < 100) throw ConfigError("sim.sim_grid_cells must be >= 100");

  if (baseline_hazard.type == "constant") {
    if (!(baseline_hazard.value > 0.0)) {
      throw ConfigError("sim.baseline_hazard.value must be positive");
    }
  } else if (baseline_hazard.type == "linear") {
    if (baseline_hazard.intercept < 0.0) {
      throw ConfigError("sim.baseline_hazard.intercept must be >= 0");
    }
    if (baseline_hazard.intercept == 0.0 && baseline_hazard.slope <= 0.0) {
      throw ConfigError("sim.baseline_hazard: linear hazard must be positive somewhere");
    }
  } else if (baseline_hazard.type == "piecewise") {
    if (baseline_hazard.times.size() != baseline_hazard.values.size() ||
        baseline_hazard.times.empty()) {
      throw ConfigError("sim.baseline_hazard: times and values must align");
    }
    for (double v : baseline_hazard.values) {
      if (!(v > 0.0)) throw ConfigError("sim.baseline_hazard.values must be positive");
    }
    for (std::size_t i = 1; i < baseline_hazard.times.size(); ++i) {
      if (baseline_hazard.times[i] <= baseline_hazard.times[i - 1]) {
        throw ConfigError("sim.baseline_hazard.times must be increasing");
      }
    }
  } else {
    throw ConfigError("sim.baseline_hazard.type must be constant|linear|piecewise");
  }

  if (visits.schedule == "poisson") {
    if (!(visits.rate > 0.0)) throw ConfigError("sim.visits.rate must be positive");
  } else if (visits.schedule == "regular") {
    if (!(visits.step > 0.0)) throw ConfigError("sim.visits.step must be positive");
    if (visits.jitter < 0.0 || visits.jitter >= visits.step / 2.0) {
      throw ConfigError("sim.visits.jitter must be in [0, step/2)");
    }
  } else {
    throw ConfigError("sim.visits.schedule must be poisson|regular");
  }

  for (const auto& b : baseline_covariates) {
    if (b.dist == "normal") {
      if (b.sd < 0.0) throw ConfigError("sim.baseline_covariates.sd must be >= 0");
    } else if (b.dist == "bernoulli") {
      if (b.p < 0.0 || b.p > 1.0) throw ConfigError("sim.baseline_covariates.p in [0,1]");
    } else if (b.dist == "tv_at_zero") {
      if (b.covariate < 0 || b.covariate >= static_cast<int>(tv_covariates.size())) {
        throw ConfigError("sim.baseline_covariates.covariate index out of range");
      }
    } else {
      throw ConfigError("sim.baseline_covariates.dist must be normal|bernoulli|tv_at_zero");
    }
  }

  if (outcome.g != "integral" && outcome.g != "endpoint" && outcome.g != "none") {
    throw ConfigError("sim.outcome.g must be integral|endpoint|none");
  }
  if (outcome.g != "none" && outcome.weights.size() != tv_covariates.size()) {
    throw ConfigError("sim.outcome.weights length must match sim.tv_covariates");
  }
  if (!outcome.baseline_weights.empty() &&
      outcome.baseline_weights.size() != baseline_covariates.size()) {
    throw ConfigError("sim.outcome.baseline_weights length must match baseline_covariates");
  }
  if (outcome.noise_sd < 0.0) throw ConfigError("sim.outcome.noise_sd must be >= 0");
}

double true_covariate(const SimConfig&, const SubjectTruth& s, int k, double t) {
  const auto& c = s.traj[static_cast<std::size_t>(k)];
  return c[0] + c[1] * t + c[2] * t * t;
}

double true_linear_predictor(const SimConfig& c, const SubjectTruth& s, double t) {
  double eta = 0.0;
  for (std::size_t k = 0; k < c.beta_tv.size(); ++k) {
    eta += c.beta_tv[k] * true_covariate(c, s, static_cast<int>(k), t);
  }
  for (std::size_t b = 0; b < c.beta_baseline.size(); ++b) {
    eta += c.beta_baseline[b] * s.baseline[b];
  }
  return eta;
}

double true_hazard(const SimConfig& c, const SubjectTruth& s, double t) {
  return c.baseline_hazard.eval(t) * std::exp(true_linear_predictor(c, s, t));
}

PropensityPath true_hazard_path(const SimConfig& c, const SubjectTruth& s,
                                const TimeGrid& grid) {
  PropensityPath p;
  p.subject_id = s.id;
  p.grid = grid;
  p.valid_until_native = grid.horizon;
  p.values.resize(static_cast<std::size_t>(grid.n_points()));
  for (int g = 0; g < grid.n_points(); ++g) {
    p.values[static_cast<std::size_t>(g)] = true_hazard(c, s, grid.point(g));
  }
  return p;
}

namespace {

std::string subject_id(int i, int n) {
  int width = 1;
  for (int v = n - 1; v >= 10; v /= 10) ++width;
  width = std::max(width, 4);
  std::ostringstream os;
  os << "S";
  std::string digits = std::to_string(i);
  os << std::string(static_cast<std::size_t>(width) - digits.size(), '0') << digits;
  return os.str();
}

// Inverse-transform sampling: walk the cumulative hazard on a fine grid
// (trapezoid increments, linear inversion inside the bracketing cell). The
// grid extends beyond L in chunks until the exponential draw is covered; a
// plateauing hazard resolves to +inf.
double invert_cumulative_hazard(const SimConfig& c, const SubjectTruth& s,
                                double target) {
  const double step = c.L / static_cast<double>(c.sim_grid_cells);
  double t = 0.0;
  double H = 0.0;
  double h_prev = true_hazard(c, s, 0.0);
  const int max_chunks = 64;
  for (int chunk = 0; chunk < max_chunks; ++chunk) {
    const double chunk_start_H = H;
    for (int g = 0; g < c.sim_grid_cells; ++g) {
      const double t_next = t + step;
      const double h_next = true_hazard(c, s, t_next);
      const double dH = 0.5 * step * (h_prev + h_next);
      if (H + dH >= target) {
        if (dH <= 0.0) return t;
        return t + step * (target - H) / dH;
      }
      H += dH;
      t = t_next;
      h_prev = h_next;
    }
    if (H - chunk_start_H < 1e-13 * (1.0 + H)) break;  // hazard has died out
  }
  return std::numeric_limits<double>::infinity();
}

double history_integral(const SimConfig& c, const SubjectTruth& s, int k) {
  const auto& coef = s.traj[static_cast<std::size_t>(k)];
  const double L = c.L;
  return coef[0] * L + coef[1] * L * L / 2.0 + coef[2] * L * L * L / 3.0;
}

double outcome_signal(const SimConfig& c, const SubjectTruth& s) {
  double g = 0.0;
  if (c.outcome.g == "integral") {
    for (std::size_t k = 0; k < c.tv_covariates.size(); ++k) {
      g += c.outcome.weights[k] * history_integral(c, s, static_cast<int>(k));
    }
  } else if (c.outcome.g == "endpoint") {
    for (std::size_t k = 0; k < c.tv_covariates.size(); ++k) {
      g += c.outcome.weights[k] * true_covariate(c, s, static_cast<int>(k), c.L);
    }
  }
  for (std::size_t b = 0; b < c.outcome.baseline_weights.size(); ++b) {
    g += c.outcome.baseline_weights[b] * s.baseline[b];
  }
  return g;
}

std::vector<double> draw_visit_times(const SimConfig& c, std::mt19937_64& gen,
                                     double U) {
  std::vector<double> times = {0.0};
  if (c.visits.schedule == "poisson") {
    double t = rng::exponential(gen, c.visits.rate);
    while (t <= U) {
      times.push_back(t);
      t += rng::exponential(gen, c.visits.rate);
    }
  } else {
    for (int k = 1;; ++k) {
      const double base = static_cast<double>(k) * c.visits.step;
      if (base > U + c.visits.jitter) break;
      const double jit = c.visits.jitter > 0.0
                             ? (2.0 * rng::uniform01(gen) - 1.0) * c.visits.jitter
                             : 0.0;
      const double t = base + jit;
      if (t > 0.0 && t <= U) times.push_back(t);
    }
  }
  return times;
}

}  // namespace

std::pair<Registry, SimTruth> simulate_registry(const SimConfig& config,
                                                std::uint64_t replicate) {
  config.validate();
  const int n = config.n;
  const std::size_t p = config.tv_covariates.size();
  const std::size_t p0 = config.baseline_covariates.size();

  Registry reg;
  reg.horizon_L = config.L;
  reg.time_unit = config.time_unit;
  for (const auto& tc : config.tv_covariates) reg.covariate_names.push_back(tc.name);
  for (const auto& bc : config.baseline_covariates) {
    reg.baseline_names.push_back(bc.name);
  }

  SimTruth truth;
  truth.subjects.reserve(static_cast<std::size_t>(n));

  for (int i = 0; i < n; ++i) {
    SubjectTruth st;
    st.id = subject_id(i, n);

    auto traj_gen = rng::substream(config.seed, replicate, static_cast<std::uint64_t>(i),
                                   rng::Purpose::Trajectory);
    for (const auto& tc : config.tv_covariates) {
      std::array<double, 3> coef{};
      coef[0] = rng::normal(traj_gen, tc.intercept_mean, tc.intercept_sd);
      coef[1] = rng::normal(traj_gen, tc.slope_mean, tc.slope_sd);
      coef[2] = rng::normal(traj_gen, tc.quad_mean, tc.quad_sd);
      st.traj.push_back(coef);
    }

    auto base_gen = rng::substream(config.seed, replicate, static_cast<std::uint64_t>(i),
                                   rng::Purpose::Baseline);
    for (const auto& bc : config.baseline_covariates) {
      double v = 0.0;
      if (bc.dist == "normal") {
        v = rng::normal(base_gen, bc.mean, bc.sd);
      } else if (bc.dist == "bernoulli") {
        v = rng::uniform01(base_gen) < bc.p ? 1.0 : 0.0;
      } else {  // tv_at_zero
        v = true_covariate(config, st, bc.covariate, 0.0);
        if (bc.noise_sd > 0.0) v += rng::normal(base_gen, 0.0, bc.noise_sd);
      }
      st.baseline.push_back(v);
    }

    // Treatment time from the hazard; this stream never touches outcomes.
    auto treat_gen = rng::substream(config.seed, replicate, static_cast<std::uint64_t>(i),
                                    rng::Purpose::Treatment);
    const double e = rng::exponential(treat_gen, 1.0);
    st.latent_T = invert_cumulative_hazard(config, st, e);
    const bool treated = st.latent_T < config.L;
    const double U = treated ? st.latent_T : config.L;

    auto outcome_gen = rng::substream(config.seed, replicate, static_cast<std::uint64_t>(i),
                                      rng::Purpose::Outcome);
    const double noise = config.outcome.noise_sd > 0.0
                             ? rng::normal(outcome_gen, 0.0, config.outcome.noise_sd)
                             : 0.0;
    st.g_value = outcome_signal(config, st);
    st.y_untreated = st.g_value + noise;
    st.y_treated = st.g_value + config.outcome.delta + noise;
    st.y_observed = treated ? st.y_treated : st.y_untreated;

    Subject subj;
    subj.id = st.id;
    if (std::isfinite(st.latent_T) && st.latent_T < config.L) {
      subj.treatment_time = st.latent_T;
    }
    subj.outcome = st.y_observed;
    subj.baseline = st.baseline;

    auto visit_gen = rng::substream(config.seed, replicate, static_cast<std::uint64_t>(i),
                                    rng::Purpose::Visits);
    const std::vector<double> times = draw_visit_times(config, visit_gen, U);

    auto meas_gen = rng::substream(config.seed, replicate, static_cast<std::uint64_t>(i),
                                   rng::Purpose::Measurement);
    std::vector<Visit> vis;
    for (std::size_t v = 0; v < times.size(); ++v) {
      Visit visit;
      visit.time = times[v];
      visit.values.resize(p);
      for (std::size_t k = 0; k < p; ++k) {
        // the baseline visit is always fully observed
        const bool missing =
            v > 0 && config.missing_prob > 0.0 && rng::uniform01(meas_gen) < config.missing_prob;
        if (missing) {
          visit.values[k] = std::nan("");
          continue;
        }
        double x = true_covariate(config, st, static_cast<int>(k), times[v]);
        if (config.measurement_sd > 0.0) {
          x += rng::normal(meas_gen, 0.0, config.measurement_sd);
        }
        visit.values[k] = x;
      }
      vis.push_back(std::move(visit));
    }

    reg.subjects.push_back(std::move(subj));
    reg.visits.push_back(std::move(vis));
    truth.subjects.push_back(std::move(st));
  }
  (void)p0;

  finalize_registry(reg, /*truncate_at_U=*/false);
  return {std::move(reg), std::move(truth)};
}

void write_truth_csv(const std::string& path, const SimConfig& config,
                     const SimTruth& truth) {
  std::vector<std::string> header = {"id",        "latent_T",    "treated",
                                     "g_value",   "y_untreated", "y_treated",
                                     "y_observed"};
  for (const auto& tc : config.tv_covariates) {
    header.push_back(tc.name + "_a");
    header.push_back(tc.name + "_b");
    header.push_back(tc.name + "_c");
  }
  for (const auto& bc : config.baseline_covariates) header.push_back(bc.name);

  std::vector<std::vector<std::string>> rows;
  for (const auto& s : truth.subjects) {
    std::vector<std::string> row = {
        s.id,
        std::isfinite(s.latent_T) ? csv::format_double(s.latent_T) : "",
        (std::isfinite(s.latent_T) && s.latent_T < config.L) ? "1" : "0",
        csv::format_double(s.g_value),
        csv::format_double(s.y_untreated),
        csv::format_double(s.y_treated),
        csv::format_double(s.y_observed)};
    for (const auto& coef : s.traj) {
      row.push_back(csv::format_double(coef[0]));
      row.push_back(csv::format_double(coef[1]));
      row.push_back(csv::format_double(coef[2]));
    }
    for (double b : s.baseline) row.push_back(csv::format_double(b));
    rows.push_back(std::move(row));
  }
  csv::write(path, header, rows);
}

DensityCheckReport sampler_density_check(const SimConfig& config, int n_draws) {
  DensityCheckReport rep;
  if (n_draws <= 0) return rep;
  config.validate();
  for (double b : config.beta_tv) {
    if (b != 0.0) throw ConfigError("sampler_density_check requires beta_tv == 0");
  }
  for (double b : config.beta_baseline) {
    if (b != 0.0) throw ConfigError("sampler_density_check requires beta_baseline == 0");
  }

  // With beta = 0 every subject shares theta(t) = h0(t); draw one time per
  // synthetic subject using the treatment substream.
  SubjectTruth proto;
  proto.traj.assign(config.tv_covariates.size(), {0.0, 0.0, 0.0});
  proto.baseline.assign(config.baseline_covariates.size(), 0.0);

  std::vector<double> draws;
  draws.reserve(static_cast<std::size_t>(n_draws));
  for (int i = 0; i < n_draws; ++i) {
    auto gen = rng::substream(config.seed, 0, static_cast<std::uint64_t>(i),
                              rng::Purpose::Treatment);
    const double e = rng::exponential(gen, 1.0);
    const double t = invert_cumulative_hazard(config, proto, e);
    if (std::isfinite(t)) draws.push_back(t);
    else ++rep.n_unresolved;
  }
  rep.n_draws = static_cast<int>(draws.size());
  if (draws.empty()) return rep;

  const double t_max = *std::max_element(draws.begin(), draws.end()) * 1.05 + 1e-9;
  TimeGrid grid{t_max, std::max(2000, config.sim_grid_cells)};
  const PropensityPath theta = true_hazard_path(config, proto, grid);

  // F(t) by trapezoid integration of the factorized density.
  std::vector<double> density(static_cast<std::size_t>(grid.n_points()));
  for (int g = 0; g < grid.n_points(); ++g) {
    density[static_cast<std::size_t>(g)] =
        density_factorization_check(theta, grid.point(g));
  }
  std::vector<double> cdf(density.size(), 0.0);
  for (std::size_t g = 1; g < density.size(); ++g) {
    cdf[g] = cdf[g - 1] + 0.5 * grid.step() * (density[g - 1] + density[g]);
  }
  auto cdf_at = [&](double t) {
    const double pos = std::clamp(t, 0.0, t_max) / grid.step();
    const int g = std::min(static_cast<int>(pos), grid.cells - 1);
    const double w = pos - g;
    return (1.0 - w) * cdf[static_cast<std::size_t>(g)] +
           w * cdf[static_cast<std::size_t>(g) + 1];
  };
  rep.ks_distance = stats::ks_distance(draws, cdf_at);
  return rep;
}

std::string method_label(Method m) {
  switch (m) {
    case Method::naive: return "naive";
    case Method::propensity_function: return "pf";
    case Method::interpolated_gps: return "gps";
    case Method::propensity_process: return "pp";
  }
  return "?";
}

std::optional<Method> parse_method(const std::string& label) {
  if (label == "naive") return Method::naive;
  if (label == "pf" || label == "propensity_function") return Method::propensity_function;
  if (label == "gps" || label == "interpolated_gps") return Method::interpolated_gps;
  if (label == "pp" || label == "propensity_process") return Method::propensity_process;
  return std::nullopt;
}

ComparisonResult method_comparison(const SimConfig& config, int replicates,
                                   const std::vector<Method>& methods,
                                   const AnalysisOptions& options) {
  if (replicates < 1) throw ConfigError("compare.replicates must be >= 1");
  ComparisonResult result;
  result.methods = methods;
  result.delta = config.outcome.delta;
  result.replicates = replicates;

  std::map<std::string, int> prior_reject;
  std::map<Method, std::map<std::string, int>> balance_reject;
  std::map<Method, int> balance_n;
  int prior_n = 0;

  for (int r = 0; r < replicates; ++r) {
    auto [reg, truth] = simulate_registry(config, static_cast<std::uint64_t>(r));
    AnalysisSession session(reg, options);
    if (result.covariates.empty()) result.covariates = session.balance_covariates();

    try {
      for (const auto& b : session.prior_balance()) {
        if (b.p_value < 0.05) ++prior_reject[b.covariate];
      }
      ++prior_n;
    } catch (const Error&) {
      // a replicate without events contributes nothing to the prior column
    }

    for (Method m : methods) {
      MethodReplicate row;
      row.replicate = r;
      row.method = m;
      try {
        MethodArtifacts art = session.run(m);
        row.usable = true;
        row.estimate = art.outcome.median_difference;
        row.bias = row.estimate - config.outcome.delta;
        row.p_outcome = art.outcome.p_value;
        row.pairs = art.matches ? art.matches->M() : 0;
        for (const auto& b : art.balance) {
          row.balance_p[b.covariate] = b.p_value;
          if (b.p_value < 0.05) ++balance_reject[m][b.covariate];
        }
        ++balance_n[m];
      } catch (const Error& e) {
        row.usable = false;
        row.error = e.what();
      }
      result.rows.push_back(std::move(row));
    }
  }

  for (Method m : methods) {
    MethodAggregate agg;
    double bias_sum = 0.0, abs_sum = 0.0, pairs_sum = 0.0;
    int rejected = 0;
    for (const auto& row : result.rows) {
      if (row.method != m || !row.usable) continue;
      ++agg.n_used;
      bias_sum += row.bias;
      abs_sum += std::abs(row.bias);
      pairs_sum += row.pairs;
      if (row.p_outcome < 0.05) ++rejected;
    }
    if (agg.n_used > 0) {
      agg.mean_bias = bias_sum / agg.n_used;
      agg.mean_abs_bias = abs_sum / agg.n_used;
      agg.rejection_rate = static_cast<double>(rejected) / agg.n_used;
      agg.mean_pairs = pairs_sum / agg.n_used;
      for (const auto& [cov, cnt] : balance_reject[m]) {
        agg.balance_reject_rate[cov] =
            static_cast<double>(cnt) / std::max(1, balance_n[m]);
      }
      for (const auto& cov : result.covariates) {
        agg.balance_reject_rate.try_emplace(cov, 0.0);
      }
    }
    result.aggregate[m] = std::move(agg);
  }
  for (const auto& cov : result.covariates) {
    const auto it = prior_reject.find(cov);
    result.prior_balance_reject_rate[cov] =
        prior_n > 0 ? static_cast<double>(it == prior_reject.end() ? 0 : it->second) /
                          prior_n
                    : 0.0;
  }
  return result;
}

// ---- JSON ------------------------------------------------------------------

void to_json(nlohmann::json& j, const SimConfig& c) {
  nlohmann::json tv = nlohmann::json::array();
  for (const auto& t : c.tv_covariates) {
    tv.push_back({{"name", t.name},
                  {"intercept", {{"mean", t.intercept_mean}, {"sd", t.intercept_sd}}},
                  {"slope", {{"mean", t.slope_mean}, {"sd", t.slope_sd}}},
                  {"quad", {{"mean", t.quad_mean}, {"sd", t.quad_sd}}}});
  }
  nlohmann::json bl = nlohmann::json::array();
  for (const auto& b : c.baseline_covariates) {
    nlohmann::json e = {{"name", b.name}, {"dist", b.dist}};
    if (b.dist == "normal") {
      e["mean"] = b.mean;
      e["sd"] = b.sd;
    } else if (b.dist == "bernoulli") {
      e["p"] = b.p;
    } else {
      e["covariate"] = b.covariate;
      e["noise_sd"] = b.noise_sd;
    }
    bl.push_back(std::move(e));
  }
  nlohmann::json hz = {{"type", c.baseline_hazard.type}};
  if (c.baseline_hazard.type == "constant") hz["value"] = c.baseline_hazard.value;
  if (c.baseline_hazard.type == "linear") {
    hz["intercept"] = c.baseline_hazard.intercept;
    hz["slope"] = c.baseline_hazard.slope;
  }
  if (c.baseline_hazard.type == "piecewise") {
    hz["times"] = c.baseline_hazard.times;
    hz["values"] = c.baseline_hazard.values;
  }
  nlohmann::json vis = {{"schedule", c.visits.schedule}};
  if (c.visits.schedule == "poisson") vis["rate"] = c.visits.rate;
  else {
    vis["step"] = c.visits.step;
    vis["jitter"] = c.visits.jitter;
  }
  j = nlohmann::json{{"n", c.n},
                     {"L", c.L},
                     {"seed", c.seed},
                     {"time_unit", c.time_unit},
                     {"tv_covariates", std::move(tv)},
                     {"baseline_covariates", std::move(bl)},
                     {"beta_tv", c.beta_tv},
                     {"beta_baseline", c.beta_baseline},
                     {"baseline_hazard", std::move(hz)},
                     {"visits", std::move(vis)},
                     {"missing_prob", c.missing_prob},
                     {"measurement_sd", c.measurement_sd},
                     {"outcome",
                      {{"g", c.outcome.g},
                       {"weights", c.outcome.weights},
                       {"baseline_weights", c.outcome.baseline_weights},
                       {"delta", c.outcome.delta},
                       {"noise_sd", c.outcome.noise_sd}}},
                     {"sim_grid_cells", c.sim_grid_cells}};
}

void from_json(const nlohmann::json& j, SimConfig& c) {
  c = SimConfig{};
  c.n = j.at("n").get<int>();
  c.L = j.at("L").get<double>();
  c.seed = j.value("seed", std::uint64_t{0});
  c.time_unit = j.value("time_unit", std::string("months"));
  for (const auto& e : j.at("tv_covariates")) {
    TrajectorySpec t;
    t.name = e.at("name").get<std::string>();
    if (e.contains("intercept")) {
      t.intercept_mean = e["intercept"].value("mean", 0.0);
      t.intercept_sd = e["intercept"].value("sd", 0.0);
    }
    if (e.contains("slope")) {
      t.slope_mean = e["slope"].value("mean", 0.0);
      t.slope_sd = e["slope"].value("sd", 0.0);
    }
    if (e.contains("quad")) {
      t.quad_mean = e["quad"].value("mean", 0.0);
      t.quad_sd = e["quad"].value("sd", 0.0);
    }
    c.tv_covariates.push_back(std::move(t));
  }
  for (const auto& e : j.value("baseline_covariates", nlohmann::json::array())) {
    BaselineSpec b;
    b.name = e.at("name").get<std::string>();
    b.dist = e.value("dist", std::string("normal"));
    b.mean = e.value("mean", 0.0);
    b.sd = e.value("sd", 1.0);
    b.p = e.value("p", 0.5);
    b.covariate = e.value("covariate", 0);
    b.noise_sd = e.value("noise_sd", 0.0);
    c.baseline_covariates.push_back(std::move(b));
  }
  c.beta_tv = j.at("beta_tv").get<std::vector<double>>();
  c.beta_baseline =
      j.value("beta_baseline", std::vector<double>(c.baseline_covariates.size(), 0.0));
  const auto& hz = j.at("baseline_hazard");
  c.baseline_hazard.type = hz.at("type").get<std::string>();
  c.baseline_hazard.value = hz.value("value", 1.0);
  c.baseline_hazard.intercept = hz.value("intercept", 0.0);
  c.baseline_hazard.slope = hz.value("slope", 0.0);
  c.baseline_hazard.times = hz.value("times", std::vector<double>{});
  c.baseline_hazard.values = hz.value("values", std::vector<double>{});
  if (j.contains("visits")) {
    const auto& vis = j["visits"];
    c.visits.schedule = vis.value("schedule", std::string("poisson"));
    c.visits.rate = vis.value("rate", 4.0);
    c.visits.step = vis.value("step", 0.25);
    c.visits.jitter = vis.value("jitter", 0.0);
  }
  c.missing_prob = j.value("missing_prob", 0.0);
  c.measurement_sd = j.value("measurement_sd", 0.0);
  if (j.contains("outcome")) {
    const auto& o = j["outcome"];
    c.outcome.g = o.value("g", std::string("integral"));
    c.outcome.weights = o.value("weights", std::vector<double>{});
    c.outcome.baseline_weights = o.value("baseline_weights", std::vector<double>{});
    c.outcome.delta = o.value("delta", 0.0);
    c.outcome.noise_sd = o.value("noise_sd", 1.0);
  }
  if (c.outcome.g != "none" && c.outcome.weights.empty()) {
    c.outcome.weights.assign(c.tv_covariates.size(), 0.0);
  }
  c.sim_grid_cells = j.value("sim_grid_cells", 2000);
}

}  // namespace propproc
