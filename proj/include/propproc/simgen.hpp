#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "propproc/process.hpp"
#include "propproc/registry.hpp"

namespace propproc {

// Per-subject treatment-free trajectory x*(t) = a + b t + c t^2 with random
// coefficients.
struct TrajectorySpec {
  std::string name;
  double intercept_mean = 0.0, intercept_sd = 1.0;
  double slope_mean = 0.0, slope_sd = 0.0;
  double quad_mean = 0.0, quad_sd = 0.0;
};

struct BaselineSpec {
  std::string name;
  // "normal", "bernoulli", or "tv_at_zero" (the subject's x*_k(0) + noise)
  std::string dist = "normal";
  double mean = 0.0, sd = 1.0;  // normal
  double p = 0.5;               // bernoulli
  int covariate = 0;            // tv_at_zero source index
  double noise_sd = 0.0;        // tv_at_zero measurement noise
};

struct BaselineHazard {
  std::string type = "constant";  // "constant" | "linear" | "piecewise"
  double value = 1.0;             // constant
  double intercept = 0.0, slope = 0.0;  // linear, clamped at 0
  std::vector<double> times;      // piecewise breakpoints (ascending, from 0)
  std::vector<double> values;     // piecewise values

  double eval(double t) const;
};

struct VisitSchedule {
  std::string schedule = "poisson";  // "poisson" | "regular"
  double rate = 4.0;                 // poisson intensity
  double step = 0.25;                // regular spacing
  double jitter = 0.0;               // regular: uniform(-jitter, jitter)
};

struct OutcomeModel {
  // g depends on the treatment-free covariate history:
  //   "integral": sum_k w_k int_0^L x*_k(s) ds   (history-dependent)
  //   "endpoint": sum_k w_k x*_k(L)
  //   "none":     0
  std::string g = "integral";
  std::vector<double> weights;           // per time-varying covariate
  std::vector<double> baseline_weights;  // per baseline covariate (optional)
  double delta = 0.0;                    // true treatment effect
  double noise_sd = 1.0;
};

struct SimConfig {
  int n = 100;
  double L = 1.0;
  std::uint64_t seed = 0;
  std::string time_unit = "months";
  std::vector<TrajectorySpec> tv_covariates;
  std::vector<BaselineSpec> baseline_covariates;
  std::vector<double> beta_tv;
  std::vector<double> beta_baseline;
  BaselineHazard baseline_hazard;
  VisitSchedule visits;
  double missing_prob = 0.0;
  double measurement_sd = 0.0;
  OutcomeModel outcome;
  int sim_grid_cells = 2000;  // cumulative-hazard inversion resolution

  void validate() const;  // throws ConfigError naming the offending field
};

void to_json(nlohmann::json& j, const SimConfig& c);
void from_json(const nlohmann::json& j, SimConfig& c);

struct SubjectTruth {
  std::string id;
  std::vector<std::array<double, 3>> traj;  // (a, b, c) per tv covariate
  std::vector<double> baseline;
  double latent_T = 0.0;  // +inf when never treated
  double g_value = 0.0;
  double y_untreated = 0.0;  // Y*_{L+}
  double y_treated = 0.0;    // potential outcome under treatment before L
  double y_observed = 0.0;   // Y = Y*_U
};

struct SimTruth {
  std::vector<SubjectTruth> subjects;
};

// Treatment-free covariate value, linear predictor and hazard implied by the
// generating process (analytic, no estimation involved).
double true_covariate(const SimConfig& c, const SubjectTruth& s, int k, double t);
double true_linear_predictor(const SimConfig& c, const SubjectTruth& s, double t);
double true_hazard(const SimConfig& c, const SubjectTruth& s, double t);

// Hazard-scale path of the true process on a grid (for the density
// factorization checks).
PropensityPath true_hazard_path(const SimConfig& c, const SubjectTruth& s,
                                const TimeGrid& grid);

// Draws a registry from the hazard h0(t) exp(beta' x*(t)) by numerically
// inverting the cumulative hazard at an exponential(1) draw. Deterministic
// given (config, replicate); per-subject substreams keep draws stable across
// changes of n.
std::pair<Registry, SimTruth> simulate_registry(const SimConfig& config,
                                                std::uint64_t replicate = 0);

void write_truth_csv(const std::string& path, const SimConfig& config,
                     const SimTruth& truth);

struct DensityCheckReport {
  int n_draws = 0;
  int n_unresolved = 0;  // draws beyond the extended inversion horizon
  double ks_distance = 0.0;
};

// Compares the empirical distribution of sampled treatment times against the
// CDF obtained by numerically integrating theta(t) exp(-int theta). Requires a
// homogeneous hazard (all beta zero) so every subject shares one theta path.
DensityCheckReport sampler_density_check(const SimConfig& config, int n_draws);

// ---- four-way method comparison ------------------------------------------

enum class Method { naive, propensity_function, interpolated_gps, propensity_process };

std::string method_label(Method m);          // "naive" | "pf" | "gps" | "pp"
std::optional<Method> parse_method(const std::string& label);

struct MethodReplicate {
  int replicate = 0;
  Method method = Method::naive;
  bool usable = false;
  double estimate = 0.0;  // median difference, treated - control
  double bias = 0.0;      // estimate - delta
  double p_outcome = 1.0;
  int pairs = 0;          // 0 for naive
  std::map<std::string, double> balance_p;
  std::string error;      // populated when !usable
};

struct MethodAggregate {
  int n_used = 0;
  double mean_bias = 0.0;
  double mean_abs_bias = 0.0;
  double rejection_rate = 0.0;  // outcome test at alpha = 0.05
  double mean_pairs = 0.0;
  std::map<std::string, double> balance_reject_rate;
};

struct ComparisonResult {
  std::vector<Method> methods;
  std::vector<std::string> covariates;  // tv + baseline names
  std::vector<MethodReplicate> rows;
  std::map<Method, MethodAggregate> aggregate;
  std::map<std::string, double> prior_balance_reject_rate;
  double delta = 0.0;
  int replicates = 0;
};

struct AnalysisOptions;  // pipeline.hpp

ComparisonResult method_comparison(const SimConfig& config, int replicates,
                                   const std::vector<Method>& methods,
                                   const AnalysisOptions& options);

}  // namespace propproc
