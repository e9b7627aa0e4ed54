#include "propproc/pipeline.hpp"

#include <algorithm>

#include "propproc/errors.hpp"

namespace propproc {

namespace {

std::vector<int> resolve_names(const std::vector<std::string>& available,
                               const std::optional<std::vector<std::string>>& wanted,
                               const char* channel) {
  std::vector<int> out;
  if (!wanted) {
    out.resize(available.size());
    for (std::size_t i = 0; i < available.size(); ++i) out[i] = static_cast<int>(i);
    return out;
  }
  for (const auto& name : *wanted) {
    const auto it = std::find(available.begin(), available.end(), name);
    if (it == available.end()) {
      throw ConfigError(std::string(channel) + " covariate '" + name +
                        "' not present in registry");
    }
    out.push_back(static_cast<int>(it - available.begin()));
  }
  return out;
}

}  // namespace

AnalysisSession::AnalysisSession(const Registry& reg, AnalysisOptions options)
    : reg_(reg), options_(std::move(options)) {}

TimeGrid AnalysisSession::grid() const {
  return TimeGrid{reg_.horizon_L, options_.grid_cells};
}

ModelSpec AnalysisSession::full_spec() const {
  ModelSpec spec;
  spec.tv = resolve_names(reg_.covariate_names, options_.tv_names, "time-varying");
  spec.baseline = resolve_names(reg_.baseline_names, options_.baseline_names, "baseline");
  return spec;
}

ModelSpec AnalysisSession::baseline_spec() const {
  ModelSpec spec;
  spec.baseline = resolve_names(reg_.baseline_names, options_.baseline_names, "baseline");
  if (spec.baseline.empty()) {
    throw DataError(
        "propensity_function needs the baseline covariate channel, but the "
        "registry has no baseline covariates");
  }
  return spec;
}

const std::vector<SplineModel>& AnalysisSession::spline_models() {
  if (!spline_models_) {
    BasisSpec spec;
    if (options_.interior_knots) {
      spec.degree = options_.degree;
      spec.interior_knots = *options_.interior_knots;
      spec.boundary_lo = 0.0;
      spec.boundary_hi = reg_.horizon_L;
    } else {
      spec = default_basis(reg_, options_.degree, options_.n_interior_knots);
    }
    std::vector<SplineModel> models;
    for (std::size_t k = 0; k < reg_.covariate_names.size(); ++k) {
      models.push_back(options_.lambda
                           ? fit_covariate_model(reg_, static_cast<int>(k), spec,
                                                 *options_.lambda)
                           : fit_covariate_model_gcv(reg_, static_cast<int>(k), spec));
    }
    spline_models_ = std::move(models);
  }
  return *spline_models_;
}

const CurveSet& AnalysisSession::curves() {
  if (!curves_) curves_ = predict_curves(spline_models(), reg_);
  return *curves_;
}

const CoxModel& AnalysisSession::cox_full() {
  if (!cox_full_) {
    const ModelSpec spec = full_spec();
    const CurveSet* cv = spec.tv.empty() ? nullptr : &curves();
    cox_full_ = fit_cox(reg_, cv, spec);
  }
  return *cox_full_;
}

const CoxModel& AnalysisSession::cox_baseline() {
  if (!cox_baseline_) cox_baseline_ = fit_cox(reg_, nullptr, baseline_spec());
  return *cox_baseline_;
}

const std::vector<PropensityPath>& AnalysisSession::paths_full() {
  if (!paths_full_) {
    const CoxModel& model = cox_full();
    const CurveSet* cv = model.spec.tv.empty() ? nullptr : &curves();
    paths_full_ = build_paths(model, cv, reg_, grid());
  }
  return *paths_full_;
}

const std::vector<PropensityPath>& AnalysisSession::paths_baseline() {
  if (!paths_baseline_) {
    paths_baseline_ = build_paths(cox_baseline(), nullptr, reg_, grid());
  }
  return *paths_baseline_;
}

std::vector<std::string> AnalysisSession::balance_covariates() const {
  std::vector<std::string> out = reg_.covariate_names;
  out.insert(out.end(), reg_.baseline_names.begin(), reg_.baseline_names.end());
  return out;
}

std::vector<BalanceResult> AnalysisSession::prior_balance() {
  std::vector<BalanceResult> out;
  for (const auto& cov : balance_covariates()) {
    const bool tv = std::find(reg_.covariate_names.begin(), reg_.covariate_names.end(),
                              cov) != reg_.covariate_names.end();
    BalanceResult b = balance_test(reg_, tv ? &curves() : nullptr, cov, nullptr);
    b.method = "prior";
    out.push_back(std::move(b));
  }
  return out;
}

MethodArtifacts AnalysisSession::run(Method method) {
  MethodArtifacts art;
  art.method = method;

  if (method == Method::naive) {
    std::vector<double> treated, untreated;
    for (const auto& s : reg_.subjects) {
      if (!s.outcome) continue;
      (s.treated_before_L ? treated : untreated).push_back(*s.outcome);
    }
    if (treated.empty() || untreated.empty()) {
      throw DataError("naive comparison needs both treated and untreated outcomes");
    }
    art.outcome = wilcoxon_rank_sum(treated, untreated);
    art.outcome.method = "naive";
    art.balance = prior_balance();
    for (auto& b : art.balance) b.method = "naive";
    return art;
  }

  MatchOptions mopts;
  mopts.max_Q = options_.max_Q;
  const std::vector<PropensityPath>* paths = nullptr;
  switch (method) {
    case Method::propensity_function:
      art.cox = cox_baseline();
      paths = &paths_baseline();
      mopts.distance = MatchDistance::integrated_path;
      break;
    case Method::interpolated_gps:
      art.cox = cox_full();
      paths = &paths_full();
      mopts.distance = MatchDistance::at_event_time;
      break;
    case Method::propensity_process:
      art.cox = cox_full();
      paths = &paths_full();
      mopts.distance = MatchDistance::integrated_path;
      break;
    default:
      throw ConfigError("unknown method");
  }
  art.paths = *paths;
  art.matches = sequential_match(*paths, reg_, mopts);

  const std::string label = method_label(method);
  for (const auto& cov : balance_covariates()) {
    const bool tv = std::find(reg_.covariate_names.begin(), reg_.covariate_names.end(),
                              cov) != reg_.covariate_names.end();
    BalanceResult b = balance_test(reg_, tv ? &curves() : nullptr, cov, &*art.matches);
    b.method = label;
    art.balance.push_back(std::move(b));
  }

  std::vector<double> diffs;
  for (const auto& p : art.matches->pairs) {
    const int a = reg_.subject_index(p.treated_id);
    const int b = reg_.subject_index(p.control_id);
    const auto& ya = reg_.subjects[static_cast<std::size_t>(a)].outcome;
    const auto& yb = reg_.subjects[static_cast<std::size_t>(b)].outcome;
    if (ya && yb) diffs.push_back(*ya - *yb);
  }
  art.outcome = wilcoxon_signed_rank(diffs);
  art.outcome.method = label;
  return art;
}

}  // namespace propproc
