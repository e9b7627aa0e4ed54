#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "propproc/cox.hpp"
#include "propproc/diagnostics.hpp"
#include "propproc/matcher.hpp"
#include "propproc/process.hpp"
#include "propproc/registry.hpp"
#include "propproc/simgen.hpp"
#include "propproc/spline.hpp"

namespace propproc {

struct AnalysisOptions {
  int degree = 3;
  std::optional<std::vector<double>> interior_knots;  // default: quantile knots
  int n_interior_knots = 4;
  std::optional<double> lambda;  // default: GCV over the standard grid
  std::optional<std::vector<std::string>> tv_names;        // default: all
  std::optional<std::vector<std::string>> baseline_names;  // default: all
  int grid_cells = 200;
  std::optional<double> max_Q;
};

struct MethodArtifacts {
  Method method = Method::naive;
  std::optional<CoxModel> cox;
  std::vector<PropensityPath> paths;  // empty for naive
  std::optional<MatchSet> matches;
  std::vector<BalanceResult> balance;  // one row per covariate
  OutcomeResult outcome;
};

// Shared per-dataset state for the four comparator methods: splines and
// curves are method-independent; the full Cox fit is shared by the GPS and
// propensity-process methods.
class AnalysisSession {
 public:
  AnalysisSession(const Registry& reg, AnalysisOptions options);

  const std::vector<SplineModel>& spline_models();
  const CurveSet& curves();
  const CoxModel& cox_full();
  const CoxModel& cox_baseline();
  TimeGrid grid() const;

  MethodArtifacts run(Method method);

  // Unstratified balance tests over all covariates ("prior to matching").
  std::vector<BalanceResult> prior_balance();

  const Registry& registry() const { return reg_; }
  const AnalysisOptions& options() const { return options_; }
  std::vector<std::string> balance_covariates() const;

 private:
  const std::vector<PropensityPath>& paths_full();
  const std::vector<PropensityPath>& paths_baseline();
  ModelSpec full_spec() const;
  ModelSpec baseline_spec() const;

  const Registry& reg_;
  AnalysisOptions options_;
  std::optional<std::vector<SplineModel>> spline_models_;
  std::optional<CurveSet> curves_;
  std::optional<CoxModel> cox_full_;
  std::optional<CoxModel> cox_baseline_;
  std::optional<std::vector<PropensityPath>> paths_full_;
  std::optional<std::vector<PropensityPath>> paths_baseline_;
};

}  // namespace propproc
