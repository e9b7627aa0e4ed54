#pragma once

#include <string>
#include <vector>

#include "propproc/matcher.hpp"
#include "propproc/registry.hpp"
#include "propproc/spline.hpp"

namespace propproc {

struct BalanceResult {
  std::string covariate;
  std::string method;  // filled by the caller; defaults to the strata mode
  double statistic = 0.0;  // chi-square on 1 df
  double p_value = 1.0;
  int n_events_used = 0;
};

// Score test at beta = 0 of a univariate proportional-hazards model for
// time-to-treatment on one covariate. Unstratified over the full registry
// when strata is null; otherwise risk sets form within each matched pair and
// events outside pairs are ignored. For a binary covariate this is the
// (stratified) log-rank test. Time-varying covariates evaluate from `curves`
// at each event time; baseline covariates do not need curves.
BalanceResult balance_test(const Registry& reg, const CurveSet* curves,
                           const std::string& covariate,
                           const MatchSet* strata = nullptr);

struct OutcomeResult {
  std::string method;
  double median_difference = 0.0;
  double p_value = 1.0;
  double statistic = 0.0;  // W+ (signed rank) or rank sum of group a
  int n = 0;               // pairs (signed rank) or combined size (rank sum)
  int n_a = 0;
  int n_b = 0;
  bool exact = false;
};

// Two-sided signed-rank test on pair differences. Exact enumeration for up to
// 20 nonzero differences (zeros dropped, average ranks for ties), normal
// approximation with continuity and tie corrections beyond. All differences
// zero gives p = 1.
OutcomeResult wilcoxon_signed_rank(const std::vector<double>& diffs);

// Two-sided rank-sum test. Exact for combined size <= 12, normal
// approximation with tie correction beyond.
OutcomeResult wilcoxon_rank_sum(const std::vector<double>& group_a,
                                const std::vector<double>& group_b);

}  // namespace propproc
