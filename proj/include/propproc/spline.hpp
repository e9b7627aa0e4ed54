#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "propproc/registry.hpp"

namespace propproc {

// Truncated-power basis on [boundary_lo, boundary_hi]:
//   b(t) = (1, t, ..., t^degree, (t - k1)_+^degree, ..., (t - kK)_+^degree)
struct BasisSpec {
  int degree = 3;
  std::vector<double> interior_knots;  // strictly increasing, inside (lo, hi)
  double boundary_lo = 0.0;
  double boundary_hi = 1.0;

  int dim() const { return degree + 1 + static_cast<int>(interior_knots.size()); }
};

// Default spec: interior knots at quantiles of the pooled visit times.
BasisSpec default_basis(const Registry& reg, int degree = 3, int n_interior = 4);

Eigen::VectorXd basis_eval(double t, const BasisSpec& spec);

struct SplineModel {
  int covariate = 0;  // index k into Registry::covariate_names
  BasisSpec basis;
  Eigen::VectorXd fixed;                          // gamma_k
  std::map<std::string, Eigen::VectorXd> random;  // alpha_ik keyed by subject id
  double noise_var = 0.0;                         // sigma2_k
  double lambda = 1.0;                            // ridge penalty used
};

void to_json(nlohmann::json& j, const SplineModel& m);
void from_json(const nlohmann::json& j, SplineModel& m);

// Per-subject ridge step: argmin ||resid - B a||^2 + lambda ||a||^2.
Eigen::VectorXd ridge_random_effect(const Eigen::MatrixXd& B,
                                    const Eigen::VectorXd& resid, double lambda);

// Two-stage estimator: pooled least squares for the fixed coefficients,
// per-subject ridge on the residuals for the random ones. Subjects with no
// observations of covariate k get a zero random vector.
SplineModel fit_covariate_model(const Registry& reg, int k, const BasisSpec& spec,
                                double lambda);

const std::vector<double>& default_gcv_grid();  // {1e-3, ..., 1e3}

// Same estimator with lambda chosen by generalized cross-validation over a
// fixed grid (deterministic given the data; smallest minimizer wins ties).
SplineModel fit_covariate_model_gcv(
    const Registry& reg, int k, const BasisSpec& spec,
    const std::vector<double>& grid = default_gcv_grid());

// Interpolated treatment-free covariate curves, one per (subject, covariate).
class CurveSet {
 public:
  CurveSet() = default;
  CurveSet(std::vector<SplineModel> models, const Registry& reg);

  // full_domain=false restricts to the subject's native [0, U_i]; true allows
  // the whole [0, L] (needed when evaluating controls at another subject's
  // event time). Throws OutOfDomain outside the allowed range.
  double eval(int subject, int covariate, double t, bool full_domain) const;

  int n_covariates() const { return static_cast<int>(models_.size()); }
  std::size_t n_subjects() const { return restricted_.size(); }
  const SplineModel& model(int k) const { return models_.at(static_cast<std::size_t>(k)); }

 private:
  std::vector<SplineModel> models_;
  std::vector<Eigen::MatrixXd> coef_;  // per covariate: n x d rows gamma + alpha_i
  std::vector<double> restricted_;     // U_i per subject
  double horizon_ = 0.0;
};

CurveSet predict_curves(const std::vector<SplineModel>& models, const Registry& reg);

}  // namespace propproc
