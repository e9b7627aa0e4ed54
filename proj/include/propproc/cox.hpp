#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "propproc/registry.hpp"
#include "propproc/spline.hpp"

namespace propproc {

// Which covariate channels enter the treatment-assignment model. Time-varying
// covariates are evaluated from interpolated curves at each event time (full
// [0, L] domain); baseline covariates enter as constants.
struct ModelSpec {
  std::vector<int> tv;        // indices into Registry::covariate_names
  std::vector<int> baseline;  // indices into Registry::baseline_names

  static ModelSpec full(const Registry& reg);
  static ModelSpec time_varying_only(const Registry& reg);
  static ModelSpec baseline_only(const Registry& reg);

  int dim() const { return static_cast<int>(tv.size() + baseline.size()); }
  std::vector<std::string> names(const Registry& reg) const;
};

struct CoxModel {
  Eigen::VectorXd beta;
  ModelSpec spec;
  std::vector<std::string> covariate_names;
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;
  double loglik = 0.0;
  Eigen::MatrixXd information;        // observed information (-Hessian) at beta
  std::vector<double> loglik_trace;   // per accepted Newton step
  std::string note;
};

nlohmann::json cox_model_to_json(const CoxModel& m);

struct CoxEval {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

// Breslow partial log-likelihood with time-varying covariates, plus its exact
// gradient and Hessian. `curves` may be null when spec.tv is empty.
CoxEval partial_loglik(const Eigen::VectorXd& beta, const Registry& reg,
                       const CurveSet* curves, const ModelSpec& spec);

struct CoxFitOptions {
  double grad_tol = 1e-8;
  double step_tol = 1e-12;
  int max_iterations = 100;
  double beta_bound = 50.0;  // sup-norm divergence guard
};

// Newton-Raphson with step-halving on the Breslow partial likelihood,
// initialized at beta = 0.
CoxModel fit_cox(const Registry& reg, const CurveSet* curves, const ModelSpec& spec,
                 const CoxFitOptions& options = {});

}  // namespace propproc
