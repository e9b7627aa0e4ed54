#include "propproc/cox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "propproc/errors.hpp"

namespace propproc {

ModelSpec ModelSpec::full(const Registry& reg) {
  ModelSpec s;
  s.tv.resize(reg.covariate_names.size());
  std::iota(s.tv.begin(), s.tv.end(), 0);
  s.baseline.resize(reg.baseline_names.size());
  std::iota(s.baseline.begin(), s.baseline.end(), 0);
  return s;
}

ModelSpec ModelSpec::time_varying_only(const Registry& reg) {
  ModelSpec s;
  s.tv.resize(reg.covariate_names.size());
  std::iota(s.tv.begin(), s.tv.end(), 0);
  return s;
}

ModelSpec ModelSpec::baseline_only(const Registry& reg) {
  ModelSpec s;
  s.baseline.resize(reg.baseline_names.size());
  std::iota(s.baseline.begin(), s.baseline.end(), 0);
  return s;
}

std::vector<std::string> ModelSpec::names(const Registry& reg) const {
  std::vector<std::string> out;
  for (int k : tv) out.push_back(reg.covariate_names.at(static_cast<std::size_t>(k)));
  for (int b : baseline) out.push_back(reg.baseline_names.at(static_cast<std::size_t>(b)));
  return out;
}

namespace {

// Risk sets and covariate values frozen per event time; shared across all
// likelihood evaluations for one dataset.
struct EventGroup {
  double time = 0.0;
  std::vector<int> at_risk;         // subject indices with U >= time
  std::vector<int> event_rows;      // rows of at_risk that are events here
  Eigen::MatrixXd X;                // |at_risk| x q covariates at `time`
};

struct CoxData {
  std::vector<EventGroup> groups;
  int q = 0;
};

double model_value(const Registry& reg, const CurveSet* curves, const ModelSpec& spec,
                   int subject, int channel, double t) {
  const int ntv = static_cast<int>(spec.tv.size());
  if (channel < ntv) {
    return curves->eval(subject, spec.tv[static_cast<std::size_t>(channel)], t,
                        /*full_domain=*/true);
  }
  const int b = spec.baseline[static_cast<std::size_t>(channel - ntv)];
  return reg.subjects[static_cast<std::size_t>(subject)].baseline[static_cast<std::size_t>(b)];
}

CoxData build_cox_data(const Registry& reg, const CurveSet* curves,
                       const ModelSpec& spec) {
  if (!spec.tv.empty() && curves == nullptr) {
    throw ConfigError("time-varying covariates require a CurveSet");
  }
  CoxData data;
  data.q = spec.dim();
  if (data.q == 0) throw ConfigError("model has no covariates");

  std::vector<std::pair<double, int>> events;  // (T_i, subject)
  for (std::size_t i = 0; i < reg.n(); ++i) {
    if (reg.subjects[i].treated_before_L) {
      events.emplace_back(*reg.subjects[i].treatment_time, static_cast<int>(i));
    }
  }
  if (events.empty()) throw NoEvents("no subject treated before the horizon");
  std::sort(events.begin(), events.end());

  std::size_t e = 0;
  while (e < events.size()) {
    EventGroup g;
    g.time = events[e].first;
    std::vector<int> event_subjects;
    while (e < events.size() && events[e].first == g.time) {
      event_subjects.push_back(events[e].second);
      ++e;
    }
    for (std::size_t l = 0; l < reg.n(); ++l) {
      if (reg.subjects[l].restricted_time >= g.time) {
        g.at_risk.push_back(static_cast<int>(l));
      }
    }
    g.X.resize(static_cast<Eigen::Index>(g.at_risk.size()), data.q);
    for (std::size_t r = 0; r < g.at_risk.size(); ++r) {
      for (int c = 0; c < data.q; ++c) {
        const double v = model_value(reg, curves, spec, g.at_risk[r], c, g.time);
        if (!std::isfinite(v)) {
          throw EvaluationFailure("non-finite covariate value for subject " +
                                  reg.subjects[static_cast<std::size_t>(g.at_risk[r])].id +
                                  " at t=" + std::to_string(g.time));
        }
        g.X(static_cast<Eigen::Index>(r), c) = v;
      }
    }
    for (int s : event_subjects) {
      const auto it = std::find(g.at_risk.begin(), g.at_risk.end(), s);
      g.event_rows.push_back(static_cast<int>(it - g.at_risk.begin()));
    }
    data.groups.push_back(std::move(g));
  }
  return data;
}

CoxEval evaluate(const Eigen::VectorXd& beta, const CoxData& data) {
  const int q = data.q;
  CoxEval out;
  out.gradient = Eigen::VectorXd::Zero(q);
  out.hessian = Eigen::MatrixXd::Zero(q, q);

  for (const EventGroup& g : data.groups) {
    const Eigen::VectorXd eta = g.X * beta;
    const double m = eta.maxCoeff();
    const Eigen::VectorXd w = (eta.array() - m).exp();
    const double s0 = w.sum();
    const double log_s0 = m + std::log(s0);
    const Eigen::VectorXd s1 = g.X.transpose() * w;
    const Eigen::VectorXd xbar = s1 / s0;
    const Eigen::MatrixXd s2 = g.X.transpose() * w.asDiagonal() * g.X;
    const double d = static_cast<double>(g.event_rows.size());

    for (int r : g.event_rows) {
      out.value += eta(r);
      out.gradient += g.X.row(r).transpose();
    }
    out.value -= d * log_s0;
    out.gradient -= d * xbar;
    out.hessian -= d * (s2 / s0 - xbar * xbar.transpose());
  }
  if (!std::isfinite(out.value)) {
    throw EvaluationFailure("partial likelihood is non-finite");
  }
  return out;
}

double value_only(const Eigen::VectorXd& beta, const CoxData& data) {
  double value = 0.0;
  for (const EventGroup& g : data.groups) {
    const Eigen::VectorXd eta = g.X * beta;
    const double m = eta.maxCoeff();
    const double log_s0 = m + std::log((eta.array() - m).exp().sum());
    for (int r : g.event_rows) value += eta(r);
    value -= static_cast<double>(g.event_rows.size()) * log_s0;
  }
  return value;
}

// Solve (-H + maybe jitter) step = grad; -H is PSD by concavity.
Eigen::VectorXd newton_step(const Eigen::MatrixXd& neg_hessian,
                            const Eigen::VectorXd& grad) {
  auto try_solve = [&grad](const Eigen::MatrixXd& A, Eigen::VectorXd& step) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    if (ldlt.info() != Eigen::Success) return false;
    step = ldlt.solve(grad);
    if (!step.allFinite()) return false;
    const double resid = (A * step - grad).norm();
    return resid <= 1e-6 * (1.0 + grad.norm());
  };
  Eigen::VectorXd step;
  if (try_solve(neg_hessian, step)) return step;
  Eigen::MatrixXd jittered = neg_hessian;
  jittered.diagonal().array() += 1e-10;
  if (try_solve(jittered, step)) return step;
  throw SingularInformation("information matrix not invertible after ridge jitter");
}

}  // namespace

CoxEval partial_loglik(const Eigen::VectorXd& beta, const Registry& reg,
                       const CurveSet* curves, const ModelSpec& spec) {
  const CoxData data = build_cox_data(reg, curves, spec);
  if (beta.size() != data.q) throw ConfigError("beta dimension mismatch");
  return evaluate(beta, data);
}

CoxModel fit_cox(const Registry& reg, const CurveSet* curves, const ModelSpec& spec,
                 const CoxFitOptions& options) {
  const CoxData data = build_cox_data(reg, curves, spec);
  const int q = data.q;

  CoxModel model;
  model.spec = spec;
  model.covariate_names = spec.names(reg);
  model.beta = Eigen::VectorXd::Zero(q);

  CoxEval cur = evaluate(model.beta, data);
  model.loglik_trace.push_back(cur.value);

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const double gnorm = cur.gradient.lpNorm<Eigen::Infinity>();
    if (gnorm < options.grad_tol) {
      model.converged = true;
      break;
    }
    const Eigen::VectorXd direction = newton_step(-cur.hessian, cur.gradient);

    // Step-halving keeps the likelihood monotone nondecreasing.
    double scale = 1.0;
    Eigen::VectorXd candidate;
    double cand_value = -std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int h = 0; h < 40; ++h) {
      candidate = model.beta + scale * direction;
      cand_value = value_only(candidate, data);
      if (std::isfinite(cand_value) && cand_value >= cur.value) {
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    const double step_norm = (scale * direction).lpNorm<Eigen::Infinity>();
    if (!accepted || step_norm < options.step_tol) {
      // No usable ascent direction left: stationary to working precision.
      model.converged = cur.gradient.lpNorm<Eigen::Infinity>() < 1e-4;
      if (!model.converged) model.note = "step size underflow before convergence";
      break;
    }
    model.beta = candidate;
    cur = evaluate(model.beta, data);
    model.loglik_trace.push_back(cur.value);
    model.iterations = iter + 1;

    if (model.beta.lpNorm<Eigen::Infinity>() > options.beta_bound) {
      model.converged = false;
      model.note = "monotone likelihood: |beta| exceeded bound " +
                   std::to_string(options.beta_bound);
      break;
    }
    if (iter + 1 == options.max_iterations) {
      model.converged = false;
      model.note = "max iterations reached";
    }
  }
  if (model.note.empty() && !model.converged &&
      cur.gradient.lpNorm<Eigen::Infinity>() < options.grad_tol) {
    model.converged = true;
  }

  model.grad_norm = cur.gradient.lpNorm<Eigen::Infinity>();
  model.loglik = cur.value;
  model.information = -cur.hessian;
  return model;
}

nlohmann::json cox_model_to_json(const CoxModel& m) {
  return nlohmann::json{
      {"beta", std::vector<double>(m.beta.data(), m.beta.data() + m.beta.size())},
      {"loglik", m.loglik},
      {"converged", m.converged},
      {"iterations", m.iterations},
      {"grad_norm", m.grad_norm},
      {"covariate_names", m.covariate_names},
      {"note", m.note}};
}

}  // namespace propproc
