#include "propproc/spline.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "propproc/errors.hpp"
#include "propproc/stats.hpp"

namespace propproc {

namespace {

double domain_tol(const BasisSpec& spec) {
  return 1e-9 * std::max(1.0, std::abs(spec.boundary_hi));
}

struct CovariateData {
  // per subject: design rows and responses for the observed (t, x) pairs
  std::vector<Eigen::MatrixXd> B;
  std::vector<Eigen::VectorXd> y;
  Eigen::MatrixXd pooledB;
  Eigen::VectorXd pooledY;
  std::size_t n_obs = 0;
};

CovariateData gather(const Registry& reg, int k, const BasisSpec& spec) {
  if (k < 0 || k >= static_cast<int>(reg.covariate_names.size())) {
    throw ConfigError("covariate index out of range");
  }
  const int d = spec.dim();
  CovariateData data;
  data.B.resize(reg.n());
  data.y.resize(reg.n());
  std::size_t total = 0;
  for (std::size_t i = 0; i < reg.n(); ++i) {
    std::vector<double> ts, xs;
    for (const Visit& v : reg.visits[i]) {
      const double x = v.values[static_cast<std::size_t>(k)];
      if (!std::isnan(x)) {
        ts.push_back(v.time);
        xs.push_back(x);
      }
    }
    Eigen::MatrixXd Bi(ts.size(), d);
    Eigen::VectorXd yi(ts.size());
    for (std::size_t j = 0; j < ts.size(); ++j) {
      Bi.row(static_cast<Eigen::Index>(j)) = basis_eval(ts[j], spec).transpose();
      yi(static_cast<Eigen::Index>(j)) = xs[j];
    }
    total += ts.size();
    data.B[i] = std::move(Bi);
    data.y[i] = std::move(yi);
  }
  data.n_obs = total;
  data.pooledB.resize(static_cast<Eigen::Index>(total), d);
  data.pooledY.resize(static_cast<Eigen::Index>(total));
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < reg.n(); ++i) {
    const Eigen::Index m = data.B[i].rows();
    if (m > 0) {
      data.pooledB.middleRows(row, m) = data.B[i];
      data.pooledY.segment(row, m) = data.y[i];
      row += m;
    }
  }
  return data;
}

Eigen::VectorXd pooled_fixed_effect(const CovariateData& data, const BasisSpec& spec,
                                    const std::string& name) {
  const int d = spec.dim();
  if (data.n_obs < static_cast<std::size_t>(d)) {
    throw InsufficientData("covariate " + name + ": " + std::to_string(data.n_obs) +
                           " observations for basis dimension " + std::to_string(d));
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(data.pooledB);
  if (qr.rank() < d) {
    throw InsufficientData("covariate " + name + ": pooled design is rank-deficient (rank " +
                           std::to_string(qr.rank()) + " < " + std::to_string(d) + ")");
  }
  return qr.solve(data.pooledY);
}

SplineModel assemble(const Registry& reg, int k, const BasisSpec& spec,
                     const CovariateData& data, const Eigen::VectorXd& gamma,
                     double lambda) {
  const int d = spec.dim();
  SplineModel model;
  model.covariate = k;
  model.basis = spec;
  model.fixed = gamma;
  model.lambda = lambda;

  double rss = 0.0;
  for (std::size_t i = 0; i < reg.n(); ++i) {
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(d);
    if (data.B[i].rows() > 0) {
      const Eigen::VectorXd resid = data.y[i] - data.B[i] * gamma;
      alpha = ridge_random_effect(data.B[i], resid, lambda);
      rss += (resid - data.B[i] * alpha).squaredNorm();
    }
    model.random[reg.subjects[i].id] = std::move(alpha);
  }
  model.noise_var = data.n_obs > 0 ? rss / static_cast<double>(data.n_obs) : 0.0;
  return model;
}

}  // namespace

BasisSpec default_basis(const Registry& reg, int degree, int n_interior) {
  if (degree < 0) throw ConfigError("basis degree must be >= 0");
  BasisSpec spec;
  spec.degree = degree;
  spec.boundary_lo = 0.0;
  spec.boundary_hi = reg.horizon_L;
  if (n_interior > 0) {
    std::vector<double> times;
    for (const auto& vis : reg.visits) {
      for (const auto& v : vis) times.push_back(v.time);
    }
    if (!times.empty()) {
      for (int j = 1; j <= n_interior; ++j) {
        const double q = static_cast<double>(j) / (n_interior + 1);
        const double knot = stats::quantile(times, q);
        if (knot > 0.0 && knot < reg.horizon_L &&
            (spec.interior_knots.empty() || knot > spec.interior_knots.back())) {
          spec.interior_knots.push_back(knot);
        }
      }
    }
  }
  return spec;
}

Eigen::VectorXd basis_eval(double t, const BasisSpec& spec) {
  const double tol = domain_tol(spec);
  if (t < spec.boundary_lo - tol || t > spec.boundary_hi + tol) {
    throw OutOfDomain("basis_eval: t=" + std::to_string(t) + " outside [" +
                      std::to_string(spec.boundary_lo) + ", " +
                      std::to_string(spec.boundary_hi) + "]");
  }
  t = std::clamp(t, spec.boundary_lo, spec.boundary_hi);
  Eigen::VectorXd v(spec.dim());
  v(0) = 1.0;
  double p = 1.0;
  for (int j = 1; j <= spec.degree; ++j) {
    p *= t;
    v(j) = p;
  }
  for (std::size_t m = 0; m < spec.interior_knots.size(); ++m) {
    const double u = t - spec.interior_knots[m];
    double w = 0.0;
    if (u > 0.0) {
      w = 1.0;
      for (int j = 0; j < spec.degree; ++j) w *= u;
    }
    v(spec.degree + 1 + static_cast<Eigen::Index>(m)) = w;
  }
  return v;
}

Eigen::VectorXd ridge_random_effect(const Eigen::MatrixXd& B,
                                    const Eigen::VectorXd& resid, double lambda) {
  if (lambda <= 0.0) throw ConfigError("ridge penalty must be positive");
  Eigen::MatrixXd A = B.transpose() * B;
  A.diagonal().array() += lambda;
  return A.ldlt().solve(B.transpose() * resid);
}

SplineModel fit_covariate_model(const Registry& reg, int k, const BasisSpec& spec,
                                double lambda) {
  if (lambda <= 0.0) throw ConfigError("ridge penalty must be positive");
  const CovariateData data = gather(reg, k, spec);
  const Eigen::VectorXd gamma =
      pooled_fixed_effect(data, spec, reg.covariate_names[static_cast<std::size_t>(k)]);
  return assemble(reg, k, spec, data, gamma, lambda);
}

const std::vector<double>& default_gcv_grid() {
  static const std::vector<double> grid = {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
  return grid;
}

SplineModel fit_covariate_model_gcv(const Registry& reg, int k, const BasisSpec& spec,
                                    const std::vector<double>& grid) {
  if (grid.empty()) throw ConfigError("empty GCV grid");
  const CovariateData data = gather(reg, k, spec);
  const Eigen::VectorXd gamma =
      pooled_fixed_effect(data, spec, reg.covariate_names[static_cast<std::size_t>(k)]);
  const int d = spec.dim();
  const double N = static_cast<double>(data.n_obs);

  // Eigendecompose each subject's B'B once; the lambda sweep is then cheap.
  struct SubjectPieces {
    Eigen::MatrixXd V;
    Eigen::VectorXd evals;
    Eigen::VectorXd Btr;  // B' resid
    Eigen::MatrixXd B;
    Eigen::VectorXd resid;
  };
  std::vector<SubjectPieces> pieces;
  pieces.reserve(reg.n());
  for (std::size_t i = 0; i < reg.n(); ++i) {
    if (data.B[i].rows() == 0) continue;
    SubjectPieces p;
    p.B = data.B[i];
    p.resid = data.y[i] - data.B[i] * gamma;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.B.transpose() * p.B);
    p.V = es.eigenvectors();
    p.evals = es.eigenvalues().cwiseMax(0.0);
    p.Btr = p.B.transpose() * p.resid;
    pieces.push_back(std::move(p));
  }

  double best_gcv = std::numeric_limits<double>::infinity();
  double best_lambda = grid.front();
  for (double lambda : grid) {
    if (lambda <= 0.0) throw ConfigError("GCV grid entries must be positive");
    double rss = 0.0;
    double df = static_cast<double>(d);  // pooled stage is full rank here
    for (const auto& p : pieces) {
      const Eigen::VectorXd shrink = (p.evals.array() + lambda).inverse().matrix();
      const Eigen::VectorXd alpha = p.V * shrink.asDiagonal() * (p.V.transpose() * p.Btr);
      rss += (p.resid - p.B * alpha).squaredNorm();
      df += (p.evals.array() / (p.evals.array() + lambda)).sum();
    }
    if (df >= N) continue;
    const double gcv = N * rss / ((N - df) * (N - df));
    if (gcv < best_gcv) {
      best_gcv = gcv;
      best_lambda = lambda;
    }
  }
  return assemble(reg, k, spec, data, gamma, best_lambda);
}

CurveSet::CurveSet(std::vector<SplineModel> models, const Registry& reg)
    : models_(std::move(models)), horizon_(reg.horizon_L) {
  restricted_.reserve(reg.n());
  for (const auto& s : reg.subjects) restricted_.push_back(s.restricted_time);
  coef_.reserve(models_.size());
  for (const auto& m : models_) {
    Eigen::MatrixXd C(reg.n(), m.basis.dim());
    for (std::size_t i = 0; i < reg.n(); ++i) {
      auto it = m.random.find(reg.subjects[i].id);
      if (it == m.random.end()) {
        throw DataError("spline model missing random effect for subject " +
                        reg.subjects[i].id);
      }
      C.row(static_cast<Eigen::Index>(i)) = (m.fixed + it->second).transpose();
    }
    coef_.push_back(std::move(C));
  }
}

double CurveSet::eval(int subject, int covariate, double t, bool full_domain) const {
  const auto k = static_cast<std::size_t>(covariate);
  if (k >= models_.size()) throw ConfigError("covariate index out of range");
  const auto i = static_cast<std::size_t>(subject);
  if (i >= restricted_.size()) throw ConfigError("subject index out of range");
  const double hi = full_domain ? horizon_ : restricted_[i];
  const double tol = 1e-9 * std::max(1.0, horizon_);
  if (t < -tol || t > hi + tol) {
    throw OutOfDomain("curve evaluation at t=" + std::to_string(t) +
                      " outside [0, " + std::to_string(hi) + "]");
  }
  t = std::clamp(t, 0.0, hi);
  const Eigen::VectorXd b = basis_eval(t, models_[k].basis);
  return coef_[k].row(static_cast<Eigen::Index>(i)).dot(b);
}

CurveSet predict_curves(const std::vector<SplineModel>& models, const Registry& reg) {
  if (models.size() != reg.covariate_names.size()) {
    throw ConfigError("need one spline model per time-varying covariate");
  }
  for (std::size_t k = 0; k < models.size(); ++k) {
    if (models[k].covariate != static_cast<int>(k)) {
      throw ConfigError("spline models out of order");
    }
  }
  return CurveSet(models, reg);
}

void to_json(nlohmann::json& j, const SplineModel& m) {
  nlohmann::json alpha = nlohmann::json::object();
  for (const auto& [id, a] : m.random) {
    alpha[id] = std::vector<double>(a.data(), a.data() + a.size());
  }
  j = nlohmann::json{
      {"k", m.covariate},
      {"degree", m.basis.degree},
      {"knots", m.basis.interior_knots},
      {"boundary", {m.basis.boundary_lo, m.basis.boundary_hi}},
      {"gamma", std::vector<double>(m.fixed.data(), m.fixed.data() + m.fixed.size())},
      {"alpha", std::move(alpha)},
      {"sigma2", m.noise_var},
      {"lambda", m.lambda}};
}

void from_json(const nlohmann::json& j, SplineModel& m) {
  m.covariate = j.at("k").get<int>();
  m.basis.degree = j.at("degree").get<int>();
  m.basis.interior_knots = j.at("knots").get<std::vector<double>>();
  m.basis.boundary_lo = j.at("boundary").at(0).get<double>();
  m.basis.boundary_hi = j.at("boundary").at(1).get<double>();
  const auto gamma = j.at("gamma").get<std::vector<double>>();
  m.fixed = Eigen::Map<const Eigen::VectorXd>(gamma.data(),
                                              static_cast<Eigen::Index>(gamma.size()));
  m.random.clear();
  for (const auto& [id, arr] : j.at("alpha").items()) {
    const auto a = arr.get<std::vector<double>>();
    m.random[id] = Eigen::Map<const Eigen::VectorXd>(a.data(),
                                                     static_cast<Eigen::Index>(a.size()));
  }
  m.noise_var = j.at("sigma2").get<double>();
  m.lambda = j.at("lambda").get<double>();
}

}  // namespace propproc
