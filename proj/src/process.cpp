#include "propproc/process.hpp"

#include <algorithm>
#include <cmath>

#include "propproc/csv.hpp"
#include "propproc/errors.hpp"

namespace propproc {

namespace {

void check_grid(const TimeGrid& g) {
  if (!(g.horizon > 0.0) || g.cells < 2) {
    throw ConfigError("time grid needs horizon > 0 and at least 2 cells");
  }
}

void check_same_grid(const PropensityPath& a, const PropensityPath& b) {
  if (!(a.grid == b.grid)) {
    throw GridMismatch("paths for " + a.subject_id + " and " + b.subject_id +
                       " live on different grids");
  }
}

double clamp_time(const PropensityPath& p, double t, const char* what) {
  const double tol = 1e-9 * std::max(1.0, p.grid.horizon);
  if (t < -tol || t > p.grid.horizon + tol) {
    throw OutOfDomain(std::string(what) + ": t=" + std::to_string(t) +
                      " outside [0, " + std::to_string(p.grid.horizon) + "]");
  }
  return std::clamp(t, 0.0, p.grid.horizon);
}

}  // namespace

std::vector<PropensityPath> build_paths(const CoxModel& model, const CurveSet* curves,
                                        const Registry& reg, const TimeGrid& grid) {
  check_grid(grid);
  if (!model.spec.tv.empty() && curves == nullptr) {
    throw ConfigError("time-varying covariates require a CurveSet");
  }
  const int ntv = static_cast<int>(model.spec.tv.size());
  std::vector<PropensityPath> paths;
  paths.reserve(reg.n());
  for (std::size_t i = 0; i < reg.n(); ++i) {
    PropensityPath p;
    p.subject_id = reg.subjects[i].id;
    p.grid = grid;
    p.valid_until_native = reg.subjects[i].restricted_time;
    p.values.resize(static_cast<std::size_t>(grid.n_points()));

    double base = 0.0;  // constant baseline contribution
    for (std::size_t c = 0; c < model.spec.baseline.size(); ++c) {
      const auto b = static_cast<std::size_t>(model.spec.baseline[c]);
      base += model.beta(ntv + static_cast<Eigen::Index>(c)) * reg.subjects[i].baseline[b];
    }
    for (int g = 0; g < grid.n_points(); ++g) {
      const double s = grid.point(g);
      double theta = base;
      for (int c = 0; c < ntv; ++c) {
        theta += model.beta(c) *
                 curves->eval(static_cast<int>(i), model.spec.tv[static_cast<std::size_t>(c)],
                              s, /*full_domain=*/true);
      }
      if (!std::isfinite(theta)) {
        throw EvaluationFailure("non-finite path value for subject " + p.subject_id +
                                " at s=" + std::to_string(s));
      }
      p.values[static_cast<std::size_t>(g)] = theta;
    }
    paths.push_back(std::move(p));
  }
  return paths;
}

double path_value_at(const PropensityPath& path, double t) {
  t = clamp_time(path, t, "path_value_at");
  const double step = path.grid.step();
  int g = static_cast<int>(std::floor(t / step));
  if (g >= path.grid.cells) g = path.grid.cells - 1;
  const double s_g = path.grid.point(g);
  const double w = (t - s_g) / step;
  return (1.0 - w) * path.values[static_cast<std::size_t>(g)] +
         w * path.values[static_cast<std::size_t>(g) + 1];
}

double path_distance(const PropensityPath& a, const PropensityPath& b, double upto) {
  check_same_grid(a, b);
  upto = clamp_time(a, upto, "path_distance");
  const double step = a.grid.step();

  // Cells fully inside [0, upto]; floor guarded against t* == s_g round-off.
  int full = static_cast<int>(std::floor(upto / step + 1e-12));
  if (full > a.grid.cells) full = a.grid.cells;

  auto sq = [&](int g) {
    const double d = a.values[static_cast<std::size_t>(g)] -
                     b.values[static_cast<std::size_t>(g)];
    return d * d;
  };

  double q = 0.0;
  for (int g = 0; g < full; ++g) q += 0.5 * step * (sq(g) + sq(g + 1));

  const double rest = upto - static_cast<double>(full) * step;
  if (rest > 1e-12 * std::max(1.0, a.grid.horizon) && full < a.grid.cells) {
    const double da = path_value_at(a, upto) - path_value_at(b, upto);
    q += 0.5 * rest * (sq(full) + da * da);
  }
  return q;
}

double density_factorization_check(const PropensityPath& theta, double t) {
  t = clamp_time(theta, t, "density_factorization_check");
  const double step = theta.grid.step();
  int full = static_cast<int>(std::floor(t / step + 1e-12));
  if (full > theta.grid.cells) full = theta.grid.cells;

  auto value = [&](int g) { return theta.values[static_cast<std::size_t>(g)]; };
  for (int g = 0; g <= std::min(full + 1, theta.grid.cells); ++g) {
    if (value(g) < 0.0) {
      throw NegativeHazard("negative hazard at s=" +
                           std::to_string(theta.grid.point(g)));
    }
  }

  double integral = 0.0;
  for (int g = 0; g < full; ++g) integral += 0.5 * step * (value(g) + value(g + 1));
  const double theta_t = path_value_at(theta, t);
  if (theta_t < 0.0) throw NegativeHazard("negative hazard at t");
  const double rest = t - static_cast<double>(full) * step;
  if (rest > 0.0 && full < theta.grid.cells) {
    integral += 0.5 * rest * (value(full) + theta_t);
  }
  return theta_t * std::exp(-integral);
}

void write_paths_csv(const std::string& path,
                     const std::vector<PropensityPath>& paths) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& p : paths) {
    for (int g = 0; g < p.grid.n_points(); ++g) {
      rows.push_back({p.subject_id, csv::format_double(p.grid.point(g)),
                      csv::format_double(p.values[static_cast<std::size_t>(g)])});
    }
  }
  csv::write(path, {"id", "s", "theta"}, rows);
}

}  // namespace propproc
