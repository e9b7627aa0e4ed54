#pragma once

#include <string>
#include <vector>

#include "propproc/cox.hpp"
#include "propproc/registry.hpp"
#include "propproc/spline.hpp"

namespace propproc {

// Uniform grid 0 = s_0 < ... < s_G = horizon with step horizon / cells.
struct TimeGrid {
  double horizon = 1.0;
  int cells = 200;

  double step() const { return horizon / cells; }
  int n_points() const { return cells + 1; }
  double point(int g) const { return horizon * g / cells; }
  bool operator==(const TimeGrid& o) const = default;
};

// One subject's linear-predictor path theta(s) = beta' x*(s) sampled on the
// grid. Values beyond the subject's own U_i come from the interpolated
// curves (extended validity).
struct PropensityPath {
  std::string subject_id;
  TimeGrid grid;
  std::vector<double> values;         // grid.n_points() entries
  double valid_until_native = 0.0;    // U_i
};

std::vector<PropensityPath> build_paths(const CoxModel& model, const CurveSet* curves,
                                        const Registry& reg, const TimeGrid& grid);

// Linear interpolation of the path between grid nodes.
double path_value_at(const PropensityPath& path, double t);

// Trapezoid-rule integral of (theta_a - theta_b)^2 over [0, upto], with a
// linearly interpolated partial final cell when `upto` is off-grid.
double path_distance(const PropensityPath& a, const PropensityPath& b, double upto);

// theta(t) * exp(-int_0^t theta(s) ds) for a nonnegative (hazard-scale) path;
// simulator-side check of the assignment-density factorization.
double density_factorization_check(const PropensityPath& theta, double t);

void write_paths_csv(const std::string& path,
                     const std::vector<PropensityPath>& paths);

}  // namespace propproc
