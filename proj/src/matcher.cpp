#include "propproc/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "propproc/csv.hpp"
#include "propproc/errors.hpp"
#include "propproc/stats.hpp"

namespace propproc {

namespace {

double pair_distance(const PropensityPath& a, const PropensityPath& b, double t,
                     MatchDistance mode) {
  if (mode == MatchDistance::integrated_path) return path_distance(a, b, t);
  const double d = path_value_at(a, t) - path_value_at(b, t);
  return d * d;
}

}  // namespace

MatchSet sequential_match(const std::vector<PropensityPath>& paths,
                          const Registry& reg, const MatchOptions& options) {
  if (reg.n() == 0) throw EmptyRegistry("cannot match an empty registry");
  if (paths.size() != reg.n()) {
    throw GridMismatch("need exactly one path per subject");
  }
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (paths[i].subject_id != reg.subjects[i].id) {
      throw GridMismatch("paths not aligned with registry order");
    }
    if (!(paths[i].grid == paths[0].grid)) {
      throw GridMismatch("paths live on different grids");
    }
  }

  // Chronological order of treatment; id breaks exact time ties.
  std::vector<int> treated;
  for (std::size_t i = 0; i < reg.n(); ++i) {
    if (reg.subjects[i].treated_before_L) treated.push_back(static_cast<int>(i));
  }
  std::sort(treated.begin(), treated.end(), [&reg](int a, int b) {
    const double ta = *reg.subjects[static_cast<std::size_t>(a)].treatment_time;
    const double tb = *reg.subjects[static_cast<std::size_t>(b)].treatment_time;
    if (ta != tb) return ta < tb;
    return reg.subjects[static_cast<std::size_t>(a)].id <
           reg.subjects[static_cast<std::size_t>(b)].id;
  });

  MatchSet set;
  std::vector<bool> consumed(reg.n(), false);
  for (int i : treated) {
    const auto iu = static_cast<std::size_t>(i);
    if (consumed[iu]) continue;  // already taken as an earlier pair's control
    const double t = *reg.subjects[iu].treatment_time;

    int best = -1;
    double best_q = 0.0;
    for (std::size_t l = 0; l < reg.n(); ++l) {
      if (static_cast<int>(l) == i || consumed[l]) continue;
      if (!(reg.subjects[l].restricted_time > t)) continue;  // eligible: U > t
      const double q = pair_distance(paths[iu], paths[l], t, options.distance);
      if (best < 0 || q < best_q ||
          (q == best_q &&
           reg.subjects[l].id < reg.subjects[static_cast<std::size_t>(best)].id)) {
        best = static_cast<int>(l);
        best_q = q;
      }
    }

    if (best < 0 || (options.max_Q && best_q > *options.max_Q)) {
      set.unmatched_treated.push_back(reg.subjects[iu].id);
      continue;
    }
    consumed[iu] = true;
    consumed[static_cast<std::size_t>(best)] = true;
    set.pairs.push_back({reg.subjects[iu].id,
                         reg.subjects[static_cast<std::size_t>(best)].id, t, best_q,
                         static_cast<int>(set.pairs.size()) + 1});
  }
  return set;
}

MatchReport match_report(const MatchSet& set) {
  MatchReport rep;
  rep.M = set.M();
  rep.unmatched = static_cast<int>(set.unmatched_treated.size());
  if (!set.pairs.empty()) {
    std::vector<double> q;
    q.reserve(set.pairs.size());
    for (const auto& p : set.pairs) q.push_back(p.distance);
    rep.q_min = stats::quantile(q, 0.0);
    rep.q_q1 = stats::quantile(q, 0.25);
    rep.q_median = stats::quantile(q, 0.5);
    rep.q_q3 = stats::quantile(q, 0.75);
    rep.q_max = stats::quantile(q, 1.0);
  }
  return rep;
}

std::string MatchReport::to_string() const {
  std::ostringstream os;
  os << "pairs: " << M << "\nunmatched treated: " << unmatched << "\n";
  if (M > 0) {
    os << "Q min/q1/median/q3/max: " << csv::format_double(q_min) << " "
       << csv::format_double(q_q1) << " " << csv::format_double(q_median) << " "
       << csv::format_double(q_q3) << " " << csv::format_double(q_max) << "\n";
  }
  return os.str();
}

void write_matchset_csv(const std::string& path, const MatchSet& set) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& p : set.pairs) {
    rows.push_back({std::to_string(p.index), p.treated_id, p.control_id,
                    csv::format_double(p.match_time),
                    csv::format_double(p.distance)});
  }
  csv::write(path, {"m", "treated_id", "control_id", "match_time", "Q"}, rows);
}

nlohmann::json matchset_to_json(const MatchSet& set) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : set.pairs) {
    pairs.push_back({{"m", p.index},
                     {"treated_id", p.treated_id},
                     {"control_id", p.control_id},
                     {"match_time", p.match_time},
                     {"Q", p.distance}});
  }
  return nlohmann::json{{"pairs", std::move(pairs)},
                        {"unmatched_treated", set.unmatched_treated},
                        {"M", set.M()}};
}

}  // namespace propproc
