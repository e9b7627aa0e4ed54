#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "propproc/process.hpp"
#include "propproc/registry.hpp"

namespace propproc {

struct MatchedPair {
  std::string treated_id;
  std::string control_id;
  double match_time = 0.0;  // T of the treated subject
  double distance = 0.0;    // Q(i, l) up to match_time
  int index = 0;            // pair counter m, 1-based
};

struct MatchSet {
  std::vector<MatchedPair> pairs;  // ordered by nondecreasing match_time
  std::vector<std::string> unmatched_treated;
  int M() const { return static_cast<int>(pairs.size()); }
};

enum class MatchDistance {
  integrated_path,  // Q = int_0^T (theta_i - theta_l)^2 dt
  at_event_time,    // (theta_i(T) - theta_l(T))^2, the scalar-GPS comparator
};

struct MatchOptions {
  std::optional<double> max_Q;  // caliper; best match above it goes unmatched
  MatchDistance distance = MatchDistance::integrated_path;
};

// Sequential greedy matching without replacement: treated subjects in
// chronological order of T, each paired to the nearest eligible control
// (U > T, not yet consumed). Ties break on smallest distance, then
// lexicographically smallest control id.
MatchSet sequential_match(const std::vector<PropensityPath>& paths,
                          const Registry& reg, const MatchOptions& options = {});

struct MatchReport {
  int M = 0;
  int unmatched = 0;
  double q_min = 0.0, q_q1 = 0.0, q_median = 0.0, q_q3 = 0.0, q_max = 0.0;
  std::string to_string() const;
};

MatchReport match_report(const MatchSet& set);

void write_matchset_csv(const std::string& path, const MatchSet& set);
nlohmann::json matchset_to_json(const MatchSet& set);

}  // namespace propproc
