#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace propproc {

struct IngestConfig {
  double horizon_L = 0.0;
  std::string time_unit = "months";
  // Post-treatment visit rows (time > U): reject by default, drop when set.
  bool truncate_at_U = false;
};

struct Subject {
  std::string id;
  std::optional<double> treatment_time;  // absent = never treated in study
  std::optional<double> outcome;         // change score measured at/after L
  std::vector<double> baseline;
  // Derived at finalize: U = min(T, L) and I(T < L).
  double restricted_time = 0.0;
  bool treated_before_L = false;
};

struct Visit {
  double time = 0.0;
  std::vector<double> values;  // NaN = not measured at this visit
};

struct Registry {
  double horizon_L = 0.0;
  std::string time_unit = "months";
  std::vector<std::string> covariate_names;  // time-varying, p
  std::vector<std::string> baseline_names;   // time-fixed, p0
  std::vector<Subject> subjects;
  std::vector<std::vector<Visit>> visits;  // aligned with subjects, time-sorted
  std::size_t n_truncated_visits = 0;      // rows dropped under truncate_at_U

  std::size_t n() const { return subjects.size(); }
  int subject_index(const std::string& id) const;  // -1 if unknown

 private:
  mutable std::map<std::string, int> index_cache_;
};

// Recomputes U / treated_before_L, sorts visits by time and enforces the
// registry invariants. Post-U visits are dropped (counted) when truncate_at_U,
// rejected otherwise.
void finalize_registry(Registry& reg, bool truncate_at_U);

Registry load_registry(const std::string& subjects_path,
                       const std::string& visits_path,
                       const IngestConfig& config);

void save_registry(const Registry& reg, const std::string& subjects_path,
                   const std::string& visits_path);

struct ValidationIssue {
  std::string kind;
  std::size_t count = 0;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;  // only kinds with count > 0
  bool empty() const { return issues.empty(); }
  std::size_t total() const;
  std::string to_string() const;
};

// Diagnostic scan of a registry already in memory; never throws.
ValidationReport validate(const Registry& reg);

}  // namespace propproc
