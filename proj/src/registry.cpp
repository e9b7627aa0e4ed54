#include "propproc/registry.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "propproc/csv.hpp"
#include "propproc/errors.hpp"

namespace propproc {

int Registry::subject_index(const std::string& id) const {
  if (index_cache_.size() != subjects.size()) {
    index_cache_.clear();
    for (std::size_t i = 0; i < subjects.size(); ++i) {
      index_cache_[subjects[i].id] = static_cast<int>(i);
    }
  }
  auto it = index_cache_.find(id);
  return it == index_cache_.end() ? -1 : it->second;
}

void finalize_registry(Registry& reg, bool truncate_at_U) {
  if (reg.horizon_L <= 0.0) throw DataError("horizon_L must be positive");
  if (reg.visits.size() != reg.subjects.size()) {
    throw DataError("visit table not aligned with subjects");
  }
  for (std::size_t i = 0; i < reg.subjects.size(); ++i) {
    Subject& s = reg.subjects[i];
    if (s.treatment_time && (*s.treatment_time < 0.0 || !std::isfinite(*s.treatment_time))) {
      throw DataError("subject " + s.id + ": invalid treatment_time");
    }
    if (s.baseline.size() != reg.baseline_names.size()) {
      throw DataError("subject " + s.id + ": baseline width mismatch");
    }
    s.restricted_time = s.treatment_time ? std::min(*s.treatment_time, reg.horizon_L)
                                         : reg.horizon_L;
    s.treated_before_L = s.treatment_time && *s.treatment_time < reg.horizon_L;

    auto& vis = reg.visits[i];
    std::stable_sort(vis.begin(), vis.end(),
                     [](const Visit& a, const Visit& b) { return a.time < b.time; });
    for (std::size_t j = 0; j < vis.size(); ++j) {
      if (vis[j].values.size() != reg.covariate_names.size()) {
        throw DataError("subject " + s.id + ": visit value width mismatch");
      }
      if (vis[j].time < 0.0 || !std::isfinite(vis[j].time)) {
        throw DataError("subject " + s.id + ": negative or non-finite visit time");
      }
      if (j > 0 && !(vis[j].time > vis[j - 1].time)) {
        throw NonMonotoneVisits("subject " + s.id + ": duplicate visit time " +
                                csv::format_double(vis[j].time));
      }
    }
    if (truncate_at_U) {
      auto it = std::find_if(vis.begin(), vis.end(), [&](const Visit& v) {
        return v.time > s.restricted_time;
      });
      reg.n_truncated_visits += static_cast<std::size_t>(vis.end() - it);
      vis.erase(it, vis.end());
    } else if (!vis.empty() && vis.back().time > s.restricted_time) {
      throw PostTreatmentVisit("subject " + s.id + ": visit at t=" +
                               csv::format_double(vis.back().time) +
                               " after restricted time U=" +
                               csv::format_double(s.restricted_time));
    }
    if (vis.empty()) {
      throw DataError("subject " + s.id + ": no visits");
    }
  }
}

Registry load_registry(const std::string& subjects_path,
                       const std::string& visits_path,
                       const IngestConfig& config) {
  if (config.horizon_L <= 0.0) throw ConfigError("horizon_L must be positive");

  const csv::Table subj = csv::read(subjects_path);
  static const char* kSubjCols[] = {"id", "treatment_time", "outcome"};
  for (std::size_t j = 0; j < 3; ++j) {
    if (subj.header.size() <= j || subj.header[j] != kSubjCols[j]) {
      throw MissingColumn(subjects_path + ": missing column '" +
                          kSubjCols[j] + "'");
    }
  }
  const csv::Table vis = csv::read(visits_path);
  static const char* kVisCols[] = {"id", "time"};
  for (std::size_t j = 0; j < 2; ++j) {
    if (vis.header.size() <= j || vis.header[j] != kVisCols[j]) {
      throw MissingColumn(visits_path + ": missing column '" + kVisCols[j] + "'");
    }
  }

  Registry reg;
  reg.horizon_L = config.horizon_L;
  reg.time_unit = config.time_unit;
  reg.baseline_names.assign(subj.header.begin() + 3, subj.header.end());
  reg.covariate_names.assign(vis.header.begin() + 2, vis.header.end());

  std::set<std::string> seen;
  for (std::size_t r = 0; r < subj.rows.size(); ++r) {
    const auto& row = subj.rows[r];
    const std::string ctx = subjects_path + ":" + std::to_string(r + 2);
    Subject s;
    s.id = row[0];
    if (s.id.empty()) throw DataError(ctx + ": empty subject id");
    if (!seen.insert(s.id).second) throw DataError(ctx + ": duplicate subject id " + s.id);
    if (!row[1].empty()) s.treatment_time = csv::parse_double(row[1], ctx);
    if (!row[2].empty()) s.outcome = csv::parse_double(row[2], ctx);
    for (std::size_t j = 3; j < row.size(); ++j) {
      s.baseline.push_back(row[j].empty() ? std::nan("")
                                          : csv::parse_double(row[j], ctx));
    }
    reg.subjects.push_back(std::move(s));
  }
  reg.visits.resize(reg.subjects.size());

  for (std::size_t r = 0; r < vis.rows.size(); ++r) {
    const auto& row = vis.rows[r];
    const std::string ctx = visits_path + ":" + std::to_string(r + 2);
    const int idx = reg.subject_index(row[0]);
    if (idx < 0) throw UnknownSubject(ctx + ": unknown subject id '" + row[0] + "'");
    Visit v;
    v.time = csv::parse_double(row[1], ctx);
    for (std::size_t j = 2; j < row.size(); ++j) {
      v.values.push_back(row[j].empty() ? std::nan("")
                                        : csv::parse_double(row[j], ctx));
    }
    reg.visits[static_cast<std::size_t>(idx)].push_back(std::move(v));
  }

  finalize_registry(reg, config.truncate_at_U);
  return reg;
}

void save_registry(const Registry& reg, const std::string& subjects_path,
                   const std::string& visits_path) {
  std::vector<std::string> sh = {"id", "treatment_time", "outcome"};
  sh.insert(sh.end(), reg.baseline_names.begin(), reg.baseline_names.end());
  std::vector<std::vector<std::string>> srows;
  for (const auto& s : reg.subjects) {
    std::vector<std::string> row = {
        s.id,
        s.treatment_time ? csv::format_double(*s.treatment_time) : "",
        s.outcome ? csv::format_double(*s.outcome) : ""};
    for (double b : s.baseline) {
      row.push_back(std::isnan(b) ? "" : csv::format_double(b));
    }
    srows.push_back(std::move(row));
  }
  csv::write(subjects_path, sh, srows);

  std::vector<std::string> vh = {"id", "time"};
  vh.insert(vh.end(), reg.covariate_names.begin(), reg.covariate_names.end());
  std::vector<std::vector<std::string>> vrows;
  for (std::size_t i = 0; i < reg.subjects.size(); ++i) {
    for (const auto& v : reg.visits[i]) {
      std::vector<std::string> row = {reg.subjects[i].id,
                                      csv::format_double(v.time)};
      for (double x : v.values) {
        row.push_back(std::isnan(x) ? "" : csv::format_double(x));
      }
      vrows.push_back(std::move(row));
    }
  }
  csv::write(visits_path, vh, vrows);
}

std::size_t ValidationReport::total() const {
  std::size_t t = 0;
  for (const auto& i : issues) t += i.count;
  return t;
}

std::string ValidationReport::to_string() const {
  if (issues.empty()) return "ok: all invariants hold\n";
  std::ostringstream os;
  for (const auto& i : issues) os << i.kind << ": " << i.count << "\n";
  return os.str();
}

ValidationReport validate(const Registry& reg) {
  std::size_t post_treatment = 0, non_monotone = 0, no_visits = 0;
  std::size_t bad_restricted = 0, bad_flag = 0, negative_time = 0;
  std::size_t width_mismatch = 0;

  for (std::size_t i = 0; i < reg.subjects.size(); ++i) {
    const Subject& s = reg.subjects[i];
    const double expect_U = s.treatment_time
                                ? std::min(*s.treatment_time, reg.horizon_L)
                                : reg.horizon_L;
    if (s.restricted_time != expect_U) ++bad_restricted;
    const bool expect_flag = s.treatment_time && *s.treatment_time < reg.horizon_L;
    if (s.treated_before_L != expect_flag) ++bad_flag;

    if (i >= reg.visits.size() || reg.visits[i].empty()) {
      ++no_visits;
      continue;
    }
    const auto& vis = reg.visits[i];
    for (std::size_t j = 0; j < vis.size(); ++j) {
      if (vis[j].time < 0.0) ++negative_time;
      if (vis[j].time > s.restricted_time) ++post_treatment;
      if (j > 0 && !(vis[j].time > vis[j - 1].time)) ++non_monotone;
      if (vis[j].values.size() != reg.covariate_names.size()) ++width_mismatch;
    }
  }

  ValidationReport rep;
  auto add = [&rep](const char* kind, std::size_t count) {
    if (count > 0) rep.issues.push_back({kind, count});
  };
  add("PostTreatmentVisit", post_treatment);
  add("NonMonotoneVisits", non_monotone);
  add("NoVisits", no_visits);
  add("RestrictedTimeMismatch", bad_restricted);
  add("TreatedFlagMismatch", bad_flag);
  add("NegativeVisitTime", negative_time);
  add("VisitWidthMismatch", width_mismatch);
  return rep;
}

}  // namespace propproc
