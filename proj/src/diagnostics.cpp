#include "propproc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "propproc/errors.hpp"
#include "propproc/stats.hpp"

namespace propproc {

namespace {

// Average ranks (1-based) of v; exact value equality defines a tie.
std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double tie_correction_sum(const std::vector<double>& values) {
  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    total += t * t * t - t;
    i = j + 1;
  }
  return total;
}

// Doubled average ranks are integers; builds the exact null distribution of
// 2*W+ over all sign assignments by convolution.
std::vector<double> signed_rank_distribution(const std::vector<long>& ranks2) {
  long total = std::accumulate(ranks2.begin(), ranks2.end(), 0L);
  std::vector<double> dist(static_cast<std::size_t>(total) + 1, 0.0);
  dist[0] = 1.0;
  long cur = 0;
  for (long r : ranks2) {
    for (long s = cur; s >= 0; --s) {
      if (dist[static_cast<std::size_t>(s)] > 0.0) {
        dist[static_cast<std::size_t>(s + r)] += dist[static_cast<std::size_t>(s)];
      }
    }
    cur += r;
  }
  return dist;
}

// Exact distribution of the doubled rank sum over subsets of size na.
std::vector<std::vector<double>> rank_sum_distribution(
    const std::vector<long>& ranks2, std::size_t na) {
  const long total = std::accumulate(ranks2.begin(), ranks2.end(), 0L);
  std::vector<std::vector<double>> dp(
      na + 1, std::vector<double>(static_cast<std::size_t>(total) + 1, 0.0));
  dp[0][0] = 1.0;
  // c runs downward so each rank is used at most once per subset
  for (long r : ranks2) {
    for (std::size_t c = na; c >= 1; --c) {
      for (long s = total - r; s >= 0; --s) {
        if (dp[c - 1][static_cast<std::size_t>(s)] > 0.0) {
          dp[c][static_cast<std::size_t>(s + r)] += dp[c - 1][static_cast<std::size_t>(s)];
        }
      }
    }
  }
  return dp;
}

double two_sided_from_counts(const std::vector<double>& dist, long w2) {
  double total = 0.0, le = 0.0, ge = 0.0;
  for (std::size_t s = 0; s < dist.size(); ++s) {
    total += dist[s];
    if (static_cast<long>(s) <= w2) le += dist[s];
    if (static_cast<long>(s) >= w2) ge += dist[s];
  }
  return std::min(1.0, 2.0 * std::min(le, ge) / total);
}

}  // namespace

BalanceResult balance_test(const Registry& reg, const CurveSet* curves,
                           const std::string& covariate, const MatchSet* strata) {
  int tv_index = -1, baseline_index = -1;
  for (std::size_t k = 0; k < reg.covariate_names.size(); ++k) {
    if (reg.covariate_names[k] == covariate) tv_index = static_cast<int>(k);
  }
  if (tv_index < 0) {
    for (std::size_t b = 0; b < reg.baseline_names.size(); ++b) {
      if (reg.baseline_names[b] == covariate) baseline_index = static_cast<int>(b);
    }
  }
  if (tv_index < 0 && baseline_index < 0) {
    throw ConfigError("unknown covariate '" + covariate + "'");
  }
  if (tv_index >= 0 && curves == nullptr) {
    throw ConfigError("balance test for time-varying covariate '" + covariate +
                      "' needs interpolated curves");
  }

  auto value_at = [&](int subject, double t) {
    if (tv_index >= 0) return curves->eval(subject, tv_index, t, /*full_domain=*/true);
    return reg.subjects[static_cast<std::size_t>(subject)]
        .baseline[static_cast<std::size_t>(baseline_index)];
  };

  // Strata: whole registry, or one stratum per matched pair.
  std::vector<std::vector<int>> groups;
  if (strata == nullptr) {
    std::vector<int> all(reg.n());
    std::iota(all.begin(), all.end(), 0);
    groups.push_back(std::move(all));
  } else {
    for (const auto& p : strata->pairs) {
      const int a = reg.subject_index(p.treated_id);
      const int b = reg.subject_index(p.control_id);
      if (a < 0 || b < 0) throw DataError("match set references unknown subject");
      groups.push_back({a, b});
    }
  }

  double score = 0.0, variance = 0.0;
  int events_used = 0;
  for (const auto& members : groups) {
    // event times within the stratum, Breslow-grouped on exact equality
    std::vector<std::pair<double, int>> events;
    for (int i : members) {
      const Subject& s = reg.subjects[static_cast<std::size_t>(i)];
      if (s.treated_before_L) events.emplace_back(*s.treatment_time, i);
    }
    std::sort(events.begin(), events.end());
    std::size_t e = 0;
    while (e < events.size()) {
      const double t = events[e].first;
      std::vector<int> dead;
      while (e < events.size() && events[e].first == t) {
        dead.push_back(events[e].second);
        ++e;
      }
      double s0 = 0.0, s1 = 0.0, s2 = 0.0;
      for (int l : members) {
        if (reg.subjects[static_cast<std::size_t>(l)].restricted_time >= t) {
          const double x = value_at(l, t);
          s0 += 1.0;
          s1 += x;
          s2 += x * x;
        }
      }
      if (s0 <= 0.0) continue;
      const double xbar = s1 / s0;
      const double d = static_cast<double>(dead.size());
      for (int i : dead) score += value_at(i, t) - xbar;
      variance += d * (s2 / s0 - xbar * xbar);
      events_used += static_cast<int>(dead.size());
    }
  }

  BalanceResult out;
  out.covariate = covariate;
  out.method = strata ? "stratified" : "unstratified";
  out.n_events_used = events_used;
  if (variance > 0.0) {
    out.statistic = score * score / variance;
    out.p_value = stats::chi2_sf_1df(out.statistic);
  } else {
    // Degenerate strata: nothing discriminates, statistic 0 by convention.
    out.statistic = 0.0;
    out.p_value = 1.0;
  }
  return out;
}

OutcomeResult wilcoxon_signed_rank(const std::vector<double>& diffs) {
  OutcomeResult out;
  out.n = static_cast<int>(diffs.size());
  out.median_difference = diffs.empty() ? 0.0 : stats::median(diffs);

  std::vector<double> nz;
  for (double d : diffs) {
    if (d != 0.0 && !std::isnan(d)) nz.push_back(d);
  }
  out.n_a = static_cast<int>(nz.size());
  if (nz.empty()) {
    out.p_value = 1.0;
    out.median_difference = diffs.empty() ? 0.0 : stats::median(diffs);
    return out;
  }

  std::vector<double> abs_d(nz.size());
  std::transform(nz.begin(), nz.end(), abs_d.begin(),
                 [](double d) { return std::abs(d); });
  const std::vector<double> ranks = average_ranks(abs_d);
  double w_plus = 0.0;
  for (std::size_t i = 0; i < nz.size(); ++i) {
    if (nz[i] > 0.0) w_plus += ranks[i];
  }
  out.statistic = w_plus;
  const std::size_t n = nz.size();

  if (n <= 20) {
    std::vector<long> ranks2(n);
    for (std::size_t i = 0; i < n; ++i) ranks2[i] = std::lround(2.0 * ranks[i]);
    const auto dist = signed_rank_distribution(ranks2);
    out.p_value = two_sided_from_counts(dist, std::lround(2.0 * w_plus));
    out.exact = true;
  } else {
    const double nn = static_cast<double>(n);
    const double mu = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 -
                       tie_correction_sum(abs_d) / 48.0;
    if (var <= 0.0) {
      out.p_value = 1.0;
      return out;
    }
    double z = 0.0;
    if (w_plus > mu) z = (w_plus - mu - 0.5) / std::sqrt(var);
    else if (w_plus < mu) z = (w_plus - mu + 0.5) / std::sqrt(var);
    out.p_value = std::min(1.0, 2.0 * stats::normal_sf(std::abs(z)));
  }
  return out;
}

OutcomeResult wilcoxon_rank_sum(const std::vector<double>& group_a,
                                const std::vector<double>& group_b) {
  if (group_a.empty() || group_b.empty()) {
    throw DataError("rank-sum test needs both groups nonempty");
  }
  OutcomeResult out;
  out.n_a = static_cast<int>(group_a.size());
  out.n_b = static_cast<int>(group_b.size());
  out.n = out.n_a + out.n_b;
  out.median_difference = stats::median(group_a) - stats::median(group_b);

  std::vector<double> pooled(group_a);
  pooled.insert(pooled.end(), group_b.begin(), group_b.end());
  const std::vector<double> ranks = average_ranks(pooled);
  double w = 0.0;
  for (std::size_t i = 0; i < group_a.size(); ++i) w += ranks[i];
  out.statistic = w;

  const std::size_t n = pooled.size();
  const std::size_t na = group_a.size();
  if (n <= 12) {
    std::vector<long> ranks2(n);
    for (std::size_t i = 0; i < n; ++i) ranks2[i] = std::lround(2.0 * ranks[i]);
    const auto dp = rank_sum_distribution(ranks2, na);
    out.p_value = two_sided_from_counts(dp[na], std::lround(2.0 * w));
    out.exact = true;
  } else {
    const double nn = static_cast<double>(n);
    const double a = static_cast<double>(na);
    const double b = static_cast<double>(group_b.size());
    const double mu = a * (nn + 1.0) / 2.0;
    const double var =
        a * b / 12.0 * ((nn + 1.0) - tie_correction_sum(pooled) / (nn * (nn - 1.0)));
    if (var <= 0.0) {
      out.p_value = 1.0;
      return out;
    }
    double z = 0.0;
    if (w > mu) z = (w - mu - 0.5) / std::sqrt(var);
    else if (w < mu) z = (w - mu + 0.5) / std::sqrt(var);
    out.p_value = std::min(1.0, 2.0 * stats::normal_sf(std::abs(z)));
  }
  return out;
}

}  // namespace propproc
