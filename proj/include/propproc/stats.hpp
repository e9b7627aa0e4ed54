#pragma once

#include <functional>
#include <vector>

namespace propproc::stats {

double normal_cdf(double z);
double normal_sf(double z);

// Survival function of the chi-square distribution with 1 degree of freedom.
double chi2_sf_1df(double x);

// Sample median / quantile (type-7 linear interpolation). Inputs copied.
double median(std::vector<double> v);
double quantile(std::vector<double> v, double q);

// Two-sided Kolmogorov-Smirnov distance between the empirical distribution of
// `samples` and a continuous CDF.
double ks_distance(std::vector<double> samples,
                   const std::function<double(double)>& cdf);

}  // namespace propproc::stats
