#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace w2 {

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile (inverse CDF), Wichura's AS 241 rational
/// approximation; absolute error well below 1e-8 on (0, 1).
double normal_quantile(double p);

/// Asymptotic Kolmogorov distribution K(t) = P(sup|B(s)| <= t):
/// K(t) = 1 - 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 t^2), with the
/// theta-dual series for small t.
double kolmogorov_cdf(double t);

struct KsResult {
    double statistic = 0.0;  ///< sup-norm distance between ECDF and N(0,1)
    double p_value = 1.0;    ///< asymptotic, from sqrt(n) * statistic
};

/// One-sample Kolmogorov-Smirnov test of `values` against the standard
/// normal distribution.
KsResult ks_test_standard_normal(std::span<const double> values);

struct SummaryStats {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;         ///< unbiased (n-1 denominator)
    double skewness = 0.0;         ///< standardized third moment
    double excess_kurtosis = 0.0;  ///< standardized fourth moment - 3
};

SummaryStats summarize(std::span<const double> values);

double mean_of(std::span<const double> values);
double variance_of(std::span<const double> values);
double median_of(std::vector<double> values);

/// Variance of `values` under probability weights `weights`
/// (sum w_i (v_i - sum w v)^2).
double weighted_variance(std::span<const double> values,
                         std::span<const double> weights);

}  // namespace w2
