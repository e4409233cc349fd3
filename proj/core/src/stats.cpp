#include "w2/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace w2 {

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double p) {
    // AS 241 (Wichura 1988), PPND16
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("normal_quantile needs p in (0,1)");
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                  3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -val : val;
}

double kolmogorov_cdf(double t) {
    if (t <= 0.0) return 0.0;
    if (t < 1.18) {
        // theta-function form, fast convergence for small t
        const double pit = std::numbers::pi / t;
        const double factor = std::sqrt(2.0 * std::numbers::pi) / t;
        double s = 0.0;
        for (int j = 1; j <= 20; j += 2) {
            const double e = std::exp(-0.125 * pit * pit *
                                      static_cast<double>(j) * j);
            if (e == 0.0) break;
            s += e;
        }
        return factor * s;
    }
    double s = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double e = std::exp(-2.0 * t * t * static_cast<double>(j) * j);
        if (e < 1e-18) break;
        s += sign * e;
        sign = -sign;
    }
    return 1.0 - 2.0 * s;
}

KsResult ks_test_standard_normal(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("KS test needs data");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double f = normal_cdf(v[i]);
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max(d, std::max(f - lo, hi - f));
    }
    KsResult r;
    r.statistic = d;
    r.p_value = 1.0 - kolmogorov_cdf(std::sqrt(n) * d);
    return r;
}

SummaryStats summarize(std::span<const double> values) {
    SummaryStats s;
    s.count = values.size();
    if (values.empty()) return s;
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : values) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    s.mean = mean;
    s.variance = (values.size() > 1) ? m2 * n / (n - 1.0) : 0.0;
    if (m2 > 0.0) {
        s.skewness = m3 / std::pow(m2, 1.5);
        s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return s;
}

double mean_of(std::span<const double> values) {
    double s = 0.0;
    for (double v : values) s += v;
    return values.empty() ? 0.0 : s / static_cast<double>(values.size());
}

double variance_of(std::span<const double> values) {
    return summarize(values).variance;
}

double median_of(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of empty set");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    double hi = values[mid];
    if (values.size() % 2 == 1) return hi;
    std::nth_element(values.begin(), values.begin() + mid - 1,
                     values.begin() + mid);
    return 0.5 * (values[mid - 1] + hi);
}

double weighted_variance(std::span<const double> values,
                         std::span<const double> weights) {
    if (values.size() != weights.size())
        throw std::invalid_argument("values/weights length mismatch");
    double mean = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) mean += weights[i] * values[i];
    double var = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - mean;
        var += weights[i] * d * d;
    }
    return var;
}

}  // namespace w2
