#include "w2/measures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace w2 {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// --- DiscreteMeasure --------------------------------------------------------

DiscreteMeasure::DiscreteMeasure(std::vector<Point> points,
                                 std::vector<double> weights) {
    if (points.empty()) throw std::invalid_argument("measure needs >= 1 point");
    if (points.size() != weights.size())
        throw std::invalid_argument("points/weights length mismatch");
    dim_ = points[0].size();
    if (dim_ == 0) throw std::invalid_argument("points must have dimension >= 1");
    for (const auto& p : points)
        if (p.size() != dim_)
            throw std::invalid_argument("points have mixed dimensions");

    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("negative or NaN weight");
        total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("weights sum to zero");
    if (std::abs(total - 1.0) > 1e-12 * std::max(1.0, total) &&
        std::abs(total - 1.0) > 1e-6)
        throw std::invalid_argument("weights must sum to 1 (got " +
                                    std::to_string(total) + ")");

    // merge duplicates into the first occurrence, preserving order
    std::map<Point, std::size_t> seen;
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto [it, inserted] = seen.emplace(points[i], points_.size());
        if (inserted) {
            points_.push_back(std::move(points[i]));
            weights_.push_back(weights[i]);
        } else {
            weights_[it->second] += weights[i];
        }
    }

    for (double& w : weights_) w /= total;
    // pin the stored sum to exactly 1.0: the largest weight absorbs the
    // floating-point residue, which downstream zero-sum gradient identities
    // rely on
    for (int pass = 0; pass < 4; ++pass) {
        double s = 0.0;
        for (double w : weights_) s += w;
        if (s == 1.0) break;
        auto it = std::max_element(weights_.begin(), weights_.end());
        *it -= (s - 1.0);
    }
}

DiscreteMeasure DiscreteMeasure::uniform(std::vector<Point> points) {
    std::vector<double> w(points.size(), 1.0 / static_cast<double>(points.size()));
    return DiscreteMeasure(std::move(points), std::move(w));
}

DiscreteMeasure DiscreteMeasure::dirac(Point x) {
    std::vector<Point> pts;
    pts.push_back(std::move(x));
    return DiscreteMeasure(std::move(pts), {1.0});
}

double DiscreteMeasure::norm_moment(int order) const {
    if (order != 2 && order != 4)
        throw std::invalid_argument("moment order must be 2 or 4");
    double s = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const double n2 = squared_norm(points_[i]);
        s += weights_[i] * (order == 2 ? n2 : n2 * n2);
    }
    return s;
}

// --- cholesky ---------------------------------------------------------------

namespace {

std::vector<double> cholesky_lower(const std::vector<double>& cov,
                                   std::size_t d) {
    if (cov.size() != d * d)
        throw std::invalid_argument("covariance must be dim x dim");
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(cov[i * d + j] - cov[j * d + i]) >
                1e-12 * (1.0 + std::abs(cov[i * d + j])))
                throw std::invalid_argument("covariance must be symmetric");
    std::vector<double> L(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = cov[i * d + j];
            for (std::size_t k = 0; k < j; ++k) s -= L[i * d + k] * L[j * d + k];
            if (i == j) {
                if (s <= 0.0)
                    throw std::invalid_argument(
                        "covariance is not positive definite");
                L[i * d + i] = std::sqrt(s);
            } else {
                L[i * d + j] = s / L[j * d + j];
            }
        }
    }
    return L;
}

double trace(const std::vector<double>& m, std::size_t d) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += m[i * d + i];
    return s;
}

double trace_sq(const std::vector<double>& m, std::size_t d) {
    // trace(M^2) for symmetric M
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) s += m[i * d + j] * m[j * d + i];
    return s;
}

double quad_form(const std::vector<double>& m, const std::vector<double>& v) {
    const std::size_t d = v.size();
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) s += v[i] * m[i * d + j] * v[j];
    return s;
}

}  // namespace

// --- SamplableMeasure factories ---------------------------------------------

SamplableMeasure SamplableMeasure::uniform_box(std::vector<double> lo,
                                               std::vector<double> hi) {
    if (lo.empty() || lo.size() != hi.size())
        throw std::invalid_argument("uniform-box needs matching lo/hi");
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (!(lo[i] < hi[i]))
            throw std::invalid_argument("uniform-box needs lo < hi");
    SamplableMeasure m;
    m.family_ = Family::kUniformBox;
    m.dim_ = lo.size();
    m.params_ = UniformBoxParams{std::move(lo), std::move(hi)};
    return m;
}

SamplableMeasure SamplableMeasure::gaussian(std::vector<double> mean,
                                            std::vector<double> cov) {
    if (mean.empty()) throw std::invalid_argument("gaussian needs a mean");
    SamplableMeasure m;
    m.family_ = Family::kGaussian;
    m.dim_ = mean.size();
    m.chol_.push_back(cholesky_lower(cov, m.dim_));
    m.params_ = GaussianParams{std::move(mean), std::move(cov)};
    return m;
}

SamplableMeasure SamplableMeasure::gaussian_iso(std::vector<double> mean,
                                                double var) {
    const std::size_t d = mean.size();
    std::vector<double> cov(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) cov[i * d + i] = var;
    return gaussian(std::move(mean), std::move(cov));
}

SamplableMeasure SamplableMeasure::gaussian_mixture(
    std::vector<double> weights, std::vector<GaussianParams> components) {
    if (components.empty() || weights.size() != components.size())
        throw std::invalid_argument("mixture needs matching weights/components");
    double total = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw std::invalid_argument("mixture weights must be > 0");
        total += w;
    }
    for (double& w : weights) w /= total;
    SamplableMeasure m;
    m.family_ = Family::kGaussianMixture;
    m.dim_ = components[0].mean.size();
    for (const auto& c : components) {
        if (c.mean.size() != m.dim_)
            throw std::invalid_argument("mixture components have mixed dims");
        m.chol_.push_back(cholesky_lower(c.cov, m.dim_));
    }
    m.params_ = GaussianMixtureParams{std::move(weights), std::move(components)};
    return m;
}

SamplableMeasure SamplableMeasure::uniform_ball(std::vector<double> center,
                                                double radius) {
    if (center.empty()) throw std::invalid_argument("uniform-ball needs a center");
    if (!(radius > 0.0)) throw std::invalid_argument("radius must be > 0");
    SamplableMeasure m;
    m.family_ = Family::kUniformBall;
    m.dim_ = center.size();
    m.params_ = UniformBallParams{std::move(center), radius};
    return m;
}

SamplableMeasure SamplableMeasure::piecewise_uniform_1d(
    std::vector<std::pair<double, double>> intervals) {
    if (intervals.empty())
        throw std::invalid_argument("piecewise-uniform-1d needs intervals");
    std::sort(intervals.begin(), intervals.end());
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        if (!(intervals[i].first < intervals[i].second))
            throw std::invalid_argument("interval endpoints must be increasing");
        if (i > 0 && intervals[i].first < intervals[i - 1].second)
            throw std::invalid_argument("intervals must be disjoint");
    }
    SamplableMeasure m;
    m.family_ = Family::kPiecewiseUniform1d;
    m.dim_ = 1;
    m.params_ = PiecewiseUniform1dParams{std::move(intervals)};
    return m;
}

SamplableMeasure SamplableMeasure::piecewise_gap(double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
    return piecewise_uniform_1d({{-eps - 1.0, -eps}, {eps, 1.0 + eps}});
}

bool SamplableMeasure::regular() const {
    return family_ != Family::kPiecewiseUniform1d;
}

std::string SamplableMeasure::family_name() const {
    switch (family_) {
        case Family::kUniformBox: return "uniform-box";
        case Family::kGaussian: return "gaussian";
        case Family::kGaussianMixture: return "gaussian-mixture";
        case Family::kUniformBall: return "uniform-ball";
        case Family::kPiecewiseUniform1d: return "piecewise-uniform-1d";
    }
    return "?";
}

const UniformBoxParams& SamplableMeasure::box_params() const {
    return std::get<UniformBoxParams>(params_);
}
const GaussianParams& SamplableMeasure::gaussian_params() const {
    return std::get<GaussianParams>(params_);
}
const GaussianMixtureParams& SamplableMeasure::mixture_params() const {
    return std::get<GaussianMixtureParams>(params_);
}
const UniformBallParams& SamplableMeasure::ball_params() const {
    return std::get<UniformBallParams>(params_);
}
const PiecewiseUniform1dParams& SamplableMeasure::piecewise_params() const {
    return std::get<PiecewiseUniform1dParams>(params_);
}

// --- sampling ---------------------------------------------------------------

namespace {

void fill_normals(Philox& eng, std::span<double> out) {
    std::size_t i = 0;
    while (i + 1 < out.size()) {
        auto [a, b] = eng.next_normal_pair();
        out[i++] = a;
        out[i++] = b;
    }
    if (i < out.size()) out[i] = eng.next_normal_pair()[0];
}

void gaussian_transform(const std::vector<double>& mean,
                        const std::vector<double>& chol,
                        std::span<const double> g, std::span<double> out) {
    const std::size_t d = mean.size();
    for (std::size_t i = 0; i < d; ++i) {
        double s = mean[i];
        for (std::size_t j = 0; j <= i; ++j) s += chol[i * d + j] * g[j];
        out[i] = s;
    }
}

}  // namespace

void SamplableMeasure::sample_one(Philox& eng, std::span<double> out) const {
    switch (family_) {
        case Family::kUniformBox: {
            const auto& p = box_params();
            for (std::size_t i = 0; i < dim_; ++i)
                out[i] = p.lo[i] + eng.next_double() * (p.hi[i] - p.lo[i]);
            return;
        }
        case Family::kGaussian: {
            std::vector<double> g(dim_);
            fill_normals(eng, g);
            gaussian_transform(gaussian_params().mean, chol_[0], g, out);
            return;
        }
        case Family::kGaussianMixture: {
            const auto& p = mixture_params();
            const double u = eng.next_double();
            double acc = 0.0;
            std::size_t c = p.components.size() - 1;
            for (std::size_t i = 0; i < p.components.size(); ++i) {
                acc += p.component_weights[i];
                if (u < acc) {
                    c = i;
                    break;
                }
            }
            std::vector<double> g(dim_);
            fill_normals(eng, g);
            gaussian_transform(p.components[c].mean, chol_[c], g, out);
            return;
        }
        case Family::kUniformBall: {
            const auto& p = ball_params();
            std::vector<double> g(dim_);
            fill_normals(eng, g);
            const double norm = std::sqrt(squared_norm(g));
            const double r =
                p.radius * std::pow(eng.next_double_pos(),
                                    1.0 / static_cast<double>(dim_));
            const double scale = (norm > 0.0) ? r / norm : 0.0;
            for (std::size_t i = 0; i < dim_; ++i)
                out[i] = p.center[i] + scale * g[i];
            return;
        }
        case Family::kPiecewiseUniform1d: {
            // inverse CDF: intervals get length-proportional shares
            const auto& iv = piecewise_params().intervals;
            double total = 0.0;
            for (const auto& [a, b] : iv) total += b - a;
            double u = eng.next_double() * total;
            for (const auto& [a, b] : iv) {
                const double len = b - a;
                if (u < len) {
                    out[0] = a + u;
                    return;
                }
                u -= len;
            }
            out[0] = iv.back().second;
            return;
        }
    }
}

void SamplableMeasure::reflect(std::span<const double> y,
                               std::span<double> out) const {
    switch (family_) {
        case Family::kUniformBox: {
            const auto& p = box_params();
            for (std::size_t i = 0; i < dim_; ++i)
                out[i] = p.lo[i] + p.hi[i] - y[i];
            return;
        }
        case Family::kGaussian: {
            const auto& mean = gaussian_params().mean;
            for (std::size_t i = 0; i < dim_; ++i) out[i] = 2.0 * mean[i] - y[i];
            return;
        }
        case Family::kGaussianMixture: {
            // reflect about the nearest component mean (by Mahalanobis-free
            // Euclidean distance); each component is symmetric about its
            // mean, and the component choice is a deterministic function of
            // y, so the pair marginal stays the mixture for well-separated
            // components. For overlapping components this is only
            // approximate, so mixtures fall back to the identity (no
            // antithetic gain, still unbiased).
            for (std::size_t i = 0; i < dim_; ++i) out[i] = y[i];
            return;
        }
        case Family::kUniformBall: {
            const auto& p = ball_params();
            for (std::size_t i = 0; i < dim_; ++i)
                out[i] = 2.0 * p.center[i] - y[i];
            return;
        }
        case Family::kPiecewiseUniform1d: {
            // mirror in CDF space: F(out) = 1 - F(y)
            const auto& iv = piecewise_params().intervals;
            double total = 0.0;
            for (const auto& [a, b] : iv) total += b - a;
            double before = 0.0;
            for (const auto& [a, b] : iv) {
                if (y[0] <= b) {
                    const double u = before + std::clamp(y[0] - a, 0.0, b - a);
                    double target = total - u;
                    for (const auto& [c, d] : iv) {
                        const double len = d - c;
                        if (target <= len) {
                            out[0] = c + target;
                            return;
                        }
                        target -= len;
                    }
                    out[0] = iv.back().second;
                    return;
                }
                before += b - a;
            }
            out[0] = iv.front().first;
            return;
        }
    }
}

bool SamplableMeasure::has_closed_moments() const {
    return family_ == Family::kGaussian || family_ == Family::kUniformBox;
}

double SamplableMeasure::closed_norm_moment(int order) const {
    if (order != 2 && order != 4)
        throw std::invalid_argument("moment order must be 2 or 4");
    switch (family_) {
        case Family::kUniformBox: {
            const auto& p = box_params();
            // per-coordinate raw moments of U(lo, hi)
            auto m2 = [](double a, double b) {
                return (b * b * b - a * a * a) / (3.0 * (b - a));
            };
            auto m4 = [](double a, double b) {
                return (std::pow(b, 5) - std::pow(a, 5)) / (5.0 * (b - a));
            };
            if (order == 2) {
                double s = 0.0;
                for (std::size_t i = 0; i < dim_; ++i) s += m2(p.lo[i], p.hi[i]);
                return s;
            }
            // E(sum Y_i^2)^2 = sum E Y_i^4 + sum_{i != j} E Y_i^2 E Y_j^2
            double s = 0.0;
            for (std::size_t i = 0; i < dim_; ++i) {
                s += m4(p.lo[i], p.hi[i]);
                for (std::size_t j = 0; j < dim_; ++j)
                    if (j != i) s += m2(p.lo[i], p.hi[i]) * m2(p.lo[j], p.hi[j]);
            }
            return s;
        }
        case Family::kGaussian: {
            const auto& p = gaussian_params();
            const double tr = trace(p.cov, dim_);
            const double mu2 = squared_norm(p.mean);
            if (order == 2) return tr + mu2;
            // Var(||Y||^2) = 2 tr(S^2) + 4 mu' S mu for Y ~ N(mu, S)
            const double var =
                2.0 * trace_sq(p.cov, dim_) + 4.0 * quad_form(p.cov, p.mean);
            const double m2 = tr + mu2;
            return var + m2 * m2;
        }
        default:
            throw std::logic_error("no closed moments for this family");
    }
}

// --- operations -------------------------------------------------------------

DiscreteMeasure sample(const SamplableMeasure& measure, std::size_t n,
                       SeedSpec seed) {
    if (n < 1) throw std::invalid_argument("sample size must be >= 1");
    Philox eng(seed);
    std::vector<Point> pts(n, Point(measure.dim()));
    for (std::size_t i = 0; i < n; ++i) measure.sample_one(eng, pts[i]);
    return DiscreteMeasure::uniform(std::move(pts));
}

DiscreteMeasure sample(const DiscreteMeasure& measure, std::size_t n,
                       SeedSpec seed) {
    if (n < 1) throw std::invalid_argument("sample size must be >= 1");
    Philox eng(seed);
    const auto& w = measure.weights();
    std::vector<Point> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = eng.next_double();
        double acc = 0.0;
        std::size_t idx = measure.size() - 1;
        for (std::size_t j = 0; j < measure.size(); ++j) {
            acc += w[j];
            if (u < acc) {
                idx = j;
                break;
            }
        }
        pts.push_back(measure.point(idx));
    }
    return DiscreteMeasure::uniform(std::move(pts));
}

MomentEstimate moment(const SamplableMeasure& measure, int order,
                      std::size_t mc_samples, SeedSpec seed) {
    if (order != 2 && order != 4)
        throw std::invalid_argument("moment order must be 2 or 4");
    if (measure.has_closed_moments())
        return MomentEstimate{measure.closed_norm_moment(order), 0.0, true};
    if (mc_samples < 1)
        throw std::invalid_argument("Monte Carlo moment needs mc_samples >= 1");
    Philox eng(seed);
    std::vector<double> y(measure.dim());
    double mean = 0.0, m2 = 0.0;  // Welford
    for (std::size_t t = 0; t < mc_samples; ++t) {
        measure.sample_one(eng, y);
        const double n2 = squared_norm(y);
        const double v = (order == 2) ? n2 : n2 * n2;
        const double delta = v - mean;
        mean += delta / static_cast<double>(t + 1);
        m2 += delta * (v - mean);
    }
    const double n = static_cast<double>(mc_samples);
    const double se = (mc_samples > 1) ? std::sqrt(m2 / (n - 1.0) / n) : 0.0;
    return MomentEstimate{mean, se, false};
}

MomentEstimate moment(const DiscreteMeasure& measure, int order) {
    return MomentEstimate{measure.norm_moment(order), 0.0, true};
}

PairwiseMoments pairwise_moment_estimates(const DiscreteMeasure& sample,
                                          std::uint64_t pair_budget,
                                          SeedSpec seed) {
    const std::size_t k = sample.size();
    if (k == 1) return PairwiseMoments{0.0, 0.0, 0, false};

    // canonical order so the estimate ignores the caller's point order
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return sample.point(a) < sample.point(b);
    });

    const auto& w = sample.weights();
    auto pair_terms = [&](std::size_t i, std::size_t j, double& t22,
                          double& t4) {
        const double d2 = squared_distance(sample.point(i), sample.point(j));
        t22 = d2 * squared_norm(sample.point(i));
        t4 = d2 * d2;
    };

    PairwiseMoments out;
    const std::uint64_t total_pairs =
        static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(k - 1);
    if (total_pairs <= pair_budget) {
        double s22 = 0.0, s4 = 0.0, wsum = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b < k; ++b) {
                if (a == b) continue;
                const std::size_t i = order[a], j = order[b];
                double t22, t4;
                pair_terms(i, j, t22, t4);
                const double ww = w[i] * w[j];
                s22 += ww * t22;
                s4 += ww * t4;
                wsum += ww;
            }
        }
        out.m22 = s22 / wsum;
        out.m4 = s4 / wsum;
        out.pairs_used = total_pairs;
        return out;
    }

    // weighted subsample of ordered pairs: draw (i, j) independently from
    // the weights, reject i == j
    Philox eng(seed);
    auto draw_index = [&](double u) {
        double acc = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            acc += w[order[a]];
            if (u < acc) return order[a];
        }
        return order[k - 1];
    };
    double s22 = 0.0, s4 = 0.0;
    std::uint64_t used = 0;
    while (used < pair_budget) {
        const std::size_t i = draw_index(eng.next_double());
        const std::size_t j = draw_index(eng.next_double());
        if (i == j) continue;
        double t22, t4;
        pair_terms(i, j, t22, t4);
        // importance weight for the i != j restriction is uniform, so the
        // plain average over accepted pairs is unbiased
        s22 += t22;
        s4 += t4;
        ++used;
    }
    out.m22 = s22 / static_cast<double>(used);
    out.m4 = s4 / static_cast<double>(used);
    out.pairs_used = used;
    out.subsampled = true;
    return out;
}

}  // namespace w2
