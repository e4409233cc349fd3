#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "w2/rng.hpp"

namespace w2 {

using Point = std::vector<double>;

/// Finitely supported probability measure: support points plus weights.
/// Construction validates and canonicalizes:
///   - weights are nonnegative and rescaled to sum to exactly 1.0 in double
///     precision (the largest weight absorbs the rounding residue),
///   - duplicate points are merged into their first occurrence (weights add),
///   - input order is otherwise preserved, so indices track caller rows.
class DiscreteMeasure {
public:
    DiscreteMeasure(std::vector<Point> points, std::vector<double> weights);

    /// Uniform weights 1/k over the given points.
    static DiscreteMeasure uniform(std::vector<Point> points);

    /// Single atom.
    static DiscreteMeasure dirac(Point x);

    [[nodiscard]] std::size_t size() const { return points_.size(); }
    [[nodiscard]] std::size_t dim() const { return dim_; }
    [[nodiscard]] const std::vector<Point>& points() const { return points_; }
    [[nodiscard]] const std::vector<double>& weights() const { return weights_; }
    [[nodiscard]] const Point& point(std::size_t i) const { return points_[i]; }
    [[nodiscard]] double weight(std::size_t i) const { return weights_[i]; }

    /// Sum over support of w_i * ||x_i||^order, exact.
    [[nodiscard]] double norm_moment(int order) const;

private:
    std::vector<Point> points_;
    std::vector<double> weights_;
    std::size_t dim_ = 0;
};

// --- continuous reference families ----------------------------------------

struct UniformBoxParams {
    std::vector<double> lo;
    std::vector<double> hi;
};

struct GaussianParams {
    std::vector<double> mean;
    /// Row-major dense covariance, dim x dim.
    std::vector<double> cov;
};

struct GaussianMixtureParams {
    std::vector<double> component_weights;
    std::vector<GaussianParams> components;
};

struct UniformBallParams {
    std::vector<double> center;
    double radius = 1.0;
};

/// Uniform law on a finite union of disjoint intervals (dimension 1).
/// The constructor `piecewise_gap(eps)` builds the symmetric two-interval
/// set (-eps-1, -eps) u (eps, 1+eps) whose support is not convex.
struct PiecewiseUniform1dParams {
    std::vector<std::pair<double, double>> intervals;
};

enum class Family {
    kUniformBox,
    kGaussian,
    kGaussianMixture,
    kUniformBall,
    kPiecewiseUniform1d,
};

/// Continuous reference measure with a seeded sampler and second/fourth
/// norm moments. All built-in families except the piecewise-uniform one
/// have a positive density on the interior of a convex support.
class SamplableMeasure {
public:
    static SamplableMeasure uniform_box(std::vector<double> lo,
                                        std::vector<double> hi);
    static SamplableMeasure gaussian(std::vector<double> mean,
                                     std::vector<double> cov);
    /// Isotropic convenience: N(mean, var * I).
    static SamplableMeasure gaussian_iso(std::vector<double> mean, double var);
    static SamplableMeasure gaussian_mixture(
        std::vector<double> weights, std::vector<GaussianParams> components);
    static SamplableMeasure uniform_ball(std::vector<double> center,
                                         double radius);
    static SamplableMeasure piecewise_uniform_1d(
        std::vector<std::pair<double, double>> intervals);
    /// The two-interval set (-eps-1,-eps) u (eps,1+eps).
    static SamplableMeasure piecewise_gap(double eps);

    [[nodiscard]] Family family() const { return family_; }
    [[nodiscard]] std::size_t dim() const { return dim_; }
    /// Positive density on the interior of a convex support.
    [[nodiscard]] bool regular() const;
    [[nodiscard]] std::string family_name() const;

    /// Draw one point, advancing the engine (fixed per-draw consumption).
    void sample_one(Philox& eng, std::span<double> out) const;

    /// The antithetic mate of a drawn point: a measurable reflection that
    /// preserves the law (negated normals, mirrored uniforms). Used by
    /// solver-internal Monte Carlo for variance reduction.
    void reflect(std::span<const double> y, std::span<double> out) const;

    /// True when E||Y||^2 and E||Y||^4 are available in closed form here
    /// (gaussian and uniform-box families).
    [[nodiscard]] bool has_closed_moments() const;
    [[nodiscard]] double closed_norm_moment(int order) const;

    [[nodiscard]] const UniformBoxParams& box_params() const;
    [[nodiscard]] const GaussianParams& gaussian_params() const;
    [[nodiscard]] const GaussianMixtureParams& mixture_params() const;
    [[nodiscard]] const UniformBallParams& ball_params() const;
    [[nodiscard]] const PiecewiseUniform1dParams& piecewise_params() const;

private:
    SamplableMeasure() = default;

    Family family_ = Family::kUniformBox;
    std::size_t dim_ = 0;
    std::variant<UniformBoxParams, GaussianParams, GaussianMixtureParams,
                 UniformBallParams, PiecewiseUniform1dParams>
        params_;
    /// Cholesky factors (lower, row-major) for gaussian components.
    std::vector<std::vector<double>> chol_;
};

// --- operations ------------------------------------------------------------

/// Empirical measure of n i.i.d. draws. Exact duplicates merge per the
/// DiscreteMeasure contract, so sampling a finite-support target returns
/// its empirical frequencies.
DiscreteMeasure sample(const SamplableMeasure& measure, std::size_t n,
                       SeedSpec seed);

/// Empirical measure of n draws from a finite-support source.
DiscreteMeasure sample(const DiscreteMeasure& measure, std::size_t n,
                       SeedSpec seed);

struct MomentEstimate {
    double value = 0.0;
    double se = 0.0;   ///< Monte Carlo standard error; 0 when exact.
    bool exact = true;
};

/// E||Y||^order for order in {2, 4}. Exact for DiscreteMeasure and for the
/// gaussian / uniform-box families; Monte Carlo with a standard error
/// otherwise (mc_samples draws from `seed`).
MomentEstimate moment(const SamplableMeasure& measure, int order,
                      std::size_t mc_samples, SeedSpec seed);
MomentEstimate moment(const DiscreteMeasure& measure, int order);

struct PairwiseMoments {
    double m22 = 0.0;  ///< estimate of E(||X1-X2||^2 ||X1||^2)
    double m4 = 0.0;   ///< estimate of E||X1-X2||^4
    std::uint64_t pairs_used = 0;
    bool subsampled = false;
};

inline constexpr std::uint64_t kDefaultPairBudget = 1'000'000;

/// Two-sample U-statistics over ordered pairs (i != j) of the weighted
/// support. Above `pair_budget` ordered pairs, a seeded uniform subsample
/// of pairs is used; pairs are indexed through a lexicographic ordering of
/// the support so the result does not depend on the caller's point order.
/// A single-atom measure (an all-duplicates sample) gives m22 = m4 = 0.
PairwiseMoments pairwise_moment_estimates(
    const DiscreteMeasure& sample, std::uint64_t pair_budget = kDefaultPairBudget,
    SeedSpec seed = SeedSpec{0x9e3779b97f4a7c15ULL, 0});

// --- small vector helpers shared across modules ----------------------------

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace w2
