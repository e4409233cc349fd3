#pragma once

#include <cstddef>
#include <vector>

#include "w2/measures.hpp"

namespace w2 {

/// One nonzero coupling entry pi_{ij} between source point i and target
/// point j.
struct PlanEntry {
    std::size_t i = 0;
    std::size_t j = 0;
    double mass = 0.0;
};

/// Optimal coupling with its squared-cost value. Row sums reproduce the
/// source weights and column sums the target weights (within 1e-9); the
/// support is a forest, so at most n + m - 1 entries.
struct TransportPlan {
    std::vector<PlanEntry> entries;
    double cost = 0.0;  ///< sum pi_{ij} ||x_i - y_j||^2

    [[nodiscard]] double recompute_cost(const DiscreteMeasure& p,
                                        const DiscreteMeasure& q) const;
};

/// Dual potentials in the inner-product formulation:
/// phi_i + psi_j >= x_i . y_j with equality on the plan support, and
/// value = sum_i w_i phi_i + sum_j v_j psi_j matches the maximal
/// correlation integral.
struct DualPair {
    std::vector<double> phi;
    std::vector<double> psi;
    double value = 0.0;

    /// max(0, max_{ij} (x_i.y_j - phi_i - psi_j)); 0 means feasible.
    [[nodiscard]] double max_violation(const DiscreteMeasure& p,
                                       const DiscreteMeasure& q) const;
};

struct ExactResult {
    double cost = 0.0;  ///< squared quadratic transportation cost
    TransportPlan plan;
    DualPair dual;
};

/// Exact quadratic optimal transport between discrete measures.
/// Equal-size uniform instances go through a shortest-augmenting-path
/// assignment solver; general weights through successive-shortest-path
/// min-cost flow on the dense bipartite graph. Single-atom sides use the
/// closed form.
ExactResult w2_exact(const DiscreteMeasure& p, const DiscreteMeasure& q);

inline constexpr std::size_t kBruteforceMaxPoints = 9;

/// Exhaustive matching minimum (1/n) min_sigma sum ||x_i - y_sigma(i)||^2.
/// Requires uniform weights, equal counts, n <= 9.
double w2_bruteforce(const DiscreteMeasure& p, const DiscreteMeasure& q);

/// One-dimensional squared cost via quantile coupling over the common
/// refinement of the two weight partitions. Exact for arbitrary weights.
double w2_1d(const DiscreteMeasure& p, const DiscreteMeasure& q);

}  // namespace w2
