#ifndef EIDESIGN_SEQUENTIAL_HPP
#define EIDESIGN_SEQUENTIAL_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "eidesign/weights.hpp"

namespace eidesign {

enum class PoolKind { Grid, Sobol, Explicit };

// Finite candidate set the support search runs over.
struct CandidatePool {
    PoolKind kind = PoolKind::Grid;
    Matrix points;  // N x d

    int size() const { return static_cast<int>(points.rows()); }
    int dim() const { return static_cast<int>(points.cols()); }
};

// Tensor grid with s+1 equispaced levels per axis ((s+1)^d points).
CandidatePool grid_pool(const Box& domain, int levels_per_axis_minus_one);

// n Sobol points scaled to the domain; the all-zeros first element maps
// to a corner and is skipped by default.
CandidatePool sobol_pool(const Box& domain, int n, std::uint64_t skip = 1);

// Deduplicated explicit point list.
CandidatePool explicit_pool(const Box& domain, Matrix points);

// Controls for the sequential support search.
struct SeqConfig {
    double epsilon_rel = 1e-6;   // add-point threshold, fraction of the criterion scale
    int max_rounds = 500;
    std::uint64_t seed = 0;      // initial-design RNG
    std::optional<Design> initial_design;  // default: l+1 random pool points
    WeightOptConfig inner;
    double gap_tolerance_rel = 1e-4;  // certification tolerance for the final gap
    bool refine_pool = false;         // densify the pool around the support and re-run
    int max_refinements = 5;
    double refine_tol = 1e-6;         // stop refining below this relative improvement
};

struct SeqReport {
    int rounds = 0;
    std::vector<double> criterion_per_round;
    Matrix added_points;  // one row per accepted candidate
    double final_value = 0.0;
    double final_threshold = 0.0;
    double final_equivalence_gap = 0.0;
    double final_inner_gap = 0.0;  // optimal-weight gap of the last inner run
    bool converged = false;
    long inner_iterations_total = 0;
    int merges = 0;
    int refinements = 0;
    std::string diagnostics;
};

// Directional derivative of the criterion toward the one-point design
// at x; nonnegative everywhere exactly when the design is optimal.
double point_derivative(const Vector& x, const Design& design, const GlmModel& model,
                        const CriterionSpec& crit);

// Pool point with the smallest directional derivative (lowest index wins ties).
struct CandidateSelection {
    int index = -1;
    Vector point;
    double phi = 0.0;
};
CandidateSelection select_candidate(const CandidatePool& pool, const Design& design,
                                    const GlmModel& model, const CriterionSpec& crit);

// Equivalence-theorem scan over the pool: the per-point condition value
// t(x) must not exceed the threshold; gap = max over the pool of the
// excess. Nonpositive gap certifies the design as optimal on the pool.
struct EquivalenceResult {
    double max_lhs = 0.0;
    double threshold = 0.0;
    double gap = 0.0;
    Vector argmax;
    Vector support_lhs;  // t at each support point
};
EquivalenceResult equivalence_check(const Design& design, const GlmModel& model,
                                    const CriterionSpec& crit, const CandidatePool& pool);

// The sequential algorithm: optimize weights on the current support,
// add the best pool candidate while it improves the criterion by more
// than epsilon, certify with the equivalence check when done.
std::pair<Design, SeqReport> run_sequential(const GlmModel& model,
                                            const CriterionSpec& crit,
                                            const CandidatePool& pool,
                                            const SeqConfig& cfg = {});

}  // namespace eidesign

#endif  // EIDESIGN_SEQUENTIAL_HPP
