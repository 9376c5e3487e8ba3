#ifndef EIDESIGN_WEIGHTS_HPP
#define EIDESIGN_WEIGHTS_HPP

#include <vector>

#include "eidesign/design.hpp"

namespace eidesign {

// Controls for the multiplicative weight optimizer.
struct WeightOptConfig {
    double delta = 0.0;              // update exponent in (0,1]; 0 = criterion default
    double tol = 1e-10;              // relative criterion-change stopping tolerance
    // Weights being driven to zero decay geometrically and must cross the
    // prune threshold before the optimal-weight gap can close, which can
    // take ~1e5 of these cheap O(n l^2) iterations.
    int max_iters = 200000;
    double prune_threshold = 1e-8;   // weights below this are dropped after convergence
    // The criterion-change rule alone can stop while the optimal-weight
    // condition is still loose (the condition gap is first order in the
    // weights, the criterion second order), so iteration also continues
    // until the gap falls below this fraction of the threshold scale.
    double gap_target = 1e-7;

    double effective_delta(const CriterionSpec& crit) const {
        return delta > 0.0 ? delta : crit.default_delta();
    }
};

struct WeightOptReport {
    int iterations = 0;
    std::vector<double> criterion_trace;  // value before each step, then final
    bool converged = false;
    double final_value = 0.0;
    double final_gap = 0.0;  // max violation of the optimal-weight condition
};

// One multiplicative update: lambda_i <- lambda_i t_i^delta / sum_j lambda_j t_j^delta
// with t_i the optimal-weight condition scores of the current design.
Design multiplicative_step(const Design& design, const GlmModel& model,
                           const CriterionSpec& crit, double delta);

// Iterates multiplicative steps until the relative criterion change and
// the optimal-weight gap are below tolerance, then prunes near-zero
// weights and renormalizes. Starting weights must be strictly positive.
std::pair<Design, WeightOptReport> optimize_weights(const Design& design,
                                                    const GlmModel& model,
                                                    const CriterionSpec& crit,
                                                    const WeightOptConfig& cfg = {});

// Max violation of the optimal-weight conditions: |t_i - threshold| on
// carried points, max(0, t_i - threshold) on near-zero ones. A value
// near zero certifies the weights as optimal for this support.
double weight_optimality_gap(const Design& design, const GlmModel& model,
                             const CriterionSpec& crit,
                             double prune_threshold = 1e-8);

// Directional derivative of the criterion in weight space, toward the
// weight vector `toward` on the same support.
double weight_directional_derivative(const Design& design, const GlmModel& model,
                                     const CriterionSpec& crit, const Vector& toward);

}  // namespace eidesign

#endif  // EIDESIGN_WEIGHTS_HPP
