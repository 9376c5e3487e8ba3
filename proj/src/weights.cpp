#include "eidesign/weights.hpp"

#include <cmath>

namespace eidesign {

namespace {

Vector step_weights(const Vector& lambda, const Vector& t, double delta) {
    Vector s(t.size());
    for (int i = 0; i < t.size(); ++i) {
        const double ti = t[i];  // nonnegative: squared norm times a weight
        if (!std::isfinite(ti))
            throw FeasibilityError("multiplicative update score is not finite");
        s[i] = delta == 1.0 ? ti : std::pow(ti, delta);
    }
    const double denom = lambda.dot(s);
    if (!(denom > 0.0))
        throw FeasibilityError(
            "multiplicative update denominator vanished (inv(I) B == 0)");
    Vector next = lambda.cwiseProduct(s) / denom;
    next /= next.sum();  // remove accumulated rounding
    return next;
}

double gap_from_scores(const Vector& lambda, const Vector& t, double threshold,
                       double prune_threshold) {
    double gap = 0.0;
    for (int i = 0; i < t.size(); ++i) {
        const double v = lambda[i] > prune_threshold ? std::abs(t[i] - threshold)
                                                     : std::max(0.0, t[i] - threshold);
        gap = std::max(gap, v);
    }
    return gap;
}

}  // namespace

Design multiplicative_step(const Design& design, const GlmModel& model,
                           const CriterionSpec& crit, double delta) {
    if (!(delta > 0.0 && delta <= 1.0))
        throw DimensionError("multiplicative exponent delta must be in (0,1]");
    const CriterionContext ctx =
        criterion_context(fisher_information(design, model), crit);
    const Vector t = point_scores(design, model, ctx);
    return Design(design.points, step_weights(design.weights, t, delta));
}

std::pair<Design, WeightOptReport> optimize_weights(const Design& design,
                                                    const GlmModel& model,
                                                    const CriterionSpec& crit,
                                                    const WeightOptConfig& cfg) {
    for (int i = 0; i < design.size(); ++i)
        if (!(design.weights[i] > 0.0))
            throw DimensionError(
                "weight optimization needs strictly positive starting weights "
                "(multiplicative updates cannot revive zeros)");

    const double delta = cfg.effective_delta(crit);
    WeightOptReport report;
    Design cur = design;
    CriterionContext ctx = criterion_context(fisher_information(cur, model), crit);
    Vector t = point_scores(cur, model, ctx);
    report.criterion_trace.push_back(ctx.value);

    bool value_settled = false;
    for (int k = 0; k < cfg.max_iters; ++k) {
        const double gap = gap_from_scores(cur.weights, t, ctx.threshold,
                                           cfg.prune_threshold);
        if (value_settled && gap <= cfg.gap_target * ctx.threshold) {
            report.converged = true;
            break;
        }
        cur = Design(cur.points, step_weights(cur.weights, t, delta));
        ++report.iterations;
        const double prev = ctx.value;
        ctx = criterion_context(fisher_information(cur, model), crit);
        t = point_scores(cur, model, ctx);
        report.criterion_trace.push_back(ctx.value);
        value_settled = std::abs(prev - ctx.value) <= cfg.tol * std::abs(ctx.threshold);
    }
    if (!report.converged) {
        // Max iterations: report the state honestly.
        const double gap =
            gap_from_scores(cur.weights, t, ctx.threshold, cfg.prune_threshold);
        report.converged = value_settled && gap <= cfg.gap_target * ctx.threshold;
    }

    // Prune near-zero weights, renormalize.
    if ((cur.weights.array() < cfg.prune_threshold).any() &&
        (cur.weights.array() >= cfg.prune_threshold).any()) {
        std::vector<int> keep;
        for (int i = 0; i < cur.size(); ++i)
            if (cur.weights[i] >= cfg.prune_threshold) keep.push_back(i);
        Matrix pts(static_cast<int>(keep.size()), cur.dim());
        Vector w(static_cast<int>(keep.size()));
        for (std::size_t i = 0; i < keep.size(); ++i) {
            pts.row(static_cast<int>(i)) = cur.points.row(keep[i]);
            w[static_cast<int>(i)] = cur.weights[keep[i]];
        }
        w /= w.sum();
        cur = Design(std::move(pts), std::move(w));
        ctx = criterion_context(fisher_information(cur, model), crit);
        t = point_scores(cur, model, ctx);
        report.criterion_trace.push_back(ctx.value);
    }

    report.final_value = ctx.value;
    report.final_gap = gap_from_scores(cur.weights, t, ctx.threshold, cfg.prune_threshold);
    return {std::move(cur), std::move(report)};
}

double weight_optimality_gap(const Design& design, const GlmModel& model,
                             const CriterionSpec& crit, double prune_threshold) {
    const CriterionContext ctx =
        criterion_context(fisher_information(design, model), crit);
    const Vector t = point_scores(design, model, ctx);
    return gap_from_scores(design.weights, t, ctx.threshold, prune_threshold);
}

double weight_directional_derivative(const Design& design, const GlmModel& model,
                                     const CriterionSpec& crit, const Vector& toward) {
    if (toward.size() != design.weights.size())
        throw DimensionError("direction vector length does not match design size");
    const CriterionContext ctx =
        criterion_context(fisher_information(design, model), crit);
    const Vector t = point_scores(design, model, ctx);
    return ctx.threshold - toward.dot(t);
}

}  // namespace eidesign
