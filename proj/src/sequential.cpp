#include "eidesign/sequential.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "eidesign/sobol.hpp"

namespace eidesign {

namespace {

Matrix dedup_rows(const Matrix& pts) {
    Matrix out(pts.rows(), pts.cols());
    int n = 0;
    for (int i = 0; i < pts.rows(); ++i) {
        bool dup = false;
        for (int k = 0; k < n && !dup; ++k)
            dup = (pts.row(i) - out.row(k)).cwiseAbs().maxCoeff() <= 1e-12;
        if (!dup) out.row(n++) = pts.row(i);
    }
    return out.topRows(n);
}

}  // namespace

CandidatePool grid_pool(const Box& domain, int s) {
    if (s < 1) throw DimensionError("grid pool needs at least 2 levels per axis");
    const int d = domain.dim();
    const int per_axis = s + 1;
    long total = 1;
    for (int j = 0; j < d; ++j) {
        total *= per_axis;
        if (total > 50'000'000) throw DimensionError("grid pool is too large");
    }
    Matrix pts(total, d);
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    for (long i = 0; i < total; ++i) {
        for (int j = 0; j < d; ++j) {
            const double frac = static_cast<double>(idx[static_cast<std::size_t>(j)]) / s;
            pts(i, j) = domain.lower[j] + frac * (domain.upper[j] - domain.lower[j]);
        }
        int j = d - 1;
        while (j >= 0 && ++idx[static_cast<std::size_t>(j)] == per_axis) {
            idx[static_cast<std::size_t>(j)] = 0;
            --j;
        }
    }
    return {PoolKind::Grid, std::move(pts)};
}

CandidatePool sobol_pool(const Box& domain, int n, std::uint64_t skip) {
    return {PoolKind::Sobol, dedup_rows(sobol_points(domain.dim(), n, domain, skip))};
}

CandidatePool explicit_pool(const Box& domain, Matrix points) {
    if (points.cols() != domain.dim())
        throw DimensionError("pool points have dimension " + std::to_string(points.cols()) +
                             ", domain has " + std::to_string(domain.dim()));
    Matrix pts = dedup_rows(points);
    if (pts.rows() == 0) throw DimensionError("explicit pool is empty");
    return {PoolKind::Explicit, std::move(pts)};
}

double point_derivative(const Vector& x, const Design& design, const GlmModel& model,
                        const CriterionSpec& crit) {
    const CriterionContext ctx =
        criterion_context(fisher_information(design, model), crit);
    return ctx.threshold - glm_weight(model, x) * ctx.score(model.basis.eval(x));
}

namespace {

CandidateSelection select_from_context(const CandidatePool& pool, const GlmModel& model,
                                       const CriterionContext& ctx) {
    CandidateSelection best;
    double best_t = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < pool.size(); ++i) {
        const Vector x = pool.points.row(i).transpose();
        const double t = glm_weight(model, x) * ctx.score(model.basis.eval(x));
        if (t > best_t) {  // strictly greater keeps the lowest index on ties
            best_t = t;
            best.index = i;
        }
    }
    best.point = pool.points.row(best.index).transpose();
    best.phi = ctx.threshold - best_t;
    return best;
}

}  // namespace

CandidateSelection select_candidate(const CandidatePool& pool, const Design& design,
                                    const GlmModel& model, const CriterionSpec& crit) {
    if (pool.size() == 0) throw DimensionError("candidate pool is empty");
    const CriterionContext ctx =
        criterion_context(fisher_information(design, model), crit);
    return select_from_context(pool, model, ctx);
}

EquivalenceResult equivalence_check(const Design& design, const GlmModel& model,
                                    const CriterionSpec& crit, const CandidatePool& pool) {
    const CriterionContext ctx =
        criterion_context(fisher_information(design, model), crit);
    EquivalenceResult res;
    res.threshold = ctx.threshold;
    const CandidateSelection sel = select_from_context(pool, model, ctx);
    res.max_lhs = ctx.threshold - sel.phi;
    res.gap = -sel.phi;
    res.argmax = sel.point;
    res.support_lhs = point_scores(design, model, ctx);
    return res;
}

namespace {

Design random_initial_design(const GlmModel& model, const CandidatePool& pool,
                             std::uint64_t seed) {
    const int need = model.size() + 1;
    if (pool.size() < need)
        throw DimensionError("pool has " + std::to_string(pool.size()) +
                             " points; the initial design needs " + std::to_string(need));
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, pool.size() - 1);
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::set<int> chosen;
        while (static_cast<int>(chosen.size()) < need) chosen.insert(pick(rng));
        Matrix pts(need, pool.dim());
        int r = 0;
        for (int idx : chosen) pts.row(r++) = pool.points.row(idx);
        Design cand = Design::uniform(std::move(pts));
        const InfoMatrix info = fisher_information(cand, model);
        if (!info.singular() && info.condition_estimate() < 1e10) return cand;
    }
    throw SingularInformationError(
        "no nonsingular initial design found in 100 random draws from the pool",
        std::numeric_limits<double>::infinity());
}

// Design with point x appended at weight 1/(n+1), existing weights
// scaled by n/(n+1); merges instead when x duplicates a support point.
Design with_added_point(const Design& design, const Vector& x) {
    const int n = design.size();
    Matrix pts(n + 1, design.dim());
    pts.topRows(n) = design.points;
    pts.row(n) = x.transpose();
    Vector w(n + 1);
    w.head(n) = design.weights * (static_cast<double>(n) / (n + 1));
    w[n] = 1.0 / (n + 1);
    return Design::merged(pts, w);
}

bool contains_point(const Design& design, const Vector& x) {
    for (int i = 0; i < design.size(); ++i)
        if ((design.points.row(i) - x.transpose()).cwiseAbs().maxCoeff() <= 1e-12)
            return true;
    return false;
}

struct SinglePassResult {
    Design design;
    SeqReport report;
};

SinglePassResult run_single(const GlmModel& model, const CriterionSpec& crit,
                            const CandidatePool& pool, const SeqConfig& cfg,
                            const Design& start) {
    SeqReport report;
    Design cur = start;
    WeightOptConfig inner = cfg.inner;
    std::vector<Vector> added;
    double prev_value = std::numeric_limits<double>::infinity();
    int consecutive_merges = 0;
    bool converged = false;

    for (int round = 0; round < cfg.max_rounds; ++round) {
        auto [opt, wrep] = optimize_weights(cur, model, crit, inner);
        report.inner_iterations_total += wrep.iterations;
        // Re-optimizing from the warm start must not end above the
        // previous round (the old design stays feasible); tighten if the
        // inner loop stopped short of that.
        for (int retry = 0; retry < 3 && wrep.final_value > prev_value * (1.0 + 1e-12);
             ++retry) {
            WeightOptConfig tighter = inner;
            tighter.tol = inner.tol * std::pow(0.01, retry + 1);
            tighter.max_iters = inner.max_iters * (retry + 2);
            std::tie(opt, wrep) = optimize_weights(opt, model, crit, tighter);
            report.inner_iterations_total += wrep.iterations;
        }
        cur = std::move(opt);
        prev_value = wrep.final_value;
        report.final_inner_gap = wrep.final_gap;
        report.criterion_per_round.push_back(wrep.final_value);
        ++report.rounds;

        const CriterionContext ctx =
            criterion_context(fisher_information(cur, model), crit);
        const CandidateSelection sel = select_from_context(pool, model, ctx);
        const double eps = cfg.epsilon_rel * ctx.threshold;
        if (sel.phi >= -eps) {
            converged = true;
            break;
        }
        if (contains_point(cur, sel.point)) {
            // Re-selecting a support point means the inner weights are
            // under-converged, not that a point is missing. Tighten and
            // grow the inner budget; adjacent pool points sharing mass
            // slow the multiplicative iteration down considerably.
            ++report.merges;
            ++consecutive_merges;
            if (consecutive_merges > 6) {
                report.diagnostics =
                    "support point re-selected repeatedly at the inner tolerance floor";
                break;
            }
            inner.tol = std::max(inner.tol * 0.01, 1e-15);
            inner.gap_target = std::max(inner.gap_target * 0.1, 1e-9);
            inner.max_iters = std::min(inner.max_iters * 4, 1'000'000);
            continue;
        }
        consecutive_merges = 0;
        added.push_back(sel.point);
        cur = with_added_point(cur, sel.point);
    }

    if (!converged && report.diagnostics.empty() && report.rounds >= cfg.max_rounds)
        report.diagnostics = "round limit reached before the derivative threshold";
    report.converged = converged;

    const CriterionContext final_ctx =
        criterion_context(fisher_information(cur, model), crit);
    const EquivalenceResult eq = equivalence_check(cur, model, crit, pool);
    report.final_value = final_ctx.value;
    report.final_threshold = final_ctx.threshold;
    report.final_equivalence_gap = eq.gap;
    report.added_points.resize(static_cast<int>(added.size()), pool.dim());
    for (std::size_t i = 0; i < added.size(); ++i)
        report.added_points.row(static_cast<int>(i)) = added[i].transpose();
    return {std::move(cur), std::move(report)};
}

// Spacing of the pool along each axis, used as the initial refinement radius.
Vector pool_step(const CandidatePool& pool, const Box& domain) {
    const int d = pool.dim();
    Vector step(d);
    for (int j = 0; j < d; ++j) {
        if (pool.kind == PoolKind::Grid) {
            std::set<double> levels;
            for (int i = 0; i < pool.size(); ++i) levels.insert(pool.points(i, j));
            double h = domain.upper[j] - domain.lower[j];
            double prev = *levels.begin();
            for (auto it = std::next(levels.begin()); it != levels.end(); ++it) {
                h = std::min(h, *it - prev);
                prev = *it;
            }
            step[j] = h;
        } else {
            const double n_axis = std::pow(static_cast<double>(pool.size()), 1.0 / d);
            step[j] = (domain.upper[j] - domain.lower[j]) / std::max(1.0, n_axis);
        }
    }
    return step;
}

// Local pool around the support: per support point, a five-level tensor
// grid over the infinity-norm ball of the given radius, clipped to the
// domain.
CandidatePool refined_pool(const Design& design, const Box& domain, const Vector& step) {
    const int d = design.dim();
    const int levels = 5;
    std::vector<Vector> pts;
    for (int i = 0; i < design.size(); ++i) {
        std::vector<int> idx(static_cast<std::size_t>(d), 0);
        while (true) {
            Vector x(d);
            for (int j = 0; j < d; ++j) {
                const double frac =
                    -1.0 + 2.0 * idx[static_cast<std::size_t>(j)] / (levels - 1);
                x[j] = std::clamp(design.points(i, j) + frac * step[j], domain.lower[j],
                                  domain.upper[j]);
            }
            pts.push_back(std::move(x));
            int j = d - 1;
            while (j >= 0 && ++idx[static_cast<std::size_t>(j)] == levels) {
                idx[static_cast<std::size_t>(j)] = 0;
                --j;
            }
            if (j < 0) break;
        }
    }
    Matrix m(static_cast<int>(pts.size()), d);
    for (std::size_t i = 0; i < pts.size(); ++i) m.row(static_cast<int>(i)) = pts[i].transpose();
    return {PoolKind::Explicit, dedup_rows(m)};
}

}  // namespace

std::pair<Design, SeqReport> run_sequential(const GlmModel& model,
                                            const CriterionSpec& crit,
                                            const CandidatePool& pool,
                                            const SeqConfig& cfg) {
    if (pool.dim() != model.dim())
        throw DimensionError("pool dimension does not match model dimension");
    const Design start = cfg.initial_design ? *cfg.initial_design
                                            : random_initial_design(model, pool, cfg.seed);

    SinglePassResult res = run_single(model, crit, pool, cfg, start);

    if (cfg.refine_pool && res.report.converged) {
        Vector step = pool_step(pool, model.domain);
        for (int pass = 0; pass < cfg.max_refinements; ++pass, step *= 0.5) {
            CandidatePool local = refined_pool(res.design, model.domain, step);
            SeqConfig sub = cfg;
            sub.refine_pool = false;
            sub.initial_design = res.design;
            SinglePassResult next = run_single(model, crit, local, sub, res.design);
            if (!next.report.converged) break;
            const double improvement =
                (res.report.final_value - next.report.final_value) /
                std::abs(res.report.final_threshold);
            next.report.rounds += res.report.rounds;
            next.report.inner_iterations_total += res.report.inner_iterations_total;
            next.report.refinements = res.report.refinements + 1;
            next.report.criterion_per_round.insert(
                next.report.criterion_per_round.begin(),
                res.report.criterion_per_round.begin(),
                res.report.criterion_per_round.end());
            res = std::move(next);
            if (improvement < cfg.refine_tol) break;
        }
        // The refined certificate must still hold on the original pool.
        const EquivalenceResult eq = equivalence_check(res.design, model, crit, pool);
        res.report.final_equivalence_gap =
            std::max(res.report.final_equivalence_gap, eq.gap);
    }
    return {std::move(res.design), std::move(res.report)};
}

}  // namespace eidesign
