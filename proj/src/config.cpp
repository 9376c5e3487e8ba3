#include "eidesign/config.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace eidesign {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path + ": " + msg);
}

const json& get_object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    return j;
}

void check_keys(const json& j, const std::string& path, std::set<std::string> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) fail(path + "." + it.key(), "unknown key");
}

const json* find(const json& j, const std::string& key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

const json& require(const json& j, const std::string& key, const std::string& path) {
    const json* v = find(j, key);
    if (!v) fail(path, "missing required key '" + key + "'");
    return *v;
}

std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

int get_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

bool get_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected true or false");
    return j.get<bool>();
}

Vector get_vector(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of numbers");
    Vector v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        v[static_cast<int>(i)] = get_number(j[i], path + "[" + std::to_string(i) + "]");
    return v;
}

// Numeric CSV, optionally with a header line starting with a letter.
Matrix load_matrix_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (rows.empty() && !line.empty() && std::isalpha(static_cast<unsigned char>(line[0])))
            continue;  // header
        std::istringstream ls(line);
        std::vector<double> row;
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw IoError(path + " line " + std::to_string(lineno) + ": '" + cell +
                              "' is not a number");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw IoError(path + " line " + std::to_string(lineno) +
                          ": inconsistent column count");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError(path + " has no numeric rows");
    Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t k = 0; k < rows[i].size(); ++k)
            m(static_cast<int>(i), static_cast<int>(k)) = rows[i][k];
    return m;
}

std::string resolve(const std::string& base_dir, const std::string& p) {
    fs::path fp(p);
    if (fp.is_absolute()) return p;
    return (fs::path(base_dir) / fp).string();
}

void parse_model(const json& j, ProblemConfig& cfg) {
    const json& m = get_object(j, "model");
    check_keys(m, "model", {"link", "sigma", "basis", "beta", "domain"});
    const std::string link = get_string(require(m, "link", "model"), "model.link");
    if (link == "logit")
        cfg.link = LinkKind::Logit;
    else if (link == "log")
        cfg.link = LinkKind::Log;
    else if (link == "identity")
        cfg.link = LinkKind::Identity;
    else
        fail("model.link", "must be one of logit, log, identity");
    if (const json* s = find(m, "sigma")) {
        cfg.sigma = get_number(*s, "model.sigma");
        if (!(cfg.sigma > 0.0)) fail("model.sigma", "must be positive");
        if (cfg.link != LinkKind::Identity)
            fail("model.sigma", "only applies to the identity link");
    }

    const json& b = get_object(require(m, "basis", "model"), "model.basis");
    check_keys(b, "model.basis", {"kind", "degree", "terms"});
    const std::string kind = get_string(require(b, "kind", "model.basis"), "model.basis.kind");
    if (kind == "intercept-plus-linear") {
        cfg.basis_kind = BasisKind::InterceptPlusLinear;
        if (find(b, "degree")) fail("model.basis.degree", "not allowed for this kind");
        if (find(b, "terms")) fail("model.basis.terms", "not allowed for this kind");
    } else if (kind == "full-polynomial") {
        cfg.basis_kind = BasisKind::FullPolynomial;
        cfg.poly_degree = get_int(require(b, "degree", "model.basis"), "model.basis.degree");
        if (find(b, "terms")) fail("model.basis.terms", "not allowed for this kind");
    } else if (kind == "terms") {
        cfg.basis_kind = BasisKind::ExplicitTerms;
        const json& terms = require(b, "terms", "model.basis");
        if (!terms.is_array() || terms.empty())
            fail("model.basis.terms", "expected a non-empty array of exponent arrays");
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const std::string tp = "model.basis.terms[" + std::to_string(i) + "]";
            if (!terms[i].is_array()) fail(tp, "expected an array of integers");
            std::vector<int> t;
            for (std::size_t k = 0; k < terms[i].size(); ++k)
                t.push_back(get_int(terms[i][k], tp + "[" + std::to_string(k) + "]"));
            cfg.basis_terms.push_back(std::move(t));
        }
    } else {
        fail("model.basis.kind", "must be one of intercept-plus-linear, full-polynomial, terms");
    }

    cfg.beta = get_vector(require(m, "beta", "model"), "model.beta");

    const json& dom = get_object(require(m, "domain", "model"), "model.domain");
    check_keys(dom, "model.domain", {"lower", "upper"});
    const Vector lo = get_vector(require(dom, "lower", "model.domain"), "model.domain.lower");
    const Vector hi = get_vector(require(dom, "upper", "model.domain"), "model.domain.upper");
    if (lo.size() != hi.size()) fail("model.domain", "lower and upper have different lengths");
    try {
        cfg.domain = Box(lo, hi);
    } catch (const Error& e) {
        fail("model.domain", e.what());
    }
}

void parse_measure(const json& j, ProblemConfig& cfg) {
    const json& m = get_object(j, "measure");
    const std::string kind = get_string(require(m, "kind", "measure"), "measure.kind");
    if (kind == "uniform-box") {
        check_keys(m, "measure", {"kind", "lower", "upper"});
        const Vector lo = get_vector(require(m, "lower", "measure"), "measure.lower");
        const Vector hi = get_vector(require(m, "upper", "measure"), "measure.upper");
        try {
            cfg.measure = Measure::uniform_box(Box(lo, hi));
        } catch (const Error& e) {
            fail("measure", e.what());
        }
    } else if (kind == "discrete") {
        check_keys(m, "measure", {"kind", "atoms"});
        const json& atoms = require(m, "atoms", "measure");
        if (!atoms.is_array() || atoms.empty())
            fail("measure.atoms", "expected a non-empty array");
        std::vector<Vector> pts;
        std::vector<double> probs;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            const std::string ap = "measure.atoms[" + std::to_string(i) + "]";
            const json& a = get_object(atoms[i], ap);
            check_keys(a, ap, {"point", "prob"});
            pts.push_back(get_vector(require(a, "point", ap), ap + ".point"));
            probs.push_back(get_number(require(a, "prob", ap), ap + ".prob"));
        }
        Matrix p(static_cast<int>(pts.size()), pts.front().size());
        Vector pr(static_cast<int>(probs.size()));
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (pts[i].size() != pts.front().size())
                fail("measure.atoms[" + std::to_string(i) + "].point",
                     "atoms have inconsistent dimensions");
            p.row(static_cast<int>(i)) = pts[i].transpose();
            pr[static_cast<int>(i)] = probs[i];
        }
        try {
            cfg.measure = Measure::discrete(std::move(p), std::move(pr));
        } catch (const Error& e) {
            fail("measure", e.what());
        }
    } else {
        fail("measure.kind", "must be uniform-box or discrete");
    }
}

void parse_criterion(const json& j, ProblemConfig& cfg, const std::string& base_dir) {
    const json& c = get_object(j, "criterion");
    const std::string kind = get_string(require(c, "kind", "criterion"), "criterion.kind");
    if (kind == "ei") {
        check_keys(c, "criterion", {"kind"});
        cfg.criterion = CriterionKind::EI;
    } else if (kind == "phi-p") {
        check_keys(c, "criterion", {"kind", "p", "b_file"});
        cfg.criterion = CriterionKind::PhiP;
        if (const json* p = find(c, "p")) {
            cfg.phi_p = get_number(*p, "criterion.p");
            if (!(cfg.phi_p > 0.0)) fail("criterion.p", "must be positive");
        }
        if (const json* bf = find(c, "b_file")) {
            cfg.b_file = get_string(*bf, "criterion.b_file");
            cfg.phi_b = load_matrix_csv(resolve(base_dir, cfg.b_file));
        }
    } else if (kind == "d") {
        check_keys(c, "criterion", {"kind"});
        cfg.criterion = CriterionKind::D;
    } else {
        fail("criterion.kind", "must be one of ei, phi-p, d");
    }
}

void parse_quadrature(const json& j, ProblemConfig& cfg) {
    const json& q = get_object(j, "quadrature");
    const std::string method = get_string(require(q, "method", "quadrature"), "quadrature.method");
    try {
        if (method == "auto") {
            check_keys(q, "quadrature", {"method"});
            cfg.quad_auto = true;
        } else if (method == "gauss-legendre") {
            check_keys(q, "quadrature", {"method", "nodes_per_axis"});
            cfg.quad_auto = false;
            cfg.quadrature = Quadrature::gauss_legendre(
                get_int(require(q, "nodes_per_axis", "quadrature"), "quadrature.nodes_per_axis"));
        } else if (method == "sobol") {
            check_keys(q, "quadrature", {"method", "points"});
            cfg.quad_auto = false;
            cfg.quadrature =
                Quadrature::qmc_sobol(get_int(require(q, "points", "quadrature"), "quadrature.points"));
        } else if (method == "exact-discrete") {
            check_keys(q, "quadrature", {"method"});
            cfg.quad_auto = false;
            cfg.quadrature = Quadrature::exact_discrete();
        } else {
            fail("quadrature.method", "must be one of auto, gauss-legendre, sobol, exact-discrete");
        }
    } catch (const QuadratureError& e) {
        fail("quadrature", e.what());
    }
}

void parse_pool(const json& j, ProblemConfig& cfg, const std::string& base_dir) {
    const json& p = get_object(j, "pool");
    const std::string kind = get_string(require(p, "kind", "pool"), "pool.kind");
    if (kind == "grid") {
        check_keys(p, "pool", {"kind", "levels_per_axis"});
        cfg.pool_kind = PoolKind::Grid;
        cfg.pool_levels_per_axis =
            get_int(require(p, "levels_per_axis", "pool"), "pool.levels_per_axis");
        if (cfg.pool_levels_per_axis < 2) fail("pool.levels_per_axis", "must be at least 2");
    } else if (kind == "sobol") {
        check_keys(p, "pool", {"kind", "points", "skip"});
        cfg.pool_kind = PoolKind::Sobol;
        cfg.pool_points = get_int(require(p, "points", "pool"), "pool.points");
        if (cfg.pool_points < 1) fail("pool.points", "must be positive");
        if (const json* s = find(p, "skip")) {
            const int sk = get_int(*s, "pool.skip");
            if (sk < 0) fail("pool.skip", "must be nonnegative");
            cfg.pool_skip = static_cast<std::uint64_t>(sk);
        }
    } else if (kind == "explicit") {
        check_keys(p, "pool", {"kind", "file"});
        cfg.pool_kind = PoolKind::Explicit;
        cfg.pool_file = get_string(require(p, "file", "pool"), "pool.file");
        cfg.pool_explicit_points = load_matrix_csv(resolve(base_dir, cfg.pool_file));
    } else {
        fail("pool.kind", "must be one of grid, sobol, explicit");
    }
}

void parse_algorithm(const json& j, ProblemConfig& cfg) {
    const json& a = get_object(j, "algorithm");
    check_keys(a, "algorithm",
               {"delta", "epsilon_rel", "weight_tol", "weight_gap_target",
                "max_weight_iters", "prune_threshold", "max_rounds", "gap_tolerance_rel",
                "seed", "refine_pool"});
    if (const json* v = find(a, "delta")) {
        cfg.delta = get_number(*v, "algorithm.delta");
        if (!(cfg.delta > 0.0 && cfg.delta <= 1.0)) fail("algorithm.delta", "must be in (0,1]");
    }
    if (const json* v = find(a, "epsilon_rel")) {
        cfg.epsilon_rel = get_number(*v, "algorithm.epsilon_rel");
        if (!(cfg.epsilon_rel > 0.0)) fail("algorithm.epsilon_rel", "must be positive");
    }
    if (const json* v = find(a, "weight_tol")) {
        cfg.weight_tol = get_number(*v, "algorithm.weight_tol");
        if (!(cfg.weight_tol > 0.0)) fail("algorithm.weight_tol", "must be positive");
    }
    if (const json* v = find(a, "weight_gap_target")) {
        cfg.weight_gap_target = get_number(*v, "algorithm.weight_gap_target");
        if (!(cfg.weight_gap_target > 0.0)) fail("algorithm.weight_gap_target", "must be positive");
    }
    if (const json* v = find(a, "max_weight_iters")) {
        cfg.max_weight_iters = get_int(*v, "algorithm.max_weight_iters");
        if (cfg.max_weight_iters < 1) fail("algorithm.max_weight_iters", "must be positive");
    }
    if (const json* v = find(a, "prune_threshold")) {
        cfg.prune_threshold = get_number(*v, "algorithm.prune_threshold");
        if (!(cfg.prune_threshold >= 0.0)) fail("algorithm.prune_threshold", "must be nonnegative");
    }
    if (const json* v = find(a, "max_rounds")) {
        cfg.max_rounds = get_int(*v, "algorithm.max_rounds");
        if (cfg.max_rounds < 1) fail("algorithm.max_rounds", "must be positive");
    }
    if (const json* v = find(a, "gap_tolerance_rel")) {
        cfg.gap_tolerance_rel = get_number(*v, "algorithm.gap_tolerance_rel");
        if (!(cfg.gap_tolerance_rel > 0.0)) fail("algorithm.gap_tolerance_rel", "must be positive");
    }
    if (const json* v = find(a, "seed")) {
        if (!v->is_number_integer() || v->get<long long>() < 0)
            fail("algorithm.seed", "must be a nonnegative integer");
        cfg.seed = v->get<std::uint64_t>();
    }
    if (const json* v = find(a, "refine_pool")) cfg.refine_pool = get_bool(*v, "algorithm.refine_pool");
}

Design load_start_design(const std::string& path) {
    std::ifstream probe(path);
    if (!probe) throw IoError("cannot open " + path);
    std::string first;
    std::getline(probe, first);
    probe.close();
    if (!first.empty() && first[0] == 'x') return read_design_csv_file(path);
    Matrix pts = load_matrix_csv(path);
    return Design::uniform(std::move(pts));
}

}  // namespace

ProblemConfig parse_config(const std::string& text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // Map the byte offset to line/column for the error message.
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < text.size() && i + 1 < e.byte; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("config parse error at line " + std::to_string(line) +
                          ", column " + std::to_string(col) + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    check_keys(j, "config",
               {"model", "measure", "criterion", "quadrature", "pool", "algorithm",
                "mode", "points_file", "output"});

    ProblemConfig cfg;
    parse_model(require(j, "model", "config"), cfg);
    parse_criterion(require(j, "criterion", "config"), cfg, base_dir);
    if (const json* m = find(j, "measure")) parse_measure(*m, cfg);
    if (const json* q = find(j, "quadrature")) parse_quadrature(*q, cfg);
    if (const json* p = find(j, "pool")) parse_pool(*p, cfg, base_dir);
    if (const json* a = find(j, "algorithm")) parse_algorithm(*a, cfg);

    if (const json* m = find(j, "mode")) {
        const std::string mode = get_string(*m, "mode");
        if (mode == "sequential")
            cfg.mode = RunMode::Sequential;
        else if (mode == "weights-only")
            cfg.mode = RunMode::WeightsOnly;
        else
            fail("mode", "must be sequential or weights-only");
    }
    if (const json* pf = find(j, "points_file")) {
        cfg.points_file = get_string(*pf, "points_file");
        if (cfg.mode != RunMode::WeightsOnly)
            fail("points_file", "only applies to weights-only mode");
        cfg.start_design = load_start_design(resolve(base_dir, cfg.points_file));
    }
    if (const json* o = find(j, "output")) {
        const json& out = get_object(*o, "output");
        check_keys(out, "output", {"phi_profile"});
        if (const json* pp = find(out, "phi_profile")) {
            const std::string v = get_string(*pp, "output.phi_profile");
            if (v == "auto")
                cfg.phi_profile = PhiProfileMode::Auto;
            else if (v == "always")
                cfg.phi_profile = PhiProfileMode::Always;
            else if (v == "never")
                cfg.phi_profile = PhiProfileMode::Never;
            else
                fail("output.phi_profile", "must be auto, always or never");
        }
    }

    // Cross-field consistency, re-checked here so the errors carry paths.
    GlmModel model = cfg.make_model();  // validates beta length, domain, basis
    if (cfg.criterion == CriterionKind::EI) {
        if (!cfg.measure) fail("measure", "required for the ei criterion");
        if (cfg.measure->dim() != model.dim())
            fail("measure", "dimension does not match model.domain");
        if (cfg.measure->kind == MeasureKind::UniformBox &&
            !cfg.quad_auto && cfg.quadrature.method == QuadKind::ExactDiscrete)
            fail("quadrature.method", "exact-discrete requires a discrete measure");
        if (cfg.measure->kind == MeasureKind::Discrete && !cfg.quad_auto &&
            cfg.quadrature.method != QuadKind::ExactDiscrete)
            fail("quadrature.method", "discrete measure requires exact-discrete");
    }
    if (cfg.phi_b) {
        if (cfg.phi_b->rows() != cfg.phi_b->cols() || cfg.phi_b->rows() != model.size())
            fail("criterion.b_file", "B must be a " + std::to_string(model.size()) + "x" +
                                         std::to_string(model.size()) + " matrix");
    }
    if (cfg.mode == RunMode::Sequential && !cfg.pool_kind)
        fail("pool", "required for sequential mode");
    if (cfg.mode == RunMode::WeightsOnly && !cfg.start_design)
        fail("points_file", "required for weights-only mode");
    if (cfg.start_design && cfg.start_design->dim() != model.dim())
        fail("points_file", "points have dimension " +
                                std::to_string(cfg.start_design->dim()) +
                                ", model has " + std::to_string(model.dim()));
    if (cfg.pool_explicit_points && cfg.pool_explicit_points->cols() != model.dim())
        fail("pool.file", "points have dimension " +
                              std::to_string(cfg.pool_explicit_points->cols()) +
                              ", model has " + std::to_string(model.dim()));
    return cfg;
}

ProblemConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str(), fs::path(path).parent_path().string().empty()
                                      ? "."
                                      : fs::path(path).parent_path().string());
}

GlmModel ProblemConfig::make_model() const {
    Basis basis = [&] {
        switch (basis_kind) {
            case BasisKind::InterceptPlusLinear:
                return Basis::intercept_plus_linear(domain.dim());
            case BasisKind::FullPolynomial:
                return Basis::full_polynomial(domain.dim(), poly_degree);
            case BasisKind::ExplicitTerms:
                return Basis::from_terms(domain.dim(), basis_terms);
        }
        throw ConfigError("model.basis.kind: invalid");
    }();
    Link link;
    switch (this->link) {
        case LinkKind::Logit: link = Link::logit(); break;
        case LinkKind::Log: link = Link::log(); break;
        case LinkKind::Identity: link = Link::identity(sigma); break;
    }
    try {
        return GlmModel(std::move(basis), link, beta, domain);
    } catch (const Error& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
}

CriterionSpec ProblemConfig::make_criterion(const GlmModel& model) const {
    switch (criterion) {
        case CriterionKind::EI: {
            const Quadrature q = make_quadrature(model);
            return CriterionSpec::ei(moment_matrix(model, *measure, q));
        }
        case CriterionKind::PhiP: {
            if (phi_b) {
                Eigen::SelfAdjointEigenSolver<Matrix> es(*phi_b, Eigen::EigenvaluesOnly);
                const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
                int rank = 0;
                for (int i = 0; i < es.eigenvalues().size(); ++i)
                    if (es.eigenvalues()[i] > 1e-12 * scale) ++rank;
                return CriterionSpec::phi_p(phi_p, *phi_b, std::max(rank, 1));
            }
            return CriterionSpec::phi_p(phi_p, Matrix::Identity(model.size(), model.size()),
                                        model.size());
        }
        case CriterionKind::D:
            return CriterionSpec::d_optimality();
    }
    throw ConfigError("criterion.kind: invalid");
}

Quadrature ProblemConfig::make_quadrature(const GlmModel& model) const {
    if (!quad_auto) return quadrature;
    if (!measure) return Quadrature::gauss_legendre(32);
    return Quadrature::auto_for(*measure, model.dim());
}

CandidatePool ProblemConfig::make_pool(const GlmModel& model) const {
    if (!pool_kind) throw ConfigError("pool: not configured");
    switch (*pool_kind) {
        case PoolKind::Grid:
            return grid_pool(model.domain, pool_levels_per_axis - 1);
        case PoolKind::Sobol:
            return sobol_pool(model.domain, pool_points, pool_skip);
        case PoolKind::Explicit:
            return explicit_pool(model.domain, *pool_explicit_points);
    }
    throw ConfigError("pool.kind: invalid");
}

SeqConfig ProblemConfig::make_seq_config() const {
    SeqConfig s;
    s.epsilon_rel = epsilon_rel;
    s.max_rounds = max_rounds;
    s.seed = seed;
    s.inner.delta = delta;
    s.inner.tol = weight_tol;
    s.inner.gap_target = weight_gap_target;
    s.inner.max_iters = max_weight_iters;
    s.inner.prune_threshold = prune_threshold;
    s.gap_tolerance_rel = gap_tolerance_rel;
    s.refine_pool = refine_pool;
    return s;
}

namespace {

bool matrix_equal(const std::optional<Matrix>& a, const std::optional<Matrix>& b) {
    if (a.has_value() != b.has_value()) return false;
    if (!a) return true;
    return a->rows() == b->rows() && a->cols() == b->cols() && *a == *b;
}

}  // namespace

bool ProblemConfig::operator==(const ProblemConfig& o) const {
    auto measure_equal = [&] {
        if (measure.has_value() != o.measure.has_value()) return false;
        if (!measure) return true;
        if (measure->kind != o.measure->kind) return false;
        if (measure->kind == MeasureKind::UniformBox)
            return measure->box.lower == o.measure->box.lower &&
                   measure->box.upper == o.measure->box.upper;
        return measure->atom_points == o.measure->atom_points &&
               measure->atom_probs == o.measure->atom_probs;
    };
    auto start_equal = [&] {
        if (start_design.has_value() != o.start_design.has_value()) return false;
        if (!start_design) return true;
        return start_design->points == o.start_design->points &&
               start_design->weights == o.start_design->weights;
    };
    return link == o.link && sigma == o.sigma && basis_kind == o.basis_kind &&
           poly_degree == o.poly_degree && basis_terms == o.basis_terms &&
           beta == o.beta && domain.lower == o.domain.lower &&
           domain.upper == o.domain.upper && measure_equal() &&
           criterion == o.criterion && phi_p == o.phi_p && matrix_equal(phi_b, o.phi_b) &&
           b_file == o.b_file && quad_auto == o.quad_auto &&
           (quad_auto || (quadrature.method == o.quadrature.method &&
                          quadrature.nodes_per_axis == o.quadrature.nodes_per_axis &&
                          quadrature.n_points == o.quadrature.n_points)) &&
           pool_kind == o.pool_kind && pool_levels_per_axis == o.pool_levels_per_axis &&
           pool_points == o.pool_points && pool_skip == o.pool_skip &&
           pool_file == o.pool_file &&
           matrix_equal(pool_explicit_points, o.pool_explicit_points) &&
           delta == o.delta && epsilon_rel == o.epsilon_rel &&
           weight_tol == o.weight_tol && weight_gap_target == o.weight_gap_target &&
           max_weight_iters == o.max_weight_iters &&
           prune_threshold == o.prune_threshold && max_rounds == o.max_rounds &&
           gap_tolerance_rel == o.gap_tolerance_rel && seed == o.seed &&
           refine_pool == o.refine_pool && mode == o.mode &&
           points_file == o.points_file && start_equal() && phi_profile == o.phi_profile;
}

std::string emit_config(const ProblemConfig& cfg) {
    json j;
    json model;
    model["link"] = cfg.link == LinkKind::Logit ? "logit"
                    : cfg.link == LinkKind::Log ? "log"
                                                : "identity";
    if (cfg.link == LinkKind::Identity) model["sigma"] = cfg.sigma;
    json basis;
    switch (cfg.basis_kind) {
        case BasisKind::InterceptPlusLinear:
            basis["kind"] = "intercept-plus-linear";
            break;
        case BasisKind::FullPolynomial:
            basis["kind"] = "full-polynomial";
            basis["degree"] = cfg.poly_degree;
            break;
        case BasisKind::ExplicitTerms:
            basis["kind"] = "terms";
            basis["terms"] = cfg.basis_terms;
            break;
    }
    model["basis"] = basis;
    model["beta"] = std::vector<double>(cfg.beta.begin(), cfg.beta.end());
    model["domain"]["lower"] =
        std::vector<double>(cfg.domain.lower.begin(), cfg.domain.lower.end());
    model["domain"]["upper"] =
        std::vector<double>(cfg.domain.upper.begin(), cfg.domain.upper.end());
    j["model"] = model;

    if (cfg.measure) {
        json m;
        if (cfg.measure->kind == MeasureKind::UniformBox) {
            m["kind"] = "uniform-box";
            m["lower"] = std::vector<double>(cfg.measure->box.lower.begin(),
                                             cfg.measure->box.lower.end());
            m["upper"] = std::vector<double>(cfg.measure->box.upper.begin(),
                                             cfg.measure->box.upper.end());
        } else {
            m["kind"] = "discrete";
            json atoms = json::array();
            for (int i = 0; i < cfg.measure->atom_points.rows(); ++i) {
                json a;
                const Vector p = cfg.measure->atom_points.row(i).transpose();
                a["point"] = std::vector<double>(p.begin(), p.end());
                a["prob"] = cfg.measure->atom_probs[i];
                atoms.push_back(a);
            }
            m["atoms"] = atoms;
        }
        j["measure"] = m;
    }

    json crit;
    switch (cfg.criterion) {
        case CriterionKind::EI: crit["kind"] = "ei"; break;
        case CriterionKind::PhiP:
            crit["kind"] = "phi-p";
            crit["p"] = cfg.phi_p;
            if (!cfg.b_file.empty()) crit["b_file"] = cfg.b_file;
            break;
        case CriterionKind::D: crit["kind"] = "d"; break;
    }
    j["criterion"] = crit;

    json quad;
    if (cfg.quad_auto) {
        quad["method"] = "auto";
    } else {
        switch (cfg.quadrature.method) {
            case QuadKind::GaussLegendreTensor:
                quad["method"] = "gauss-legendre";
                quad["nodes_per_axis"] = cfg.quadrature.nodes_per_axis;
                break;
            case QuadKind::QmcSobol:
                quad["method"] = "sobol";
                quad["points"] = cfg.quadrature.n_points;
                break;
            case QuadKind::ExactDiscrete:
                quad["method"] = "exact-discrete";
                break;
        }
    }
    j["quadrature"] = quad;

    if (cfg.pool_kind) {
        json pool;
        switch (*cfg.pool_kind) {
            case PoolKind::Grid:
                pool["kind"] = "grid";
                pool["levels_per_axis"] = cfg.pool_levels_per_axis;
                break;
            case PoolKind::Sobol:
                pool["kind"] = "sobol";
                pool["points"] = cfg.pool_points;
                pool["skip"] = static_cast<int>(cfg.pool_skip);
                break;
            case PoolKind::Explicit:
                pool["kind"] = "explicit";
                pool["file"] = cfg.pool_file;
                break;
        }
        j["pool"] = pool;
    }

    json alg;
    if (cfg.delta > 0.0) alg["delta"] = cfg.delta;
    alg["epsilon_rel"] = cfg.epsilon_rel;
    alg["weight_tol"] = cfg.weight_tol;
    alg["weight_gap_target"] = cfg.weight_gap_target;
    alg["max_weight_iters"] = cfg.max_weight_iters;
    alg["prune_threshold"] = cfg.prune_threshold;
    alg["max_rounds"] = cfg.max_rounds;
    alg["gap_tolerance_rel"] = cfg.gap_tolerance_rel;
    alg["seed"] = cfg.seed;
    alg["refine_pool"] = cfg.refine_pool;
    j["algorithm"] = alg;

    j["mode"] = cfg.mode == RunMode::Sequential ? "sequential" : "weights-only";
    if (!cfg.points_file.empty()) j["points_file"] = cfg.points_file;
    j["output"]["phi_profile"] = cfg.phi_profile == PhiProfileMode::Auto     ? "auto"
                                 : cfg.phi_profile == PhiProfileMode::Always ? "always"
                                                                             : "never";
    return j.dump(2) + "\n";
}

int RunReport::exit_status() const {
    const bool certified =
        converged && equivalence_gap <= gap_tolerance;
    return certified ? 0 : 2;
}

namespace {

void write_convergence_csv(const std::vector<double>& values, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    os << "round,criterion\n";
    char buf[64];
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g", values[i]);
        os << i << "," << buf << "\n";
    }
}

void write_phi_profile(const CandidatePool& pool, const Design& design,
                       const GlmModel& model, const CriterionSpec& crit,
                       const std::string& path) {
    const CriterionContext ctx =
        criterion_context(fisher_information(design, model), crit);
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    for (int j = 0; j < pool.dim(); ++j) os << (j ? "," : "") << "x" << j + 1;
    os << ",phi\n";
    char buf[64];
    for (int i = 0; i < pool.size(); ++i) {
        const Vector x = pool.points.row(i).transpose();
        const Vector g = model.basis.eval(x);
        const double phi = ctx.threshold - glm_weight(model, x) * ctx.score(g);
        for (int j = 0; j < pool.dim(); ++j) {
            std::snprintf(buf, sizeof buf, "%.12g", x[j]);
            os << buf << ",";
        }
        std::snprintf(buf, sizeof buf, "%.12g", phi);
        os << buf << "\n";
    }
}

void write_report_txt(const RunReport& r, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.12g", v);
        return std::string(buf);
    };
    os << "mode: " << (r.mode == RunMode::Sequential ? "sequential" : "weights-only") << "\n";
    os << "criterion: " << r.criterion_name << "\n";
    os << "converged: " << (r.converged ? "true" : "false") << "\n";
    os << "criterion_value: " << num(r.criterion_value) << "\n";
    os << "threshold: " << num(r.threshold) << "\n";
    os << "equivalence_gap: " << num(r.equivalence_gap) << "\n";
    os << "gap_tolerance: " << num(r.gap_tolerance) << "\n";
    os << "rounds: " << r.rounds << "\n";
    os << "support_points: " << r.design.size() << "\n";
    os << "inner_iterations: " << r.inner_iterations << "\n";
    os << "merges: " << r.merges << "\n";
    os << "refinements: " << r.refinements << "\n";
    os << "seed: " << r.seed << "\n";
    if (!r.diagnostics.empty()) os << "diagnostics: " << r.diagnostics << "\n";
    os << "library_version: " << kLibraryVersion << "\n";
    os << "config_echo: config_echo.json\n";
    if (!os.good()) throw IoError("failed while writing " + path);
}

}  // namespace

RunReport run_problem(const ProblemConfig& cfg, const std::string& out_dir, bool quiet,
                      std::ostream& log) {
    const auto t0 = std::chrono::steady_clock::now();

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!fs::is_directory(out_dir))
        throw IoError("output directory " + out_dir + " cannot be created");
    {  // probe writability up front
        const std::string probe = (fs::path(out_dir) / ".write_probe").string();
        std::ofstream p(probe);
        if (!p) throw IoError("output directory " + out_dir + " is not writable");
        p.close();
        fs::remove(probe, ec);
    }

    const GlmModel model = cfg.make_model();
    const CriterionSpec crit = cfg.make_criterion(model);

    if (crit.kind == CriterionKind::EI && !crit.A.positive_definite && !quiet)
        log << "warning: the moment matrix is singular (eigmin " << crit.A.eigmin
            << "); consider orthogonalizing the basis\n";

    RunReport report;
    report.mode = cfg.mode;
    report.criterion_name = crit.name();
    report.seed = cfg.seed;

    std::optional<CandidatePool> pool;
    if (cfg.pool_kind) pool = cfg.make_pool(model);

    if (cfg.mode == RunMode::Sequential) {
        auto [design, seq] = run_sequential(model, crit, *pool, cfg.make_seq_config());
        report.design = std::move(design);
        report.converged = seq.converged;
        report.criterion_value = seq.final_value;
        report.threshold = seq.final_threshold;
        report.equivalence_gap = seq.final_equivalence_gap;
        report.rounds = seq.rounds;
        report.inner_iterations = seq.inner_iterations_total;
        report.merges = seq.merges;
        report.refinements = seq.refinements;
        report.convergence = seq.criterion_per_round;
        report.diagnostics = seq.diagnostics;
    } else {
        WeightOptConfig wcfg = cfg.make_seq_config().inner;
        auto [design, wrep] = optimize_weights(*cfg.start_design, model, crit, wcfg);
        report.design = std::move(design);
        report.converged = wrep.converged;
        report.criterion_value = wrep.final_value;
        const CriterionContext ctx =
            criterion_context(fisher_information(report.design, model), crit);
        report.threshold = ctx.threshold;
        report.rounds = wrep.iterations;
        report.inner_iterations = wrep.iterations;
        report.convergence = wrep.criterion_trace;
        // Certify over the pool when one is configured, otherwise with
        // the optimal-weight condition on the fixed support.
        report.equivalence_gap =
            pool ? equivalence_check(report.design, model, crit, *pool).gap
                 : wrep.final_gap;
    }
    report.gap_tolerance = cfg.gap_tolerance_rel * report.threshold;

    write_design_csv(report.design, (fs::path(out_dir) / "design.csv").string());
    write_report_txt(report, (fs::path(out_dir) / "report.txt").string());
    write_convergence_csv(report.convergence,
                          (fs::path(out_dir) / "convergence.csv").string());
    {
        const std::string echo_path = (fs::path(out_dir) / "config_echo.json").string();
        std::ofstream os(echo_path);
        if (!os) throw IoError("cannot open " + echo_path + " for writing");
        os << emit_config(cfg);
    }
    const bool profile = pool && (cfg.phi_profile == PhiProfileMode::Always ||
                                  (cfg.phi_profile == PhiProfileMode::Auto && !quiet &&
                                   model.dim() <= 2));
    if (profile)
        write_phi_profile(*pool, report.design, model, crit,
                          (fs::path(out_dir) / "phi_profile.csv").string());

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!quiet) {
        log << "criterion " << report.criterion_name << " value " << report.criterion_value
            << ", gap " << report.equivalence_gap << " (tolerance " << report.gap_tolerance
            << "), " << report.design.size() << " support points, " << report.rounds
            << " rounds, " << report.wall_seconds << " s\n";
        log << (report.exit_status() == 0 ? "certified optimal on the pool"
                                          : "not certified")
            << "; outputs in " << out_dir << "\n";
    }
    return report;
}

}  // namespace eidesign
