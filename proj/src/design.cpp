#include "eidesign/design.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace eidesign {

namespace {
constexpr double kDistinctTol = 1e-12;
constexpr double kSimplexTol = 1e-12;
}  // namespace

Design::Design(Matrix pts, Vector w) : points(std::move(pts)), weights(std::move(w)) {
    if (points.rows() != weights.size())
        throw DimensionError("design has " + std::to_string(points.rows()) +
                             " points but " + std::to_string(weights.size()) + " weights");
    if (points.rows() == 0) throw DimensionError("design needs at least one point");
    double sum = 0.0;
    for (int i = 0; i < weights.size(); ++i) {
        if (weights[i] < 0.0)
            throw DimensionError("design weight " + std::to_string(i + 1) + " is negative");
        sum += weights[i];
    }
    if (std::abs(sum - 1.0) > kSimplexTol)
        throw DimensionError("design weights sum to " + std::to_string(sum) +
                             ", expected 1");
    for (int i = 0; i < points.rows(); ++i)
        for (int k = 0; k < i; ++k)
            if ((points.row(i) - points.row(k)).cwiseAbs().maxCoeff() <= kDistinctTol)
                throw DimensionError("design points " + std::to_string(k + 1) + " and " +
                                     std::to_string(i + 1) + " coincide");
}

Design Design::uniform(Matrix pts) {
    const int n = static_cast<int>(pts.rows());
    return Design(std::move(pts), Vector::Constant(n, 1.0 / n));
}

Design Design::merged(const Matrix& pts, const Vector& w) {
    Matrix out_pts(pts.rows(), pts.cols());
    Vector out_w(pts.rows());
    int n = 0;
    for (int i = 0; i < pts.rows(); ++i) {
        int hit = -1;
        for (int k = 0; k < n; ++k)
            if ((pts.row(i) - out_pts.row(k)).cwiseAbs().maxCoeff() <= kDistinctTol) {
                hit = k;
                break;
            }
        if (hit >= 0) {
            out_w[hit] += w[i];
        } else {
            out_pts.row(n) = pts.row(i);
            out_w[n] = w[i];
            ++n;
        }
    }
    Vector wn = out_w.head(n);
    wn /= wn.sum();
    return Design(out_pts.topRows(n), wn);
}

void write_design_csv(const Design& design, std::ostream& os) {
    for (int j = 0; j < design.dim(); ++j) os << (j ? "," : "") << "x" << j + 1;
    os << ",weight\n";
    char buf[64];
    for (int i = 0; i < design.size(); ++i) {
        for (int j = 0; j < design.dim(); ++j) {
            std::snprintf(buf, sizeof buf, "%.12g", design.points(i, j));
            os << buf << ",";
        }
        std::snprintf(buf, sizeof buf, "%.12g", design.weights[i]);
        os << buf << "\n";
    }
}

void write_design_csv(const Design& design, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    write_design_csv(design, os);
    if (!os.good()) throw IoError("failed while writing " + path);
}

Design read_design_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("design CSV is empty");
    // Count columns from the header.
    int cols = 1;
    for (char c : line)
        if (c == ',') ++cols;
    if (cols < 2) throw IoError("design CSV header needs x1,...,weight columns");
    const int d = cols - 1;
    std::vector<Vector> rows;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        Vector row(cols);
        std::string cell;
        for (int j = 0; j < cols; ++j) {
            if (!std::getline(ls, cell, ','))
                throw IoError("design CSV line " + std::to_string(lineno) +
                              ": expected " + std::to_string(cols) + " columns");
            try {
                row[j] = std::stod(cell);
            } catch (const std::exception&) {
                throw IoError("design CSV line " + std::to_string(lineno) +
                              ": '" + cell + "' is not a number");
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError("design CSV has no data rows");
    Matrix pts(static_cast<int>(rows.size()), d);
    Vector w(static_cast<int>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        pts.row(static_cast<int>(i)) = rows[i].head(d).transpose();
        w[static_cast<int>(i)] = rows[i][d];
    }
    const double sum = w.sum();
    if (!(sum > 0.0) || std::abs(sum - 1.0) > 1e-6)
        throw IoError("design CSV weights sum to " + std::to_string(sum) +
                      ", expected 1");
    w /= sum;  // absorb the 12-digit rounding
    return Design(std::move(pts), std::move(w));
}

Design read_design_csv_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path);
    return read_design_csv(is);
}

CriterionSpec CriterionSpec::ei(MomentMatrix A) {
    CriterionSpec c;
    c.kind = CriterionKind::EI;
    c.A = std::move(A);
    c.A_half = spd_power(c.A.A, 0.5);
    return c;
}

CriterionSpec CriterionSpec::phi_p(double p, Matrix B, int q) {
    if (!(p > 0.0)) throw DimensionError("Phi_p exponent p must be positive");
    if (B.rows() != B.cols()) throw DimensionError("Phi_p matrix B must be square");
    if (q < 1 || q > B.rows())
        throw DimensionError("Phi_p rank q must be in 1.." + std::to_string(B.rows()));
    CriterionSpec c;
    c.kind = CriterionKind::PhiP;
    c.p = p;
    c.B = 0.5 * (B + B.transpose());
    c.q = q;
    return c;
}

CriterionSpec CriterionSpec::a_optimality(int l) {
    return phi_p(1.0, Matrix::Identity(l, l), l);
}

CriterionSpec CriterionSpec::d_optimality() {
    CriterionSpec c;
    c.kind = CriterionKind::D;
    return c;
}

std::string CriterionSpec::name() const {
    switch (kind) {
        case CriterionKind::EI: return "ei";
        case CriterionKind::PhiP: return "phi-p";
        case CriterionKind::D: return "d";
    }
    return "?";
}

InfoMatrix::InfoMatrix(Matrix info) : info_(0.5 * (info + info.transpose())) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(info_, Eigen::EigenvaluesOnly);
    eigmin_ = es.eigenvalues().minCoeff();
    eigmax_ = es.eigenvalues().maxCoeff();
    cond_ = eigmin_ > 0.0 ? eigmax_ / eigmin_ : std::numeric_limits<double>::infinity();
    singular_ = !(eigmin_ > 1e-12 * std::max(eigmax_, 0.0));
    if (!singular_) llt_.compute(info_);
    if (!singular_ && llt_.info() != Eigen::Success) singular_ = true;
}

void InfoMatrix::require_nonsingular() const {
    if (singular_)
        throw SingularInformationError(
            "information matrix is singular (condition estimate " +
                std::to_string(cond_) + ")",
            cond_);
}

Matrix InfoMatrix::solve(const Matrix& rhs) const {
    require_nonsingular();
    return llt_.solve(rhs);
}

Matrix InfoMatrix::inverse() const {
    require_nonsingular();
    return llt_.solve(Matrix::Identity(info_.rows(), info_.cols()));
}

double InfoMatrix::log_det() const {
    require_nonsingular();
    double s = 0.0;
    for (int i = 0; i < info_.rows(); ++i) s += std::log(llt_.matrixL()(i, i));
    return 2.0 * s;
}

InfoMatrix fisher_information(const Design& design, const GlmModel& model) {
    const int l = model.size();
    Matrix info = Matrix::Zero(l, l);
    for (int i = 0; i < design.size(); ++i) {
        const Vector x = design.points.row(i).transpose();
        const Vector g = model.basis.eval(x);
        info.noalias() += (design.weights[i] * glm_weight(model, x)) * (g * g.transpose());
    }
    return InfoMatrix(std::move(info));
}

Matrix spd_power(const Matrix& M, double r) {
    if (M.rows() != M.cols()) throw DimensionError("matrix power needs a square matrix");
    if (r == 0.0) return Matrix::Identity(M.rows(), M.cols());
    if (r == 1.0) return 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()));
    Vector ev = es.eigenvalues();
    const double scale = ev.cwiseAbs().maxCoeff();
    Vector powered(ev.size());
    for (int i = 0; i < ev.size(); ++i) {
        double v = ev[i];
        if (v < 0.0) {
            if (v < -1e-10 * scale)
                throw DimensionError("matrix power: matrix has negative eigenvalue " +
                                     std::to_string(v));
            v = 0.0;
        }
        if (v == 0.0 && r < 0.0)
            throw DimensionError("matrix power: negative power of a singular matrix");
        powered[i] = v == 0.0 ? 0.0 : std::pow(v, r);
    }
    return es.eigenvectors() * powered.asDiagonal() * es.eigenvectors().transpose();
}

CriterionContext criterion_context(const InfoMatrix& info, const CriterionSpec& crit) {
    CriterionContext ctx;
    const int l = static_cast<int>(info.matrix().rows());
    switch (crit.kind) {
        case CriterionKind::EI: {
            if (crit.A.size() != l)
                throw DimensionError("moment matrix size does not match information matrix");
            const Matrix inv = info.inverse();
            ctx.value = (crit.A.A * inv).trace();
            ctx.threshold = ctx.value;
            // Score kernel inv A inv, factored as (A^(1/2) inv)' (A^(1/2) inv).
            ctx.factor = crit.A_half * inv;
            break;
        }
        case CriterionKind::PhiP: {
            if (crit.B.rows() != l)
                throw DimensionError("Phi_p matrix B size does not match information matrix");
            info.require_nonsingular();
            // Everything comes from S = I^(-1/2) B I^(-1/2): the value is
            // (tr(S^p)/q)^(1/p) and the score kernel is
            // c * I^(-1/2) S^p I^(-1/2), factored with S^(p/2). Integer
            // p in {1,2,3} gets the trace by repeated multiplication.
            const Matrix inv_half = spd_power(info.matrix(), -0.5);
            const Matrix S0 = inv_half * crit.B * inv_half;
            const Matrix S = 0.5 * (S0 + S0.transpose());
            double trace_p = 0.0;
            if (crit.p == 1.0 || crit.p == 2.0 || crit.p == 3.0) {
                Matrix power = S;
                for (int k = 1; k < static_cast<int>(crit.p); ++k) power = power * S;
                trace_p = power.trace();
            } else {
                trace_p = spd_power(S, crit.p).trace();
            }
            if (!(trace_p > 0.0))
                throw FeasibilityError("tr[(inv(I) B)^p] is not positive; B may be zero");
            ctx.value = std::pow(trace_p / crit.q, 1.0 / crit.p);
            ctx.threshold = ctx.value;
            // Normalization from the optimal-weight condition:
            // q^(-1/p) [tr]^(1/p - 1) * scores.
            const double c =
                std::pow(static_cast<double>(crit.q), -1.0 / crit.p) *
                std::pow(trace_p, 1.0 / crit.p - 1.0);
            const Matrix half_power = crit.p == 2.0 ? S : spd_power(S, 0.5 * crit.p);
            ctx.factor = std::sqrt(c) * (half_power * inv_half);
            break;
        }
        case CriterionKind::D: {
            ctx.value = -info.log_det();
            ctx.threshold = static_cast<double>(l);
            ctx.factor = spd_power(info.matrix(), -0.5);
            break;
        }
    }
    return ctx;
}

double criterion_value(const Design& design, const GlmModel& model,
                       const CriterionSpec& crit) {
    return criterion_context(fisher_information(design, model), crit).value;
}

double criterion_value_info(const Matrix& info, const CriterionSpec& crit) {
    return criterion_context(InfoMatrix(info), crit).value;
}

Vector point_scores(const Design& design, const GlmModel& model,
                    const CriterionContext& ctx) {
    Vector t(design.size());
    for (int i = 0; i < design.size(); ++i) {
        const Vector x = design.points.row(i).transpose();
        t[i] = glm_weight(model, x) * ctx.score(model.basis.eval(x));
    }
    return t;
}

}  // namespace eidesign
