#include "eidesign/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace eidesign {

Box::Box(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size())
        throw DimensionError("box lower/upper bounds have different lengths");
    if (lower.size() == 0) throw DimensionError("box must have at least one axis");
    for (int j = 0; j < lower.size(); ++j) {
        if (!(lower[j] < upper[j])) {
            std::ostringstream os;
            os << "box axis " << j + 1 << ": lower bound " << lower[j]
               << " must be below upper bound " << upper[j];
            throw DimensionError(os.str());
        }
    }
}

double Box::volume() const {
    double v = 1.0;
    for (int j = 0; j < lower.size(); ++j) v *= upper[j] - lower[j];
    return v;
}

bool Box::contains(const Vector& x, double tol) const {
    if (x.size() != lower.size()) return false;
    for (int j = 0; j < x.size(); ++j)
        if (x[j] < lower[j] - tol || x[j] > upper[j] + tol) return false;
    return true;
}

Basis::Basis(BasisKind kind, int dim, std::vector<std::vector<int>> terms)
    : kind_(kind), dim_(dim), terms_(std::move(terms)) {
    if (dim_ < 1) throw DimensionError("basis dimension must be positive");
    if (terms_.empty()) throw DimensionError("basis needs at least one term");
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (static_cast<int>(terms_[i].size()) != dim_)
            throw DimensionError("basis term " + std::to_string(i + 1) +
                                 " has wrong number of exponents");
        for (int a : terms_[i])
            if (a < 0) throw DimensionError("basis exponents must be nonnegative");
        for (std::size_t k = 0; k < i; ++k)
            if (terms_[k] == terms_[i])
                throw DimensionError("basis terms must be pairwise distinct (term " +
                                     std::to_string(i + 1) + " repeats term " +
                                     std::to_string(k + 1) + ")");
    }
}

Basis Basis::intercept_plus_linear(int dim) {
    std::vector<std::vector<int>> terms;
    terms.emplace_back(dim, 0);
    for (int j = 0; j < dim; ++j) {
        std::vector<int> t(dim, 0);
        t[j] = 1;
        terms.push_back(std::move(t));
    }
    return Basis(BasisKind::InterceptPlusLinear, dim, std::move(terms));
}

namespace {
void enumerate_degree(int dim, int axis, int remaining, std::vector<int>& cur,
                      std::vector<std::vector<int>>& out) {
    if (axis == dim - 1) {
        cur[axis] = remaining;
        out.push_back(cur);
        return;
    }
    for (int a = remaining; a >= 0; --a) {
        cur[axis] = a;
        enumerate_degree(dim, axis + 1, remaining - a, cur, out);
    }
}
}  // namespace

Basis Basis::full_polynomial(int dim, int degree) {
    if (degree < 0) throw DimensionError("polynomial degree must be nonnegative");
    // Graded order: total degree ascending, earlier axes carry higher exponents first.
    std::vector<std::vector<int>> terms;
    std::vector<int> cur(dim, 0);
    for (int deg = 0; deg <= degree; ++deg) enumerate_degree(dim, 0, deg, cur, terms);
    return Basis(BasisKind::FullPolynomial, dim, std::move(terms));
}

Basis Basis::from_terms(int dim, std::vector<std::vector<int>> terms) {
    return Basis(BasisKind::ExplicitTerms, dim, std::move(terms));
}

Basis Basis::with_transform(const Matrix& T) const {
    if (T.rows() != size() || T.cols() != size())
        throw DimensionError("basis transform must be " + std::to_string(size()) + "x" +
                             std::to_string(size()));
    Basis b = *this;
    if (transform_)
        b.transform_ = T * (*transform_);
    else
        b.transform_ = T;
    return b;
}

Vector Basis::eval(const Vector& x) const {
    if (x.size() != dim_)
        throw DimensionError("point has length " + std::to_string(x.size()) +
                             ", basis expects " + std::to_string(dim_));
    Vector m(size());
    for (int i = 0; i < size(); ++i) {
        double v = 1.0;
        for (int j = 0; j < dim_; ++j) {
            const int a = terms_[i][j];
            for (int k = 0; k < a; ++k) v *= x[j];
        }
        m[i] = v;
    }
    if (transform_) return (*transform_) * m;
    return m;
}

std::string Basis::term_name(int i) const {
    const auto& t = terms_.at(static_cast<std::size_t>(i));
    std::string s;
    for (int j = 0; j < dim_; ++j) {
        if (t[j] == 0) continue;
        if (!s.empty()) s += "*";
        s += "x" + std::to_string(j + 1);
        if (t[j] > 1) s += "^" + std::to_string(t[j]);
    }
    return s.empty() ? "1" : s;
}

Link Link::identity(double sigma) {
    if (!(sigma > 0.0)) throw DimensionError("Gaussian sigma must be positive");
    return {LinkKind::Identity, sigma};
}

GlmModel::GlmModel(Basis basis_in, Link link_in, Vector beta_in, Box domain_in)
    : basis(std::move(basis_in)),
      link(link_in),
      beta(std::move(beta_in)),
      domain(std::move(domain_in)) {
    if (beta.size() != basis.size())
        throw DimensionError("beta has length " + std::to_string(beta.size()) +
                             ", basis has " + std::to_string(basis.size()) +
                             " functions");
    if (domain.dim() != basis.dim())
        throw DimensionError("domain dimension " + std::to_string(domain.dim()) +
                             " does not match basis dimension " +
                             std::to_string(basis.dim()));
}

double GlmModel::eta(const Vector& x) const { return beta.dot(basis.eval(x)); }

Vector basis_eval(const GlmModel& model, const Vector& x) { return model.basis.eval(x); }

double glm_weight_at_eta(const Link& link, double eta) {
    switch (link.kind) {
        case LinkKind::Logit: {
            // e^eta/(1+e^eta)^2 is symmetric in eta; evaluate with the
            // decaying exponential so large |eta| cannot overflow.
            const double e = std::exp(-std::abs(eta));
            const double d = 1.0 + e;
            return e / (d * d);
        }
        case LinkKind::Log:
            return std::exp(eta);
        case LinkKind::Identity:
            return 1.0 / (link.sigma * link.sigma);
    }
    return 0.0;  // unreachable
}

double mean_deriv_sq_at_eta(const Link& link, double eta) {
    switch (link.kind) {
        case LinkKind::Logit: {
            const double w = glm_weight_at_eta(link, eta);
            return w * w;
        }
        case LinkKind::Log:
            return std::exp(2.0 * eta);
        case LinkKind::Identity:
            return 1.0;
    }
    return 0.0;  // unreachable
}

double glm_weight(const GlmModel& model, const Vector& x) {
    return glm_weight_at_eta(model.link, model.eta(x));
}

double mean_deriv_sq(const GlmModel& model, const Vector& x) {
    return mean_deriv_sq_at_eta(model.link, model.eta(x));
}

}  // namespace eidesign
