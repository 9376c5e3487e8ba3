#ifndef EIDESIGN_MODEL_HPP
#define EIDESIGN_MODEL_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "eidesign/errors.hpp"

namespace eidesign {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Axis-aligned box, the experimental region.
struct Box {
    Vector lower;
    Vector upper;

    Box() = default;
    Box(Vector lo, Vector hi);

    int dim() const { return static_cast<int>(lower.size()); }
    double volume() const;
    bool contains(const Vector& x, double tol = 0.0) const;
};

enum class BasisKind { InterceptPlusLinear, FullPolynomial, ExplicitTerms };

// Polynomial basis over d variables. Each term is a multi-index
// alpha in N^d denoting the monomial prod_j x_j^alpha_j. An optional
// lower-triangular transform T replaces the raw monomial vector m(x)
// by T*m(x); the transform is produced by basis orthogonalization.
class Basis {
public:
    static Basis intercept_plus_linear(int dim);
    static Basis full_polynomial(int dim, int degree);
    static Basis from_terms(int dim, std::vector<std::vector<int>> terms);

    int dim() const { return dim_; }
    int size() const { return static_cast<int>(terms_.size()); }
    BasisKind kind() const { return kind_; }
    const std::vector<std::vector<int>>& terms() const { return terms_; }
    const std::optional<Matrix>& transform() const { return transform_; }

    // Returns a copy of this basis whose functions are T * (these functions).
    Basis with_transform(const Matrix& T) const;

    // Evaluates the basis functions at x (length-d vector).
    Vector eval(const Vector& x) const;

    std::string term_name(int i) const;

private:
    Basis(BasisKind kind, int dim, std::vector<std::vector<int>> terms);
    BasisKind kind_;
    int dim_;
    std::vector<std::vector<int>> terms_;
    std::optional<Matrix> transform_;
};

enum class LinkKind { Logit, Log, Identity };

// Canonical link for the response distribution. Identity carries the
// Gaussian noise scale sigma (default 1).
struct Link {
    LinkKind kind = LinkKind::Identity;
    double sigma = 1.0;

    static Link logit() { return {LinkKind::Logit, 1.0}; }
    static Link log() { return {LinkKind::Log, 1.0}; }
    static Link identity(double sigma = 1.0);
};

// A generalized linear model with a fixed local coefficient vector and an
// axis-aligned experimental region.
struct GlmModel {
    Basis basis;
    Link link;
    Vector beta;
    Box domain;

    GlmModel(Basis basis, Link link, Vector beta, Box domain);

    int dim() const { return basis.dim(); }
    int size() const { return basis.size(); }

    // Linear predictor eta = beta' g(x).
    double eta(const Vector& x) const;
};

// g(x): basis functions evaluated at x.
Vector basis_eval(const GlmModel& model, const Vector& x);

// GLM weight w(x) = 1 / (Var(Y) * h'(mu)^2) evaluated at eta = beta'g(x).
// Logit: e^eta/(1+e^eta)^2, Log: e^eta, Identity: 1/sigma^2.
double glm_weight(const GlmModel& model, const Vector& x);
double glm_weight_at_eta(const Link& link, double eta);

// Squared derivative of the inverse link, (d h^{-1} / d eta)^2.
// Logit: [e^eta/(1+e^eta)^2]^2, Log: e^{2 eta}, Identity: 1.
double mean_deriv_sq(const GlmModel& model, const Vector& x);
double mean_deriv_sq_at_eta(const Link& link, double eta);

}  // namespace eidesign

#endif  // EIDESIGN_MODEL_HPP
