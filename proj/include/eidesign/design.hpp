#ifndef EIDESIGN_DESIGN_HPP
#define EIDESIGN_DESIGN_HPP

#include <iosfwd>
#include <string>

#include "eidesign/measure.hpp"
#include "eidesign/model.hpp"

namespace eidesign {

// A continuous design: support points (rows) with a probability weight
// per point. Weights are nonnegative, sum to one within 1e-12, and
// points are pairwise distinct in the infinity norm (tolerance 1e-12).
struct Design {
    Matrix points;   // n x d
    Vector weights;  // n

    Design() = default;
    Design(Matrix points, Vector weights);

    int size() const { return static_cast<int>(points.rows()); }
    int dim() const { return static_cast<int>(points.cols()); }

    // Uniform weights over the given points.
    static Design uniform(Matrix points);

    // Builds a design from possibly duplicated points, summing the
    // weights of near-duplicates (1e-12 in the infinity norm).
    static Design merged(const Matrix& points, const Vector& weights);
};

// Writes/reads the design CSV (header x1,...,xd,weight; 12 significant
// digits). Reading renormalizes the weight column exactly to sum one.
void write_design_csv(const Design& design, std::ostream& os);
void write_design_csv(const Design& design, const std::string& path);
Design read_design_csv(std::istream& is);
Design read_design_csv_file(const std::string& path);

enum class CriterionKind { EI, PhiP, D };

// Which objective to minimize.
//   EI:   tr(A inv(I)) for a moment matrix A.
//   PhiP: (tr[(inv(I) B)^p] / q)^(1/p) with B symmetric PSD of rank q;
//         the default B = identity, q = l is A-optimality.
//   D:    -log det I.
struct CriterionSpec {
    CriterionKind kind = CriterionKind::D;
    MomentMatrix A;   // EI
    Matrix A_half;    // EI: A^(1/2), cached for score factoring
    double p = 1.0;   // PhiP
    Matrix B;         // PhiP
    int q = 0;        // PhiP: rank of B

    static CriterionSpec ei(MomentMatrix A);
    static CriterionSpec phi_p(double p, Matrix B, int q);
    static CriterionSpec a_optimality(int l);  // PhiP with p=1, B=I, q=l
    static CriterionSpec d_optimality();

    // Default multiplicative-update exponent: 1 for D, 1/2 otherwise.
    double default_delta() const { return kind == CriterionKind::D ? 1.0 : 0.5; }

    std::string name() const;
};

// Fisher information of a design with a cached Cholesky factor and
// condition estimate. Construction never fails; the inverse-dependent
// accessors throw SingularInformationError when eigmin <= 1e-12 ||I||.
class InfoMatrix {
public:
    explicit InfoMatrix(Matrix info);

    const Matrix& matrix() const { return info_; }
    double eigmin() const { return eigmin_; }
    double condition_estimate() const { return cond_; }
    bool singular() const { return singular_; }

    // inv(I) * rhs via the cached Cholesky factor.
    Matrix solve(const Matrix& rhs) const;
    Matrix inverse() const;
    double log_det() const;
    void require_nonsingular() const;

private:
    Matrix info_;
    Eigen::LLT<Matrix> llt_;
    double eigmin_ = 0.0;
    double eigmax_ = 0.0;
    double cond_ = 0.0;
    bool singular_ = true;
};

// I = sum_i lambda_i w(x_i) g(x_i) g(x_i)'.
InfoMatrix fisher_information(const Design& design, const GlmModel& model);

// Everything the algorithms need from one (information, criterion)
// evaluation. For any design, sum_i lambda_i t_i == threshold with
// t_i = w(x_i) |factor g(x_i)|^2; the directional derivative toward a
// design xi' is threshold - sum_i dlambda_i t_i, and the optimal-weight
// condition is t_i == threshold on the support. The score matrix is
// held in factored form so t stays nonnegative under rounding even when
// the underlying kernel is rank deficient.
struct CriterionContext {
    double value = 0.0;      // criterion value
    double threshold = 0.0;  // criterion value for EI/PhiP, l for D
    Matrix factor;           // l x l; the score kernel is factor' factor

    double score(const Vector& g) const { return (factor * g).squaredNorm(); }
};

CriterionContext criterion_context(const InfoMatrix& info, const CriterionSpec& crit);

// Criterion value for a design, or directly from an information matrix
// (the latter accepts any symmetric positive definite matrix, which the
// derivative tests rely on).
double criterion_value(const Design& design, const GlmModel& model,
                       const CriterionSpec& crit);
double criterion_value_info(const Matrix& info, const CriterionSpec& crit);

// Per-point scores t_i = w(x_i) |factor g(x_i)|^2.
Vector point_scores(const Design& design, const GlmModel& model,
                    const CriterionContext& ctx);

// M^r for symmetric M via eigendecomposition. Small negative eigenvalues
// (above -1e-10 ||M||) are clamped to zero; r < 0 requires strictly
// positive eigenvalues.
Matrix spd_power(const Matrix& M, double r);

}  // namespace eidesign

#endif  // EIDESIGN_DESIGN_HPP
