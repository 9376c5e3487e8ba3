#ifndef EIDESIGN_MEASURE_HPP
#define EIDESIGN_MEASURE_HPP

#include <vector>

#include "eidesign/model.hpp"

namespace eidesign {

enum class MeasureKind { UniformBox, Discrete };

// Probability measure the prediction-error criterion integrates against:
// uniform on a box, or a finite set of atoms (a single atom of mass one
// is the Dirac / worst-point case).
struct Measure {
    MeasureKind kind = MeasureKind::UniformBox;
    Box box;                          // UniformBox
    Matrix atom_points;               // Discrete: one row per atom
    Vector atom_probs;

    static Measure uniform_box(Box box);
    static Measure discrete(Matrix points, Vector probs);
    static Measure dirac(Vector point);

    int dim() const;
};

enum class QuadKind { GaussLegendreTensor, QmcSobol, ExactDiscrete };

// How the moment matrix integral is evaluated.
struct Quadrature {
    QuadKind method = QuadKind::GaussLegendreTensor;
    int nodes_per_axis = 32;   // GaussLegendreTensor
    int n_points = 1 << 14;    // QmcSobol, power of two

    static Quadrature gauss_legendre(int nodes_per_axis);
    static Quadrature qmc_sobol(int n_points);
    static Quadrature exact_discrete();

    // Default policy: tensor Gauss-Legendre (m=32) for d <= 3, Sobol QMC
    // (n=2^14) for d >= 4, exact summation for discrete measures.
    static Quadrature auto_for(const Measure& measure, int dim);
};

// Gauss-Legendre nodes and weights on [-1,1], computed by Newton
// iteration on the Legendre recurrence.
void gauss_legendre_rule(int m, std::vector<double>& nodes, std::vector<double>& weights);

// The l x l matrix A = integral of g g' (d h^{-1}/d eta)^2 dF, with the
// measure and quadrature that produced it and its smallest eigenvalue.
struct MomentMatrix {
    Matrix A;
    Measure measure;
    Quadrature quadrature;
    double eigmin = 0.0;
    bool positive_definite = false;

    int size() const { return static_cast<int>(A.rows()); }
};

MomentMatrix moment_matrix(const GlmModel& model, const Measure& measure,
                           const Quadrature& quad);

// True iff eigmin(A) > 1e-10 * ||A||_inf. Diagnostic; never throws.
bool is_positive_definite(const MomentMatrix& A);

// Result of re-expressing the basis so the moment matrix is diagonal:
// the transformed model (same predictions, same design criterion for the
// prediction-error case) and the lower-triangular transform applied.
struct OrthogonalizedBasis {
    GlmModel model;
    Matrix transform;
};

// Modified Gram-Schmidt on the basis functions under the inner product
// <u,v> = integral u v (d h^{-1}/d eta)^2 dF. The returned model keeps
// the linear predictor unchanged (beta is remapped through the
// transform) while its moment matrix becomes diagonal. Throws
// DependentBasisError when a pivot falls below 1e-12 of the leading one.
OrthogonalizedBasis orthogonalize_basis(const GlmModel& model, const Measure& measure,
                                        const Quadrature& quad);

}  // namespace eidesign

#endif  // EIDESIGN_MEASURE_HPP
