#include "eidesign/measure.hpp"

#include <cmath>
#include <sstream>

#include "eidesign/sobol.hpp"

namespace eidesign {

Measure Measure::uniform_box(Box box) {
    Measure m;
    m.kind = MeasureKind::UniformBox;
    m.box = std::move(box);
    return m;
}

Measure Measure::discrete(Matrix points, Vector probs) {
    if (points.rows() != probs.size())
        throw DimensionError("discrete measure: " + std::to_string(points.rows()) +
                             " atoms but " + std::to_string(probs.size()) +
                             " probabilities");
    if (points.rows() == 0) throw DimensionError("discrete measure needs at least one atom");
    double sum = 0.0;
    for (int i = 0; i < probs.size(); ++i) {
        if (!(probs[i] > 0.0))
            throw DimensionError("discrete measure: probability " + std::to_string(i + 1) +
                                 " must be positive");
        sum += probs[i];
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw DimensionError("discrete measure: probabilities sum to " +
                             std::to_string(sum) + ", expected 1");
    Measure m;
    m.kind = MeasureKind::Discrete;
    m.atom_points = std::move(points);
    m.atom_probs = std::move(probs);
    return m;
}

Measure Measure::dirac(Vector point) {
    Matrix pts(1, point.size());
    pts.row(0) = point.transpose();
    Vector probs(1);
    probs[0] = 1.0;
    return discrete(std::move(pts), std::move(probs));
}

int Measure::dim() const {
    return kind == MeasureKind::UniformBox ? box.dim()
                                           : static_cast<int>(atom_points.cols());
}

Quadrature Quadrature::gauss_legendre(int nodes_per_axis) {
    if (nodes_per_axis < 2) throw QuadratureError("Gauss-Legendre needs at least 2 nodes per axis");
    Quadrature q;
    q.method = QuadKind::GaussLegendreTensor;
    q.nodes_per_axis = nodes_per_axis;
    return q;
}

Quadrature Quadrature::qmc_sobol(int n_points) {
    if (n_points < 1 || (n_points & (n_points - 1)) != 0)
        throw QuadratureError("Sobol quadrature point count must be a power of two");
    Quadrature q;
    q.method = QuadKind::QmcSobol;
    q.n_points = n_points;
    return q;
}

Quadrature Quadrature::exact_discrete() {
    Quadrature q;
    q.method = QuadKind::ExactDiscrete;
    return q;
}

Quadrature Quadrature::auto_for(const Measure& measure, int dim) {
    if (measure.kind == MeasureKind::Discrete) return exact_discrete();
    return dim <= 3 ? gauss_legendre(32) : qmc_sobol(1 << 14);
}

void gauss_legendre_rule(int m, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(static_cast<std::size_t>(m), 0.0);
    weights.assign(static_cast<std::size_t>(m), 0.0);
    const int half = (m + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Chebyshev-based starting guess for the i-th positive root.
        double x = std::cos(M_PI * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Legendre recurrence for P_m(x) and its derivative.
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= m; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = m * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[static_cast<std::size_t>(i)] = -x;
        nodes[static_cast<std::size_t>(m - 1 - i)] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[static_cast<std::size_t>(i)] = w;
        weights[static_cast<std::size_t>(m - 1 - i)] = w;
    }
}

namespace {

void check_compatible(const Measure& measure, const Quadrature& quad) {
    const bool discrete = measure.kind == MeasureKind::Discrete;
    const bool exact = quad.method == QuadKind::ExactDiscrete;
    if (discrete != exact)
        throw QuadratureError(discrete
                                  ? "discrete measure requires the exact-discrete method"
                                  : "exact-discrete method requires a discrete measure");
}

std::string point_string(const Vector& x) {
    std::ostringstream os;
    os << "(";
    for (int j = 0; j < x.size(); ++j) os << (j ? ", " : "") << x[j];
    os << ")";
    return os.str();
}

// Accumulates prob * g(x) g(x)' * (dh^{-1}/deta)^2 into A, in caller order.
void accumulate(const GlmModel& model, const Vector& x, double prob, Matrix& A) {
    const Vector g = model.basis.eval(x);
    const double v = mean_deriv_sq(model, x);
    if (!std::isfinite(v) || !g.allFinite())
        throw QuadratureError("quadrature integrand is not finite at node " +
                              point_string(x));
    A.noalias() += (prob * v) * (g * g.transpose());
}

}  // namespace

MomentMatrix moment_matrix(const GlmModel& model, const Measure& measure,
                           const Quadrature& quad) {
    check_compatible(measure, quad);
    if (measure.dim() != model.dim())
        throw DimensionError("measure dimension " + std::to_string(measure.dim()) +
                             " does not match model dimension " +
                             std::to_string(model.dim()));
    const int l = model.size();
    const int d = model.dim();
    Matrix A = Matrix::Zero(l, l);

    switch (quad.method) {
        case QuadKind::ExactDiscrete: {
            for (int i = 0; i < measure.atom_points.rows(); ++i)
                accumulate(model, measure.atom_points.row(i).transpose(),
                           measure.atom_probs[i], A);
            break;
        }
        case QuadKind::GaussLegendreTensor: {
            std::vector<double> nodes, weights;
            gauss_legendre_rule(quad.nodes_per_axis, nodes, weights);
            const Box& box = measure.box;
            const int m = quad.nodes_per_axis;
            // Tensor product over axes; GL weights on [a,b] sum to b-a, so
            // dividing the product by the box volume yields the uniform
            // probability normalization.
            const double inv_vol = 1.0 / box.volume();
            std::vector<int> idx(static_cast<std::size_t>(d), 0);
            Vector x(d);
            while (true) {
                double w = inv_vol;
                for (int j = 0; j < d; ++j) {
                    const int k = idx[static_cast<std::size_t>(j)];
                    const double half = 0.5 * (box.upper[j] - box.lower[j]);
                    x[j] = box.lower[j] + half * (nodes[static_cast<std::size_t>(k)] + 1.0);
                    w *= half * weights[static_cast<std::size_t>(k)];
                }
                accumulate(model, x, w, A);
                int j = d - 1;
                while (j >= 0 && ++idx[static_cast<std::size_t>(j)] == m) {
                    idx[static_cast<std::size_t>(j)] = 0;
                    --j;
                }
                if (j < 0) break;
            }
            break;
        }
        case QuadKind::QmcSobol: {
            const Matrix pts = sobol_points(d, quad.n_points, measure.box);
            const double w = 1.0 / quad.n_points;
            for (int i = 0; i < pts.rows(); ++i)
                accumulate(model, pts.row(i).transpose(), w, A);
            break;
        }
    }

    MomentMatrix out;
    out.A = 0.5 * (A + A.transpose());
    out.measure = measure;
    out.quadrature = quad;
    Eigen::SelfAdjointEigenSolver<Matrix> es(out.A, Eigen::EigenvaluesOnly);
    out.eigmin = es.eigenvalues().minCoeff();
    const double scale = out.A.cwiseAbs().maxCoeff();
    out.positive_definite = out.eigmin > 1e-10 * scale;
    return out;
}

bool is_positive_definite(const MomentMatrix& A) { return A.positive_definite; }

OrthogonalizedBasis orthogonalize_basis(const GlmModel& model, const Measure& measure,
                                        const Quadrature& quad) {
    const MomentMatrix mm = moment_matrix(model, measure, quad);
    const int l = model.size();
    const Matrix& A = mm.A;
    if (!(A.cwiseAbs().maxCoeff() > 0.0))
        throw DependentBasisError("moment matrix is zero; basis cannot be orthogonalized", 0);

    // Modified Gram-Schmidt in coefficient space: rows of T are the new
    // functions expressed in the old ones, <u,v> = u' A v.
    Matrix T = Matrix::Identity(l, l);
    Vector norms(l);
    const double pivot_floor = 1e-12 * A(0, 0);
    for (int i = 0; i < l; ++i) {
        Vector ti = T.row(i).transpose();
        for (int k = 0; k < i; ++k) {
            const Vector tk = T.row(k).transpose();
            const double proj = tk.dot(A * ti) / norms[k];
            ti -= proj * tk;
        }
        const double nrm = ti.dot(A * ti);
        if (!(nrm > pivot_floor))
            throw DependentBasisError(
                "basis term " + std::to_string(i + 1) + " (" + model.basis.term_name(i) +
                    ") is numerically dependent on the preceding terms under this measure",
                i);
        T.row(i) = ti.transpose();
        norms[i] = nrm;
    }

    // Keep the linear predictor unchanged: T' beta_new = beta.
    const Vector beta_new =
        T.transpose().triangularView<Eigen::Upper>().solve(model.beta);
    OrthogonalizedBasis out{
        GlmModel(model.basis.with_transform(T), model.link, beta_new, model.domain), T};
    return out;
}

}  // namespace eidesign
