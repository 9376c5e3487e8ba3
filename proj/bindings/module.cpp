#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "eidesign/config.hpp"

namespace py = pybind11;
using namespace eidesign;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Locally optimal experimental designs for generalized linear models";
    m.attr("__version__") = kLibraryVersion;

    py::register_exception<Error>(m, "EidesignError");

    py::class_<Box>(m, "Box")
        .def(py::init<Vector, Vector>(), py::arg("lower"), py::arg("upper"))
        .def_readonly("lower", &Box::lower)
        .def_readonly("upper", &Box::upper)
        .def_property_readonly("dim", &Box::dim)
        .def("volume", &Box::volume)
        .def("contains", &Box::contains, py::arg("x"), py::arg("tol") = 0.0);

    py::class_<Basis>(m, "Basis")
        .def_static("intercept_plus_linear", &Basis::intercept_plus_linear, py::arg("dim"))
        .def_static("full_polynomial", &Basis::full_polynomial, py::arg("dim"),
                    py::arg("degree"))
        .def_static("from_terms", &Basis::from_terms, py::arg("dim"), py::arg("terms"))
        .def_property_readonly("dim", &Basis::dim)
        .def_property_readonly("size", &Basis::size)
        .def_property_readonly("terms", &Basis::terms)
        .def("eval", &Basis::eval, py::arg("x"));

    py::class_<Link>(m, "Link")
        .def_static("logit", &Link::logit)
        .def_static("log", &Link::log)
        .def_static("identity", &Link::identity, py::arg("sigma") = 1.0);

    py::class_<GlmModel>(m, "GlmModel")
        .def(py::init<Basis, Link, Vector, Box>(), py::arg("basis"), py::arg("link"),
             py::arg("beta"), py::arg("domain"))
        .def_readonly("basis", &GlmModel::basis)
        .def_readonly("beta", &GlmModel::beta)
        .def_readonly("domain", &GlmModel::domain)
        .def_property_readonly("dim", &GlmModel::dim)
        .def_property_readonly("size", &GlmModel::size)
        .def("eta", &GlmModel::eta, py::arg("x"));

    m.def("basis_eval", &basis_eval, py::arg("model"), py::arg("x"));
    m.def("glm_weight", &glm_weight, py::arg("model"), py::arg("x"));
    m.def("mean_deriv_sq", &mean_deriv_sq, py::arg("model"), py::arg("x"));

    py::class_<Measure>(m, "Measure")
        .def_static("uniform_box", &Measure::uniform_box, py::arg("box"))
        .def_static("discrete", &Measure::discrete, py::arg("points"), py::arg("probs"))
        .def_static("dirac", &Measure::dirac, py::arg("point"));

    py::class_<Quadrature>(m, "Quadrature")
        .def_static("gauss_legendre", &Quadrature::gauss_legendre, py::arg("nodes_per_axis"))
        .def_static("qmc_sobol", &Quadrature::qmc_sobol, py::arg("n_points"))
        .def_static("exact_discrete", &Quadrature::exact_discrete)
        .def_static("auto_for", &Quadrature::auto_for, py::arg("measure"), py::arg("dim"));

    py::class_<MomentMatrix>(m, "MomentMatrix")
        .def_readonly("A", &MomentMatrix::A)
        .def_readonly("eigmin", &MomentMatrix::eigmin)
        .def_readonly("positive_definite", &MomentMatrix::positive_definite);

    m.def("moment_matrix", &moment_matrix, py::arg("model"), py::arg("measure"),
          py::arg("quadrature"));

    py::class_<OrthogonalizedBasis>(m, "OrthogonalizedBasis")
        .def_readonly("model", &OrthogonalizedBasis::model)
        .def_readonly("transform", &OrthogonalizedBasis::transform);
    m.def("orthogonalize_basis", &orthogonalize_basis, py::arg("model"),
          py::arg("measure"), py::arg("quadrature"));

    py::class_<Design>(m, "Design")
        .def(py::init<Matrix, Vector>(), py::arg("points"), py::arg("weights"))
        .def_static("uniform", &Design::uniform, py::arg("points"))
        .def_readonly("points", &Design::points)
        .def_readonly("weights", &Design::weights)
        .def_property_readonly("size", &Design::size)
        .def_property_readonly("dim", &Design::dim);

    py::class_<CriterionSpec>(m, "CriterionSpec")
        .def_static("ei", &CriterionSpec::ei, py::arg("A"))
        .def_static("phi_p", &CriterionSpec::phi_p, py::arg("p"), py::arg("B"), py::arg("q"))
        .def_static("a_optimality", &CriterionSpec::a_optimality, py::arg("l"))
        .def_static("d_optimality", &CriterionSpec::d_optimality)
        .def_property_readonly("name", &CriterionSpec::name);

    py::class_<InfoMatrix>(m, "InfoMatrix")
        .def_property_readonly("matrix", &InfoMatrix::matrix)
        .def_property_readonly("eigmin", &InfoMatrix::eigmin)
        .def_property_readonly("condition_estimate", &InfoMatrix::condition_estimate)
        .def_property_readonly("singular", &InfoMatrix::singular);

    m.def("fisher_information", &fisher_information, py::arg("design"), py::arg("model"));
    m.def("criterion_value", &criterion_value, py::arg("design"), py::arg("model"),
          py::arg("criterion"));
    m.def("criterion_value_info", &criterion_value_info, py::arg("info"),
          py::arg("criterion"));
    m.def("spd_power", &spd_power, py::arg("M"), py::arg("r"));

    py::class_<WeightOptConfig>(m, "WeightOptConfig")
        .def(py::init<>())
        .def_readwrite("delta", &WeightOptConfig::delta)
        .def_readwrite("tol", &WeightOptConfig::tol)
        .def_readwrite("max_iters", &WeightOptConfig::max_iters)
        .def_readwrite("prune_threshold", &WeightOptConfig::prune_threshold)
        .def_readwrite("gap_target", &WeightOptConfig::gap_target);

    py::class_<WeightOptReport>(m, "WeightOptReport")
        .def_readonly("iterations", &WeightOptReport::iterations)
        .def_readonly("criterion_trace", &WeightOptReport::criterion_trace)
        .def_readonly("converged", &WeightOptReport::converged)
        .def_readonly("final_value", &WeightOptReport::final_value)
        .def_readonly("final_gap", &WeightOptReport::final_gap);

    m.def("multiplicative_step", &multiplicative_step, py::arg("design"), py::arg("model"),
          py::arg("criterion"), py::arg("delta"));
    m.def("optimize_weights", &optimize_weights, py::arg("design"), py::arg("model"),
          py::arg("criterion"), py::arg("config") = WeightOptConfig{});
    m.def("weight_optimality_gap", &weight_optimality_gap, py::arg("design"),
          py::arg("model"), py::arg("criterion"), py::arg("prune_threshold") = 1e-8);

    py::class_<CandidatePool>(m, "CandidatePool")
        .def_readonly("points", &CandidatePool::points)
        .def_property_readonly("size", &CandidatePool::size);

    m.def("grid_pool", &grid_pool, py::arg("domain"), py::arg("s"));
    m.def("sobol_pool", &sobol_pool, py::arg("domain"), py::arg("n"), py::arg("skip") = 1);
    m.def("explicit_pool", &explicit_pool, py::arg("domain"), py::arg("points"));

    py::class_<SeqConfig>(m, "SeqConfig")
        .def(py::init<>())
        .def_readwrite("epsilon_rel", &SeqConfig::epsilon_rel)
        .def_readwrite("max_rounds", &SeqConfig::max_rounds)
        .def_readwrite("seed", &SeqConfig::seed)
        .def_readwrite("inner", &SeqConfig::inner)
        .def_readwrite("gap_tolerance_rel", &SeqConfig::gap_tolerance_rel)
        .def_readwrite("refine_pool", &SeqConfig::refine_pool);

    py::class_<SeqReport>(m, "SeqReport")
        .def_readonly("rounds", &SeqReport::rounds)
        .def_readonly("criterion_per_round", &SeqReport::criterion_per_round)
        .def_readonly("added_points", &SeqReport::added_points)
        .def_readonly("final_value", &SeqReport::final_value)
        .def_readonly("final_threshold", &SeqReport::final_threshold)
        .def_readonly("final_equivalence_gap", &SeqReport::final_equivalence_gap)
        .def_readonly("converged", &SeqReport::converged)
        .def_readonly("inner_iterations_total", &SeqReport::inner_iterations_total);

    m.def("point_derivative", &point_derivative, py::arg("x"), py::arg("design"),
          py::arg("model"), py::arg("criterion"));

    py::class_<EquivalenceResult>(m, "EquivalenceResult")
        .def_readonly("max_lhs", &EquivalenceResult::max_lhs)
        .def_readonly("threshold", &EquivalenceResult::threshold)
        .def_readonly("gap", &EquivalenceResult::gap)
        .def_readonly("argmax", &EquivalenceResult::argmax)
        .def_readonly("support_lhs", &EquivalenceResult::support_lhs);

    m.def("equivalence_check", &equivalence_check, py::arg("design"), py::arg("model"),
          py::arg("criterion"), py::arg("pool"));
    m.def("run_sequential", &run_sequential, py::arg("model"), py::arg("criterion"),
          py::arg("pool"), py::arg("config") = SeqConfig{});
}
