#ifndef EIDESIGN_CONFIG_HPP
#define EIDESIGN_CONFIG_HPP

#include <iosfwd>
#include <optional>
#include <string>

#include "eidesign/sequential.hpp"

namespace eidesign {

inline constexpr const char* kLibraryVersion = "0.1.0";

enum class RunMode { Sequential, WeightsOnly };
enum class PhiProfileMode { Auto, Always, Never };

// A fully validated problem description, parsed from the JSON config
// documented in the README. Field paths in error messages follow the
// JSON structure.
struct ProblemConfig {
    // model
    LinkKind link = LinkKind::Identity;
    double sigma = 1.0;
    BasisKind basis_kind = BasisKind::InterceptPlusLinear;
    int poly_degree = 1;
    std::vector<std::vector<int>> basis_terms;  // ExplicitTerms
    Vector beta;
    Box domain;

    // measure (required for the EI criterion)
    std::optional<Measure> measure;

    // criterion
    CriterionKind criterion = CriterionKind::EI;
    double phi_p = 1.0;
    std::optional<Matrix> phi_b;  // loaded from b_file; identity when absent
    std::string b_file;

    // quadrature
    bool quad_auto = true;
    Quadrature quadrature;

    // pool
    std::optional<PoolKind> pool_kind;
    int pool_levels_per_axis = 0;  // grid
    int pool_points = 0;           // sobol
    std::uint64_t pool_skip = 1;   // sobol
    std::string pool_file;         // explicit
    std::optional<Matrix> pool_explicit_points;

    // algorithm
    double delta = 0.0;  // 0 = criterion default
    double epsilon_rel = 1e-6;
    double weight_tol = 1e-10;
    double weight_gap_target = 1e-7;
    int max_weight_iters = 200000;
    double prune_threshold = 1e-8;
    int max_rounds = 500;
    double gap_tolerance_rel = 1e-4;
    std::uint64_t seed = 0;
    bool refine_pool = false;

    RunMode mode = RunMode::Sequential;
    std::string points_file;  // weights-only
    std::optional<Design> start_design;

    PhiProfileMode phi_profile = PhiProfileMode::Auto;

    bool operator==(const ProblemConfig&) const;

    // Derived objects.
    GlmModel make_model() const;
    CriterionSpec make_criterion(const GlmModel& model) const;
    Quadrature make_quadrature(const GlmModel& model) const;
    CandidatePool make_pool(const GlmModel& model) const;
    SeqConfig make_seq_config() const;
};

// Parses and validates the JSON text. Unknown keys are errors; file
// references (b_file, points_file, pool file) resolve against base_dir.
ProblemConfig parse_config(const std::string& text, const std::string& base_dir = ".");
ProblemConfig parse_config_file(const std::string& path);

// Canonical JSON for the config with every default made explicit;
// parse(emit(c)) == c.
std::string emit_config(const ProblemConfig& cfg);

struct RunReport {
    Design design;
    bool converged = false;
    RunMode mode = RunMode::Sequential;
    std::string criterion_name;
    double criterion_value = 0.0;
    double threshold = 0.0;
    double equivalence_gap = 0.0;
    double gap_tolerance = 0.0;
    int rounds = 0;
    long inner_iterations = 0;
    int merges = 0;
    int refinements = 0;
    std::uint64_t seed = 0;
    std::vector<double> convergence;  // per round (or per inner iteration)
    std::string diagnostics;
    double wall_seconds = 0.0;  // console only; kept out of report.txt

    int exit_status() const;
};

// Runs the configured problem and writes design.csv, report.txt,
// convergence.csv, config_echo.json and (optionally) phi_profile.csv
// into out_dir. Returns the report; exit_status() gives the CLI code
// (0 certified, 2 not converged).
RunReport run_problem(const ProblemConfig& cfg, const std::string& out_dir,
                      bool quiet, std::ostream& log);

}  // namespace eidesign

#endif  // EIDESIGN_CONFIG_HPP
