#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "eidesign/config.hpp"

using namespace eidesign;
namespace fs = std::filesystem;

namespace {

const char* kExample2a = R"({
  "model": {
    "link": "logit",
    "basis": {"kind": "intercept-plus-linear"},
    "beta": [0.2, 1.6],
    "domain": {"lower": [-1], "upper": [1]}
  },
  "measure": {"kind": "uniform-box", "lower": [-1], "upper": [1]},
  "criterion": {"kind": "ei"},
  "pool": {"kind": "grid", "levels_per_axis": 101},
  "algorithm": {"seed": 9}
})";

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("eidesign_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static inline int counter = 0;
};

}  // namespace

TEST_SUITE("config") {

TEST_CASE("valid logistic config parses") {
    const ProblemConfig cfg = parse_config(kExample2a);
    CHECK(cfg.link == LinkKind::Logit);
    CHECK(cfg.criterion == CriterionKind::EI);
    CHECK(cfg.pool_levels_per_axis == 101);
    CHECK(cfg.seed == 9);
    const GlmModel m = cfg.make_model();
    CHECK(m.size() == 2);
    CHECK(cfg.make_pool(m).size() == 101);
}

TEST_CASE("beta/basis length mismatch names both fields") {
    std::string text = kExample2a;
    const auto pos = text.find("[0.2, 1.6]");
    text.replace(pos, 10, "[0.2, 1.6, 3.0]");
    try {
        parse_config(text);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("beta") != std::string::npos);
        CHECK(msg.find("basis") != std::string::npos);
    }
}

TEST_CASE("discrete measure probabilities must sum to one") {
    const char* text = R"({
      "model": {"link": "logit", "basis": {"kind": "intercept-plus-linear"},
                "beta": [0, 1], "domain": {"lower": [-1], "upper": [1]}},
      "measure": {"kind": "discrete",
                  "atoms": [{"point": [0.0], "prob": 0.5}, {"point": [0.5], "prob": 0.4}]},
      "criterion": {"kind": "ei"},
      "pool": {"kind": "grid", "levels_per_axis": 11}
    })";
    CHECK_THROWS_WITH_AS(parse_config(text), doctest::Contains("measure"), ConfigError);
}

TEST_CASE("unknown keys are errors with their path") {
    std::string text = kExample2a;
    text.insert(text.rfind('}'), R"(, "extra_key": 1)");
    CHECK_THROWS_WITH_AS(parse_config(text), doctest::Contains("extra_key"), ConfigError);

    const char* nested = R"({
      "model": {"link": "logit", "basis": {"kind": "intercept-plus-linear"},
                "beta": [0, 1], "domain": {"lower": [-1], "upper": [1]},
                "typo_field": true},
      "criterion": {"kind": "d"},
      "pool": {"kind": "grid", "levels_per_axis": 11}
    })";
    CHECK_THROWS_WITH_AS(parse_config(nested), doctest::Contains("model.typo_field"),
                         ConfigError);
}

TEST_CASE("parse errors carry line and column") {
    CHECK_THROWS_WITH_AS(parse_config("{\n  \"model\": [,]\n}"),
                         doctest::Contains("line 2"), ConfigError);
}

TEST_CASE("ei requires a measure") {
    const char* text = R"({
      "model": {"link": "logit", "basis": {"kind": "intercept-plus-linear"},
                "beta": [0, 1], "domain": {"lower": [-1], "upper": [1]}},
      "criterion": {"kind": "ei"},
      "pool": {"kind": "grid", "levels_per_axis": 11}
    })";
    CHECK_THROWS_WITH_AS(parse_config(text), doctest::Contains("measure"), ConfigError);
}

TEST_CASE("emit and reparse gives an equal config") {
    const ProblemConfig cfg = parse_config(kExample2a);
    const std::string emitted = emit_config(cfg);
    const ProblemConfig back = parse_config(emitted);
    CHECK(back == cfg);
    // Idempotent canonical form.
    CHECK(emit_config(back) == emitted);
}

TEST_CASE("run writes the artifacts and certifies") {
    TempDir tmp;
    const ProblemConfig cfg = parse_config(kExample2a);
    std::ostringstream log;
    const RunReport report = run_problem(cfg, (tmp.path / "out").string(), true, log);
    CHECK(report.exit_status() == 0);
    CHECK(report.converged);
    CHECK(report.equivalence_gap <= report.gap_tolerance);
    CHECK(fs::exists(tmp.path / "out" / "design.csv"));
    CHECK(fs::exists(tmp.path / "out" / "report.txt"));
    CHECK(fs::exists(tmp.path / "out" / "convergence.csv"));
    CHECK(fs::exists(tmp.path / "out" / "config_echo.json"));

    // The design file parses back into a valid design.
    const Design d = read_design_csv_file((tmp.path / "out" / "design.csv").string());
    CHECK(d.weights.sum() == doctest::Approx(1.0).epsilon(1e-15));

    // The echoed config parses to the same config.
    const ProblemConfig echo = parse_config(slurp(tmp.path / "out" / "config_echo.json"));
    CHECK(echo == cfg);

    // The report file carries the deterministic fields.
    const std::string rep = slurp(tmp.path / "out" / "report.txt");
    CHECK(rep.find("converged: true") != std::string::npos);
    CHECK(rep.find("criterion: ei") != std::string::npos);
    CHECK(rep.find("wall") == std::string::npos);
}

TEST_CASE("identical config and seed give byte-identical outputs") {
    TempDir tmp;
    const ProblemConfig cfg = parse_config(kExample2a);
    std::ostringstream log;
    run_problem(cfg, (tmp.path / "a").string(), true, log);
    run_problem(cfg, (tmp.path / "b").string(), true, log);
    CHECK(slurp(tmp.path / "a" / "design.csv") == slurp(tmp.path / "b" / "design.csv"));
    CHECK(slurp(tmp.path / "a" / "report.txt") == slurp(tmp.path / "b" / "report.txt"));
    CHECK(slurp(tmp.path / "a" / "convergence.csv") ==
          slurp(tmp.path / "b" / "convergence.csv"));
    CHECK(slurp(tmp.path / "a" / "config_echo.json") ==
          slurp(tmp.path / "b" / "config_echo.json"));
}

TEST_CASE("phi profile is written for d <= 2 unless quiet") {
    TempDir tmp;
    const ProblemConfig cfg = parse_config(kExample2a);
    std::ostringstream log;
    run_problem(cfg, (tmp.path / "loud").string(), false, log);
    CHECK(fs::exists(tmp.path / "loud" / "phi_profile.csv"));
    run_problem(cfg, (tmp.path / "quiet").string(), true, log);
    CHECK_FALSE(fs::exists(tmp.path / "quiet" / "phi_profile.csv"));
    // First line is the header; rows cover the pool.
    std::ifstream is(tmp.path / "loud" / "phi_profile.csv");
    std::string header;
    std::getline(is, header);
    CHECK(header == "x1,phi");
}

TEST_CASE("weights-only mode optimizes a fixed support") {
    TempDir tmp;
    {
        std::ofstream pts(tmp.path / "points.csv");
        pts << "x1,weight\n-1,0.25\n0.1,0.25\n1,0.5\n";
    }
    std::string text = R"({
      "model": {"link": "logit", "basis": {"kind": "intercept-plus-linear"},
                "beta": [0.2, 1.6], "domain": {"lower": [-1], "upper": [1]}},
      "measure": {"kind": "uniform-box", "lower": [-1], "upper": [1]},
      "criterion": {"kind": "ei"},
      "mode": "weights-only",
      "points_file": "points.csv"
    })";
    const ProblemConfig cfg = parse_config(text, tmp.path.string());
    std::ostringstream log;
    const RunReport report = run_problem(cfg, (tmp.path / "out").string(), true, log);
    CHECK(report.converged);
    CHECK(report.exit_status() == 0);
    const Design d = read_design_csv_file((tmp.path / "out" / "design.csv").string());
    CHECK(d.size() <= 3);
}

TEST_CASE("sobol pool config round-trips and runs") {
    TempDir tmp;
    const char* text = R"({
      "model": {"link": "logit", "basis": {"kind": "intercept-plus-linear"},
                "beta": [0.3, 0.8, -0.5], "domain": {"lower": [-1, -1], "upper": [1, 1]}},
      "measure": {"kind": "uniform-box", "lower": [-1, -1], "upper": [1, 1]},
      "criterion": {"kind": "ei"},
      "pool": {"kind": "sobol", "points": 256, "skip": 1},
      "algorithm": {"seed": 2}
    })";
    const ProblemConfig cfg = parse_config(text);
    CHECK(cfg.pool_kind == PoolKind::Sobol);
    CHECK(parse_config(emit_config(cfg)) == cfg);
    std::ostringstream log;
    const RunReport report = run_problem(cfg, (tmp.path / "out").string(), true, log);
    CHECK(report.exit_status() == 0);
}

TEST_CASE("weights-only certification uses the pool when configured") {
    TempDir tmp;
    {
        std::ofstream pts(tmp.path / "points.csv");
        // Deliberately suboptimal support: the pool scan must expose it.
        pts << "x1,weight\n-0.1,0.5\n0.2,0.5\n";
    }
    std::string text = R"({
      "model": {"link": "logit", "basis": {"kind": "intercept-plus-linear"},
                "beta": [0.2, 1.6], "domain": {"lower": [-1], "upper": [1]}},
      "measure": {"kind": "uniform-box", "lower": [-1], "upper": [1]},
      "criterion": {"kind": "ei"},
      "pool": {"kind": "grid", "levels_per_axis": 101},
      "mode": "weights-only",
      "points_file": "points.csv"
    })";
    const ProblemConfig cfg = parse_config(text, tmp.path.string());
    std::ostringstream log;
    const RunReport report = run_problem(cfg, (tmp.path / "out").string(), true, log);
    // Weights converge on the fixed support, but better pool points exist,
    // so the run reports a gap and does not certify.
    CHECK(report.converged);
    CHECK(report.equivalence_gap > report.gap_tolerance);
    CHECK(report.exit_status() == 2);
}

TEST_CASE("unwritable output directory is an I/O error") {
    const ProblemConfig cfg = parse_config(kExample2a);
    std::ostringstream log;
    CHECK_THROWS_AS(run_problem(cfg, "/proc/definitely/not/writable", true, log), IoError);
}

TEST_CASE("five-term response surface config runs to exit 0") {
    TempDir tmp;
    const char* text = R"({
      "model": {"link": "identity",
                "basis": {"kind": "terms", "terms": [[0,0],[1,0],[2,0],[0,1],[1,1]]},
                "beta": [0, 0, 0, 0, 0],
                "domain": {"lower": [-1, 0], "upper": [1, 1]}},
      "criterion": {"kind": "phi-p", "p": 1},
      "pool": {"kind": "grid", "levels_per_axis": 21},
      "algorithm": {"seed": 4}
    })";
    const ProblemConfig cfg = parse_config(text);
    CHECK(cfg.make_model().size() == 5);
    std::ostringstream log;
    const RunReport report = run_problem(cfg, (tmp.path / "out").string(), true, log);
    CHECK(report.exit_status() == 0);
}

TEST_CASE("b_file drives a phi-p criterion") {
    TempDir tmp;
    {
        std::ofstream b(tmp.path / "B.csv");
        b << "1,0\n0,1\n";
    }
    std::string text = R"({
      "model": {"link": "identity", "basis": {"kind": "intercept-plus-linear"},
                "beta": [0, 0], "domain": {"lower": [-1], "upper": [1]}},
      "criterion": {"kind": "phi-p", "p": 1, "b_file": "B.csv"},
      "pool": {"kind": "grid", "levels_per_axis": 3},
      "algorithm": {"seed": 1}
    })";
    const ProblemConfig cfg = parse_config(text, tmp.path.string());
    std::ostringstream log;
    const RunReport report = run_problem(cfg, (tmp.path / "out").string(), true, log);
    CHECK(report.exit_status() == 0);
    // A-optimal design for the identity-link line: equal weights at +-1.
    REQUIRE(report.design.size() == 2);
    CHECK(report.design.weights[0] == doctest::Approx(0.5).epsilon(1e-6));
}

}  // TEST_SUITE
