#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "eidesign/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Locally optimal experimental designs for generalized linear models"};
    std::string config_path;
    std::string out_dir;
    std::int64_t seed = -1;
    bool quiet = false;
    app.add_option("--config", config_path, "Problem configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output directory")->required();
    app.add_option("--seed", seed, "Override the configured RNG seed");
    app.add_flag("--quiet", quiet, "Suppress console output and the phi profile");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        eidesign::ProblemConfig cfg = eidesign::parse_config_file(config_path);
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        const eidesign::RunReport report =
            eidesign::run_problem(cfg, out_dir, quiet, std::cout);
        return report.exit_status();
    } catch (const eidesign::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
