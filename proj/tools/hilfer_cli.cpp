#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hilfer/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Picard solver and stability checker for psi-Hilfer impulsive problems"};
    std::string config_path;
    std::string output_path;
    bool verbose = false;
    app.add_option("--config", config_path, "INI config file")->required();
    app.add_option("--output", output_path, "CSV output path (overrides [run] output)");
    app.add_flag("--verbose", verbose, "progress on stderr");
    CLI11_PARSE(app, argc, argv);

    hilfer::cli::RunConfig cfg;
    try {
        cfg = hilfer::cli::load_config(config_path);
    } catch (const hilfer::cli::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return hilfer::cli::exit_invalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return hilfer::cli::exit_io;
    }
    if (!output_path.empty()) {
        cfg.output_path = output_path;
    }
    return hilfer::cli::run(cfg, std::cout, std::cerr, verbose);
}
