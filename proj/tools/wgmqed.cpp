// wgmqed - command-line front end
//
//   wgmqed run <config.json>
//   wgmqed print-defaults        (also: wgmqed --print-defaults)
//   wgmqed export-tables [--out DIR]
//
// Exit codes: 0 success, 2 config error, 3 solver error, 1 anything else.

#include <iostream>

#include "CLI11.hpp"

#include "wgmqed/cli/config.hpp"
#include "wgmqed/cli/run.hpp"

namespace {

enum Exit { ok = 0, other = 1, config_error = 2, solver_error = 3 };

int run_config(const std::string& path) {
    std::string scenario = "?";
    try {
        const auto rc = wgm::cli::load_run_config(path);
        scenario = rc.scenario;
        const auto report = wgm::cli::run(rc);
        std::cout << report.summary << " [config " << rc.hash << "]\n";
        return ok;
    } catch (const wgm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const wgm::DomainError& e) {
        std::cerr << "config error: scenario " << scenario << ": " << e.what() << "\n";
        return config_error;
    } catch (const wgm::SolverError& e) {
        std::cerr << "solver error: scenario " << scenario << ": " << e.what() << "\n";
        return solver_error;
    } catch (const wgm::FitError& e) {
        std::cerr << "solver error: scenario " << scenario << ": " << e.what() << "\n";
        return solver_error;
    } catch (const wgm::CapacityError& e) {
        std::cerr << "solver error: scenario " << scenario << ": " << e.what() << "\n";
        return solver_error;
    } catch (const std::exception& e) {
        std::cerr << "error: scenario " << scenario << ": " << e.what() << "\n";
        return other;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Atom - whispering-gallery-mode resonator simulations"};
    app.require_subcommand(0, 1);
    bool defaults_flag = false;
    app.add_flag("--print-defaults", defaults_flag, "Print the default configuration and exit");

    auto* run = app.add_subcommand("run", "Execute the scenario described by a JSON config");
    std::string config_path;
    run->add_option("config", config_path, "Config file")->required();

    auto* defaults = app.add_subcommand("print-defaults", "Print the default configuration");

    auto* tables = app.add_subcommand("export-tables", "Write transition, Lande and overlap tables as CSV");
    std::string out_dir;
    tables->add_option("--out", out_dir, "Output directory (default: $WGMQED_OUTPUT_DIR or .)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    if (defaults_flag || defaults->parsed()) {
        std::cout << wgm::cli::default_config().dump(2) << "\n";
        return ok;
    }
    if (run->parsed())
        return run_config(config_path);
    if (tables->parsed()) {
        try {
            const auto dir = out_dir.empty() ? wgm::cli::output_directory(".") : std::filesystem::path(out_dir);
            for (const auto& f : wgm::cli::export_reference_tables(dir))
                std::cout << f.string() << "\n";
            return ok;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return other;
        }
    }
    std::cout << app.help();
    return config_error;
}
