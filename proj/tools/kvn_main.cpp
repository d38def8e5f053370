#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "kvn/scenario.hpp"
#include "kvn/verify.hpp"

namespace {

int run_command(const std::string& config_path, bool quiet) {
    try {
        kvn::ScenarioConfig sc = kvn::load_scenario_file(config_path);
        kvn::RunArtifacts art = kvn::run_scenario(sc);
        if (!quiet) {
            std::cout << "scenario '" << sc.name << "' finished: " << art.series.size()
                      << " samples, norm drift " << std::abs(art.norm_final - art.norm_initial)
                      << ", wall time " << art.wall_seconds << " s\n"
                      << "artifacts in " << art.out_dir << "\n";
        }
        return 0;
    } catch (const kvn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const kvn::NumericsError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

int verify_command(std::size_t grid_n, const std::string& out_dir, bool quiet, bool break_lambda) {
    try {
        kvn::VerifyOptions opts;
        opts.grid_points = grid_n;
        if (break_lambda) opts.lambda_sign = -1.0;
        kvn::VerifyReport rep = kvn::run_verify_suite(opts);

        std::string dir = out_dir;
        if (dir.empty()) {
            if (const char* env = std::getenv("KVN_OUT_DIR")) dir = env;
        }
        if (dir.empty()) dir = ".";
        std::filesystem::create_directories(dir);
        const std::string csv_path = dir + "/verify.csv";
        std::ofstream os(csv_path);
        kvn::write_verify_csv(os, rep);

        std::size_t failures = 0;
        for (const auto& r : rep.rows)
            if (!r.pass) ++failures;
        if (!quiet) {
            std::cout << rep.n_identities << " identities x " << rep.rows.size() / rep.n_identities
                      << " states: " << rep.rows.size() - failures << "/" << rep.rows.size()
                      << " rows passed in " << rep.runtime_seconds << " s\n"
                      << "residuals written to " << csv_path << "\n";
            for (const auto& r : rep.rows)
                if (!r.pass)
                    std::cout << "FAIL " << r.id << " state " << r.state_index << ": residual "
                              << r.residual << " > " << r.tolerance << "\n";
        }
        return rep.all_pass ? 0 : 1;
    } catch (const kvn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const kvn::NumericsError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kvn: operator-formulation classical mechanics engine"};
    app.require_subcommand(1);

    int threads = 1;
    bool quiet = false;
    app.add_option("--threads", threads, "worker threads for grid loops")->capture_default_str();
    app.add_flag("--quiet", quiet, "suppress progress output");

    std::string config_path;
    auto* run = app.add_subcommand("run", "run a scenario config and write its artifacts");
    run->add_option("config", config_path, "scenario JSON path")->required();

    std::size_t grid_n = 64;
    std::string out_dir;
    bool break_lambda = false;
    auto* verify = app.add_subcommand("verify", "run the operator-algebra and Galilei identity suite");
    verify->add_option("--grid", grid_n, "points per axis of the verification grid")
        ->capture_default_str();
    verify->add_option("--out", out_dir, "output directory for verify.csv");
    verify->add_flag("--break-lambda-sign", break_lambda,
                     "testing aid: flip the shift-generator sign to force failures");

    CLI11_PARSE(app, argc, argv);
    kvn::set_worker_count(threads);
    kvn::tune_allocator();

    if (app.got_subcommand("run")) return run_command(config_path, quiet);
    return verify_command(grid_n, out_dir, quiet, break_lambda);
}
