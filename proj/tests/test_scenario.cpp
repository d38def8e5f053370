#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kvn/analysis.hpp"
#include "kvn/scenario.hpp"
#include "kvn/snapshot.hpp"

using namespace kvn;

namespace {

std::string small_free_config(const std::string& extra = "") {
    return R"({
      "name": "t_free",
      "grid": {"config_dim": 1, "points": [64, 64],
               "position_extent": [[-10.0, 10.0]], "velocity_extent": [[-6.0, 6.0]]},
      "initial": {"center": [0.0, 2.0], "sigma": [0.5, 0.4]},
      "dynamics": {"kind": "free"},
      "backend": {"type": "splitstep", "dt": 0.01},
      "t_final": 1.0,
      "snapshot_cadence": 10,
      "output_dir": "TMPDIR"
    )" + extra + "}";
}

std::string with_output_dir(std::string cfg, const std::string& dir) {
    const auto pos = cfg.find("TMPDIR");
    cfg.replace(pos, 6, dir);
    return cfg;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(KVN_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("scenario validation names the offending field") {
    auto expect_error_with = [&](const std::string& json_text, const std::string& needle) {
        try {
            parse_scenario_json(json_text);
            FAIL("expected ConfigError for ", needle);
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    // dt <= 0 names dt
    std::string bad_dt = small_free_config();
    bad_dt = with_output_dir(bad_dt, "/tmp/kvn_never");
    auto pos = bad_dt.find("\"dt\": 0.01");
    bad_dt.replace(pos, 10, "\"dt\": -0.5");
    expect_error_with(bad_dt, "dt");

    // unknown force builtin
    expect_error_with(R"({
      "name": "bad",
      "grid": {"config_dim": 1, "points": [64, 64],
               "position_extent": [[-5, 5]], "velocity_extent": [[-5, 5]]},
      "initial": {"center": [0, 0], "sigma": [0.5, 0.5]},
      "dynamics": {"kind": "forced", "force": {"builtin": "warp_drive", "k": 1}},
      "backend": {"type": "splitstep", "dt": 0.01},
      "t_final": 1.0})",
                      "warp_drive");

    // missing grid field
    expect_error_with(R"({"name": "bad", "initial": {}, "dynamics": {}, "backend": {}, "t_final": 1})",
                      "grid");

    // t_final not a multiple of dt
    std::string bad_t = with_output_dir(small_free_config(), "/tmp/kvn_never");
    pos = bad_t.find("\"t_final\": 1.0");
    bad_t.replace(pos, 14, "\"t_final\": 1.005");
    expect_error_with(bad_t, "t_final");

    // velocity-dependent force under splitstep
    expect_error_with(R"({
      "name": "bad",
      "grid": {"config_dim": 1, "points": [64, 64],
               "position_extent": [[-5, 5]], "velocity_extent": [[-5, 5]]},
      "initial": {"center": [0, 0], "sigma": [0.5, 0.5]},
      "dynamics": {"kind": "forced", "force": {"builtin": "linear_drag", "gamma": 0.2}},
      "backend": {"type": "splitstep", "dt": 0.01},
      "t_final": 1.0})",
                      "semilagrangian");
}

TEST_CASE("run_scenario writes series, snapshots, and a manifest") {
    const std::string dir = "/tmp/kvn_test_run";
    std::filesystem::remove_all(dir);
    auto sc = parse_scenario_json(with_output_dir(small_free_config(), dir));
    auto art = run_scenario(sc);

    CHECK(std::filesystem::exists(dir + "/series.csv"));
    CHECK(std::filesystem::exists(dir + "/state_initial.kvnf"));
    CHECK(std::filesystem::exists(dir + "/state_final.kvnf"));
    CHECK(std::filesystem::exists(dir + "/manifest.json"));
    CHECK(std::abs(art.norm_final - art.norm_initial) < 1e-12);
    CHECK(art.series.size() == 11);  // t = 0 plus every 10th of 100 steps

    // free particle: centroid moved by v0 * t
    const auto& last = art.series.samples.back();
    CHECK(std::abs(last.t - 1.0) < 1e-12);
    CHECK(std::abs(last.mean_pos[0] - 2.0) < 1e-6);
    CHECK(std::abs(last.mean_vel[0] - 2.0) < 1e-8);

    // snapshot round trip preserves the state exactly
    auto final_state = read_snapshot(dir + "/state_final.kvnf");
    CHECK(final_state.grid->axis(0).n == 64);
    auto initial = read_snapshot(dir + "/state_initial.kvnf");
    auto fresh = initial_state(sc);
    CHECK(linf_diff(initial, fresh) == 0.0);

    // ehrenfest residuals on the series
    auto res = ehrenfest_residual(art.series, sc.masses);
    CHECK(res.position_rule < 1e-6);
    CHECK(res.force_rule < 1e-10);
}

TEST_CASE("snapshot rejects corrupted headers") {
    const std::string path = "/tmp/kvn_bad_snapshot.kvnf";
    {
        std::ofstream os(path, std::ios::binary);
        os << "NOPE" << std::string(64, '\0');
    }
    CHECK_THROWS_AS(read_snapshot(path), ConfigError);
}

TEST_CASE("momentum-representation snapshot keeps its tag") {
    auto g = make_grid_1d(32, 32, {-5.0, 5.0}, {-5.0, 5.0});
    auto pg = g->momentum_relabel(1.0);
    auto phi = gaussian_packet(pg, {0.0, 0.0}, {0.7, 0.7});
    const std::string path = "/tmp/kvn_momentum.kvnf";
    write_snapshot(path, phi);
    auto back = read_snapshot(path);
    CHECK(back.grid->representation() == Representation::momentum);
    CHECK(back.grid->axis(1).name == "px");
    CHECK(linf_diff(back, phi) == 0.0);
}

TEST_CASE("expectation rejects unnormalized states") {
    auto g = make_grid_1d(32, 32, {-5.0, 5.0}, {-5.0, 5.0});
    auto psi = gaussian_packet(g, {0.0, 0.0}, {0.6, 0.6});
    scale(psi, cplx{1.5, 0.0});
    CHECK_THROWS_AS(expectation_coord(psi, "x"), NumericsError);
}

TEST_CASE("klimontovich deviation against the oracle (harmonic, short run)") {
    GridSpec gs;
    gs.config_dim = 1;
    gs.points_per_axis = {128, 128};
    gs.position_extent = {{-1.0, 1.0}};
    gs.velocity_extent = {{-1.0, 1.0}};
    auto g = build_grid(gs);
    const double sigma = 0.05;
    auto psi = gaussian_packet(g, {0.5, 0.0}, {sigma, sigma});
    auto spec = forced_liouvillian(g, quadratic_force(1, 1.0), 1.0);

    ObservableSeries series;
    series.append(sample_observables(psi, spec));
    PropagatorConfig cfg;
    cfg.dt = 1e-3;
    cfg.n_steps = 1000;
    evolve_splitstep(psi, spec, cfg, [&](const WaveField& f, std::size_t step) {
        if (step % 100 == 0) series.append(sample_observables(f, spec));
    });

    auto oracle = flow_oracle(flow_from_liouvillian(spec), {0.5, 0.0}, 1.0, 1e-3);
    auto rep = klimontovich_deviation("harmonic", sigma, series, oracle);
    CHECK(rep.max_dev < 5e-4);
    CHECK(rep.series.size() == series.size());
}

TEST_CASE("bundled projectile scenario reproduces the closed-form drop") {
    const std::string dir = "/tmp/kvn_test_projectile";
    std::filesystem::remove_all(dir);
    auto sc = load_scenario_file(std::string(KVN_SCENARIO_DIR) + "/projectile.json");
    sc.output_dir = dir;
    auto art = run_scenario(sc);
    const auto& last = art.series.samples.back();
    // <Y>(1) = y0 + v0 t - g t^2 / 2 = 2 - 4.9
    CHECK(std::abs(last.mean_pos[0] - (2.0 - 4.9)) < 1e-4);
    CHECK(std::abs(art.norm_final - art.norm_initial) < 1e-12);

    // the CSV carries the oracle trajectory columns and matches at t = 1
    std::ifstream is(dir + "/series.csv");
    std::string header;
    std::getline(is, header);
    CHECK(header == "t,x,vx,norm,mean_x,mean_vx");
}

TEST_CASE("cli exit codes: validation failure, missing file, broken-lambda verify") {
    CHECK(run_cli("run /tmp/definitely_missing_config.json") == 2);

    const std::string bad = "/tmp/kvn_bad_config.json";
    {
        std::ofstream os(bad);
        os << R"({"name": "x", "grid": {"config_dim": 1, "points": [64, 64],
                 "position_extent": [[-5, 5]], "velocity_extent": [[-5, 5]]},
                 "initial": {"center": [0, 0], "sigma": [0.5, 0.5]},
                 "dynamics": {"kind": "free"},
                 "backend": {"type": "splitstep", "dt": -1.0}, "t_final": 1.0})";
    }
    CHECK(run_cli("run " + bad) == 2);

    // deliberately broken shift-generator sign makes verify fail (exit 1)
    CHECK(run_cli("verify --grid 16 --break-lambda-sign --out /tmp/kvn_verify_broken") == 1);

    // the diagnostic CSV exists and pinpoints the broken identity
    std::ifstream csv("/tmp/kvn_verify_broken/verify.csv");
    REQUIRE(csv.good());
    std::string line;
    bool found_fail = false;
    while (std::getline(csv, line))
        if (line.find("op.X_lambdax_diag") != std::string::npos && line.find("fail") != std::string::npos)
            found_fail = true;
    CHECK(found_fail);
}

TEST_CASE("cli verify passes on a healthy 32-point grid") {
    CHECK(run_cli("verify --grid 32 --out /tmp/kvn_verify_ok") == 0);
    std::ifstream csv("/tmp/kvn_verify_ok/verify.csv");
    REQUIRE(csv.good());
    std::string header;
    std::getline(csv, header);
    CHECK(header == "identity_id,state_index,residual,tolerance,status");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(csv, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 36 * 5);
}

TEST_CASE("scenario runs are reproducible bit-for-bit") {
    const std::string dir1 = "/tmp/kvn_repro1", dir2 = "/tmp/kvn_repro2";
    std::filesystem::remove_all(dir1);
    std::filesystem::remove_all(dir2);
    auto sc = parse_scenario_json(with_output_dir(small_free_config(), dir1));
    run_scenario(sc);
    sc.output_dir = dir2;
    run_scenario(sc);
    std::ifstream a(dir1 + "/series.csv"), b(dir2 + "/series.csv");
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
}

TEST_CASE("KVN_OUT_DIR is the output-directory fallback") {
    std::filesystem::remove_all("/tmp/kvn_envtest");
    const std::string cfg = "/tmp/kvn_env_config.json";
    {
        std::ofstream os(cfg);
        os << R"({"name": "envrun", "grid": {"config_dim": 1, "points": [64, 64],
                 "position_extent": [[-10, 10]], "velocity_extent": [[-6, 6]]},
                 "initial": {"center": [0, 2], "sigma": [0.5, 0.4]},
                 "dynamics": {"kind": "free"},
                 "backend": {"type": "splitstep", "dt": 0.01}, "t_final": 0.1})";
    }
    const std::string cmd = std::string("KVN_OUT_DIR=/tmp/kvn_envtest ") + KVN_CLI_PATH +
                            " --quiet run " + cfg + " > /dev/null 2>&1";
    CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    CHECK(std::filesystem::exists("/tmp/kvn_envtest/envrun/series.csv"));
}

TEST_CASE("verify results agree across thread counts") {
    CHECK(run_cli("--threads 1 verify --grid 16 --out /tmp/kvn_t1") == 1);  // coarse grid: rows fail
    CHECK(run_cli("--threads 3 verify --grid 16 --out /tmp/kvn_t3") == 1);
    std::ifstream a("/tmp/kvn_t1/verify.csv"), b("/tmp/kvn_t3/verify.csv");
    REQUIRE(a.good());
    REQUIRE(b.good());
    // fixed-chunk reductions and per-line transforms make the suite
    // deterministic regardless of worker count
    std::string la, lb;
    std::size_t rows = 0;
    while (std::getline(a, la) && std::getline(b, lb)) {
        CHECK(la == lb);
        ++rows;
    }
    CHECK(rows == 181);  // header + 36 identities x 5 states
}
