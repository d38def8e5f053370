#include "kvn/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "kvn/representation.hpp"
#include "kvn/snapshot.hpp"

namespace kvn {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key, const std::string& ctx) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(ctx + "." + key + ": missing required field");
    return *it;
}

double require_num(const json& j, const char* key, const std::string& ctx) {
    const json& v = require(j, key, ctx);
    if (!v.is_number()) throw ConfigError(ctx + "." + key + ": expected a number");
    return v.get<double>();
}

std::vector<double> num_list(const json& v, const std::string& ctx) {
    if (!v.is_array()) throw ConfigError(ctx + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(ctx + ": expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

GridSpec parse_grid(const json& j) {
    GridSpec s;
    s.config_dim = static_cast<int>(require_num(j, "config_dim", "grid"));
    if (j.contains("layout")) {
        const std::string layout = j.at("layout").get<std::string>();
        if (layout == "two_particle")
            s.layout = GridLayout::two_particle;
        else if (layout != "single")
            throw ConfigError("grid.layout: expected 'single' or 'two_particle'");
    }
    for (const auto& n : require(j, "points", "grid")) {
        if (!n.is_number_unsigned()) throw ConfigError("grid.points: expected positive integers");
        s.points_per_axis.push_back(n.get<std::size_t>());
    }
    auto intervals = [&](const char* key) {
        std::vector<Interval> out;
        for (const auto& e : require(j, key, "grid")) {
            auto v = num_list(e, std::string("grid.") + key);
            if (v.size() != 2) throw ConfigError(std::string("grid.") + key + ": intervals are [min, max]");
            out.push_back({v[0], v[1]});
        }
        return out;
    };
    s.position_extent = intervals("position_extent");
    s.velocity_extent = intervals("velocity_extent");
    if (j.contains("max_points")) s.max_points = j.at("max_points").get<std::size_t>();
    return s;
}

ForceField parse_one_force(const json& j, const ScenarioConfig& sc, const std::string& ctx) {
    const int d = sc.grid_spec.config_dim;
    const std::string b = require(j, "builtin", ctx).get<std::string>();
    if (b == "quadratic") return quadratic_force(d, require_num(j, "k", ctx));
    if (b == "uniform_gravity") {
        const double g = require_num(j, "g", ctx);
        const int axis = j.contains("axis") ? static_cast<int>(j.at("axis").get<double>()) : d - 1;
        ForceField f = uniform_gravity_force(d, g, axis);
        // F = -m g along the gravity axis.
        const double m = sc.masses.at(0);
        for (auto& comp : f.comp)
            comp = [inner = comp, m](const double* c) { return m * inner(c); };
        return f;
    }
    if (b == "uniform_B") {
        if (d != 2) throw ConfigError(ctx + ": uniform_B needs a 2D-config grid");
        return uniform_b_force(require_num(j, "B", ctx));
    }
    if (b == "linear_drag") return linear_drag_force(d, require_num(j, "gamma", ctx));
    if (b == "harmonic_coupling") {
        if (sc.grid_spec.layout != GridLayout::two_particle)
            throw ConfigError(ctx + ": harmonic_coupling needs the two_particle grid layout");
        return harmonic_coupling_force(require_num(j, "k", ctx));
    }
    throw ConfigError(ctx + ".builtin: unknown force builtin '" + b + "'");
}

std::optional<AnalyticScenario> derive_analytic(const json& force_json, const ScenarioConfig& sc) {
    AnalyticScenario a;
    if (sc.kind == LiouvillianSpec::Kind::free) {
        a.kind = AnalyticScenario::Kind::free;
        return a;
    }
    if (!force_json.is_object()) return std::nullopt;  // composite forces have no closed form
    const std::string b = force_json.at("builtin").get<std::string>();
    const int d = sc.grid_spec.config_dim;
    if (b == "uniform_gravity") {
        a.kind = AnalyticScenario::Kind::projectile;
        a.g = force_json.at("g").get<double>();
        a.gravity_axis = force_json.contains("axis") ? static_cast<int>(force_json.at("axis").get<double>())
                                                     : d - 1;
        return a;
    }
    if (b == "quadratic") {
        a.kind = AnalyticScenario::Kind::harmonic;
        a.omega = std::sqrt(force_json.at("k").get<double>() / sc.masses.at(0));
        return a;
    }
    return std::nullopt;
}

PotentialPair parse_potentials(const json& j, int d) {
    PotentialPair p = zero_potentials(d);
    if (j.contains("phi")) {
        const json& pj = j.at("phi");
        const std::string b = require(pj, "builtin", "potentials.phi").get<std::string>();
        if (b == "quadratic")
            p = quadratic_potential(d, require_num(pj, "k", "potentials.phi"));
        else if (b != "zero")
            throw ConfigError("potentials.phi.builtin: unknown potential builtin '" + b + "'");
    }
    if (j.contains("A")) {
        const json& aj = j.at("A");
        const std::string b = require(aj, "builtin", "potentials.A").get<std::string>();
        PotentialPair ap;
        if (b == "uniform_B") {
            if (d != 2) throw ConfigError("potentials.A: uniform_B needs a 2D-config grid");
            ap = uniform_b_potentials(require_num(aj, "B", "potentials.A"));
        } else if (b == "constant") {
            ap = constant_a_potentials(num_list(require(aj, "a", "potentials.A"), "potentials.A.a"));
        } else {
            throw ConfigError("potentials.A.builtin: unknown vector-potential builtin '" + b + "'");
        }
        p.A = ap.A;
        p.dA = ap.dA;
        p.label += "+" + ap.label;
    }
    return p;
}

}  // namespace

ScenarioConfig parse_scenario_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    ScenarioConfig sc;
    sc.config_echo = j.dump(2);
    sc.name = require(j, "name", "config").get<std::string>();
    sc.grid_spec = parse_grid(require(j, "grid", "config"));
    const std::size_t na = sc.grid_spec.points_per_axis.size();

    const json& init = require(j, "initial", "config");
    sc.center = num_list(require(init, "center", "initial"), "initial.center");
    sc.sigma = num_list(require(init, "sigma", "initial"), "initial.sigma");
    if (init.contains("wavevector")) sc.wavevector = num_list(init.at("wavevector"), "initial.wavevector");
    if (sc.center.size() != na || sc.sigma.size() != na)
        throw ConfigError("initial.center/sigma: expected one entry per grid axis");

    const json& dyn = require(j, "dynamics", "config");
    const std::string kind = require(dyn, "kind", "dynamics").get<std::string>();
    if (dyn.contains("masses"))
        sc.masses = num_list(dyn.at("masses"), "dynamics.masses");
    else
        sc.masses = {dyn.contains("mass") ? require_num(dyn, "mass", "dynamics") : 1.0};
    for (double m : sc.masses)
        if (!(m > 0.0)) throw ConfigError("dynamics.mass: masses must be positive");

    if (kind == "free") {
        sc.kind = LiouvillianSpec::Kind::free;
        sc.force = free_force(sc.grid_spec.config_dim);
        sc.analytic = derive_analytic(json{}, sc);
    } else if (kind == "forced" || kind == "two_particle") {
        sc.kind = kind == "forced" ? LiouvillianSpec::Kind::forced : LiouvillianSpec::Kind::two_particle;
        if (sc.kind == LiouvillianSpec::Kind::two_particle) {
            if (sc.grid_spec.layout != GridLayout::two_particle)
                throw ConfigError("dynamics.kind: two_particle requires grid.layout = two_particle");
            if (sc.masses.size() != 2) throw ConfigError("dynamics.masses: two_particle needs two masses");
        }
        const json& fj = require(dyn, "force", "dynamics");
        if (fj.is_array()) {
            std::vector<ForceField> parts;
            for (const auto& e : fj) parts.push_back(parse_one_force(e, sc, "dynamics.force"));
            sc.force = sum_forces(parts);
        } else {
            sc.force = parse_one_force(fj, sc, "dynamics.force");
        }
        sc.analytic = derive_analytic(fj, sc);
    } else {
        throw ConfigError("dynamics.kind: expected free, forced, or two_particle");
    }

    if (j.contains("potentials")) sc.potentials = parse_potentials(j.at("potentials"), sc.grid_spec.config_dim);

    const json& bk = require(j, "backend", "config");
    const std::string type = require(bk, "type", "backend").get<std::string>();
    if (type == "analytic")
        sc.prop.backend = PropagatorConfig::Backend::analytic;
    else if (type == "splitstep")
        sc.prop.backend = PropagatorConfig::Backend::splitstep;
    else if (type == "semilagrangian")
        sc.prop.backend = PropagatorConfig::Backend::semilagrangian;
    else
        throw ConfigError("backend.type: expected analytic, splitstep, or semilagrangian");
    sc.prop.dt = require_num(bk, "dt", "backend");
    if (!(sc.prop.dt > 0.0)) throw ConfigError("backend.dt: dt must be positive");
    if (bk.contains("interpolation_order"))
        sc.prop.interpolation_order = static_cast<int>(bk.at("interpolation_order").get<double>());
    if (bk.contains("periodic_wrap")) sc.prop.periodic_wrap = bk.at("periodic_wrap").get<bool>();

    sc.t_final = require_num(j, "t_final", "config");
    if (!(sc.t_final > 0.0)) throw ConfigError("t_final: must be positive");
    const double steps = sc.t_final / sc.prop.dt;
    sc.prop.n_steps = static_cast<std::size_t>(std::llround(steps));
    if (sc.prop.n_steps == 0 || std::abs(steps - static_cast<double>(sc.prop.n_steps)) > 1e-6)
        throw ConfigError("t_final: must be an integer multiple of backend.dt");

    if (j.contains("snapshot_cadence"))
        sc.snapshot_cadence = j.at("snapshot_cadence").get<std::size_t>();
    if (j.contains("representation")) {
        const std::string rep = j.at("representation").get<std::string>();
        if (rep == "momentum")
            sc.representation = Representation::momentum;
        else if (rep != "velocity")
            throw ConfigError("representation: expected velocity or momentum");
    }
    if (sc.representation == Representation::momentum) {
        if (sc.kind == LiouvillianSpec::Kind::two_particle)
            throw ConfigError("representation: momentum runs support single-particle grids only");
        if (sc.prop.backend != PropagatorConfig::Backend::semilagrangian)
            throw ConfigError("representation: momentum runs require backend.type = semilagrangian");
        if (!sc.potentials) sc.potentials = zero_potentials(sc.grid_spec.config_dim);
    }
    if (j.contains("output_dir")) sc.output_dir = j.at("output_dir").get<std::string>();

    if (sc.prop.backend == PropagatorConfig::Backend::analytic && !sc.analytic)
        throw ConfigError("backend.type: analytic backend requires a closed-form scenario "
                          "(free, uniform_gravity, or quadratic force)");
    if (sc.prop.backend == PropagatorConfig::Backend::splitstep && sc.force.depends_on_velocity)
        throw ConfigError("backend.type: splitstep rejects velocity-dependent forces; "
                          "use semilagrangian");
    return sc;
}

ScenarioConfig load_scenario_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return parse_scenario_json(text);
}

WaveField initial_state(const ScenarioConfig& sc) {
    return gaussian_packet(build_grid(sc.grid_spec), sc.center, sc.sigma, sc.wavevector);
}

LiouvillianSpec liouvillian_spec(const ScenarioConfig& sc) {
    GridPtr grid = build_grid(sc.grid_spec);
    switch (sc.kind) {
        case LiouvillianSpec::Kind::free:
            return free_liouvillian(grid);
        case LiouvillianSpec::Kind::forced:
            return forced_liouvillian(grid, sc.force, sc.masses.at(0));
        case LiouvillianSpec::Kind::two_particle:
            return two_particle_liouvillian(grid, sc.force, sc.masses.at(0), sc.masses.at(1));
    }
    throw ConfigError("dynamics.kind: invalid");
}

std::string resolve_output_dir(const ScenarioConfig& sc) {
    if (!sc.output_dir.empty()) return sc.output_dir;
    if (const char* env = std::getenv("KVN_OUT_DIR")) return std::string(env) + "/" + sc.name;
    return "kvn_out/" + sc.name;
}

namespace {

void write_series_csv(const std::string& path, const Grid& g, const ObservableSeries& series,
                      const std::vector<TrajectorySample>& oracle) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open '" + path + "' for writing");
    const int d = g.config_dim();
    os << "t";
    for (int k = 0; k < d; ++k) os << "," << g.axis(g.position_axis(k)).name;
    for (int k = 0; k < d; ++k) os << "," << g.axis(g.velocity_axis(k)).name;
    os << ",norm";
    for (int k = 0; k < d; ++k) os << ",mean_" << g.axis(g.position_axis(k)).name;
    for (int k = 0; k < d; ++k) os << ",mean_" << g.axis(g.velocity_axis(k)).name;
    os << "\n";
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << "," << buf;
    };
    std::size_t oi = 0;
    for (const auto& s : series.samples) {
        while (oi + 1 < oracle.size() && std::abs(oracle[oi + 1].t - s.t) < std::abs(oracle[oi].t - s.t))
            ++oi;
        std::snprintf(buf, sizeof buf, "%.17g", s.t);
        os << buf;
        for (int k = 0; k < 2 * d; ++k) put(oracle[oi].z[k]);
        put(s.norm);
        for (int k = 0; k < d; ++k) put(s.mean_pos[k]);
        for (int k = 0; k < d; ++k) put(s.mean_vel[k]);
        os << "\n";
    }
}

}  // namespace

RunArtifacts run_scenario(const ScenarioConfig& sc) {
    const auto t0 = std::chrono::steady_clock::now();
    RunArtifacts art;
    art.out_dir = resolve_output_dir(sc);
    std::filesystem::create_directories(art.out_dir);

    LiouvillianSpec spec = liouvillian_spec(sc);
    WaveField psi = initial_state(sc);
    const std::size_t cadence = sc.snapshot_cadence == 0 ? sc.prop.n_steps : sc.snapshot_cadence;

    // Oracle trajectory from the initial centroid, sampled every step.
    PhasePoint z0(sc.center.begin(), sc.center.end());
    PhaseFlow flow;
    GaugeContext gauge;
    if (sc.representation == Representation::momentum) {
        gauge.potentials = *sc.potentials;
        gauge.mass = sc.masses.at(0);
        psi = gauge_to_momentum(gauge, psi);
        flow = momentum_flow(gauge.potentials, sc.force, gauge.mass, *psi.grid);
        // centroid labels move to (r, p = m v + A(r))
        const int d = sc.grid_spec.config_dim;
        for (int k = 0; k < d; ++k) {
            const double a = gauge.potentials.has_A() ? gauge.potentials.A[k](z0.data()) : 0.0;
            z0[d + k] = gauge.mass * z0[d + k] + a;
        }
    } else {
        flow = flow_from_liouvillian(spec);
    }
    art.oracle = flow_oracle(flow, z0, sc.t_final, sc.prop.dt);

    art.norm_initial = norm(psi);
    ObservableSeries series;
    LiouvillianSpec sample_spec = spec;  // mean-force columns use the configured force
    auto sample_now = [&](const WaveField& f) {
        if (!all_finite(f)) throw NumericsError("run: state contains non-finite amplitudes");
        series.append(sample_observables(f, sample_spec));
    };

    write_snapshot(art.out_dir + "/state_initial.kvnf", psi);
    sample_now(psi);

    WaveField final_state = psi;
    const StepCallback on_step = [&](const WaveField& f, std::size_t step) {
        if (step % cadence == 0 || step == sc.prop.n_steps) sample_now(f);
    };
    switch (sc.prop.backend) {
        case PropagatorConfig::Backend::analytic: {
            std::size_t step = 0;
            while (step < sc.prop.n_steps) {
                step = std::min(step + cadence, sc.prop.n_steps);
                WaveField f = evolve_analytic(*sc.analytic, psi, static_cast<double>(step) * sc.prop.dt);
                sample_now(f);
                if (step == sc.prop.n_steps) final_state = std::move(f);
            }
            break;
        }
        case PropagatorConfig::Backend::splitstep:
            final_state = evolve_splitstep(psi, spec, sc.prop, on_step);
            break;
        case PropagatorConfig::Backend::semilagrangian:
            final_state = sc.representation == Representation::momentum
                              ? evolve_semilagrangian_flow(psi, flow, sc.prop, on_step)
                              : evolve_semilagrangian(psi, spec, sc.prop, on_step);
            break;
    }

    art.norm_final = norm(final_state);
    write_snapshot(art.out_dir + "/state_final.kvnf", final_state);
    write_series_csv(art.out_dir + "/series.csv", *final_state.grid, series, art.oracle);
    art.series = std::move(series);
    art.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json manifest;
    manifest["name"] = sc.name;
    manifest["config"] = json::parse(sc.config_echo);
    manifest["versions"] = {{"snapshot", 1}, {"series_csv", 1}};
    manifest["norm_initial"] = art.norm_initial;
    manifest["norm_final"] = art.norm_final;
    manifest["norm_drift"] = std::abs(art.norm_final - art.norm_initial);
    manifest["wall_time_seconds"] = art.wall_seconds;
    manifest["n_steps"] = sc.prop.n_steps;
    manifest["dt"] = sc.prop.dt;
    manifest["outputs"] = {"series.csv", "state_initial.kvnf", "state_final.kvnf"};
    std::ofstream mf(art.out_dir + "/manifest.json");
    mf << manifest.dump(2) << "\n";
    return art;
}

}  // namespace kvn
