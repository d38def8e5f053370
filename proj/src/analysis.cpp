#include "kvn/analysis.hpp"

#include <cmath>

namespace kvn {

void ObservableSeries::append(const ObservableSample& s) {
    if (!samples.empty() && !(s.t > samples.back().t))
        throw ConfigError("ObservableSeries: time stamps must be strictly increasing");
    if (!std::isfinite(s.norm)) throw NumericsError("ObservableSeries: non-finite norm");
    samples.push_back(s);
}

ObservableSample sample_observables(const WaveField& f, const LiouvillianSpec& spec) {
    const Grid& g = *f.grid;
    const int d = g.config_dim();
    ObservableSample s;
    s.t = f.time;
    s.norm = norm(f);
    for (int k = 0; k < d; ++k) s.mean_pos.push_back(coord_moment(f, g.position_axis(k)));
    for (int k = 0; k < d; ++k) s.mean_vel.push_back(coord_moment(f, g.velocity_axis(k)));
    if (spec.kind != LiouvillianSpec::Kind::free)
        for (int k = 0; k < d; ++k) s.mean_force.push_back(fn_moment(f, spec.force.comp[k]));
    return s;
}

double expectation(const WaveField& f, const std::function<double(const double*)>& obs) {
    const double n = norm(f);
    if (std::abs(n - 1.0) > 1e-6)
        throw NumericsError("expectation: state is not normalized (norm = " + std::to_string(n) + ")");
    return fn_moment(f, obs);
}

double expectation_coord(const WaveField& f, const std::string& axis_name) {
    const std::size_t ax = f.grid->axis_index(axis_name);
    return expectation(f, [ax](const double* c) { return c[ax]; });
}

EhrenfestResiduals ehrenfest_residual(const ObservableSeries& series,
                                      const std::vector<double>& mass_per_pair) {
    const auto& s = series.samples;
    if (s.size() < 3) throw ConfigError("ehrenfest_residual: at least 3 samples required");
    EhrenfestResiduals r;
    const std::size_t d = s.front().mean_pos.size();
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        // centered differences assume uniform sampling; skip irregular
        // triples (e.g. a partial final interval)
        const double dl = s[i].t - s[i - 1].t;
        const double dr = s[i + 1].t - s[i].t;
        if (std::abs(dr - dl) > 1e-9 * std::max(dl, dr)) continue;
        const double dt_sum = s[i + 1].t - s[i - 1].t;
        for (std::size_t k = 0; k < d; ++k) {
            const double dr = (s[i + 1].mean_pos[k] - s[i - 1].mean_pos[k]) / dt_sum;
            r.position_rule = std::max(r.position_rule, std::abs(dr - s[i].mean_vel[k]));
            if (!s[i].mean_force.empty()) {
                const double dv = (s[i + 1].mean_vel[k] - s[i - 1].mean_vel[k]) / dt_sum;
                r.force_rule =
                    std::max(r.force_rule, std::abs(dv - s[i].mean_force[k] / mass_per_pair[k]));
            } else {
                const double dv = (s[i + 1].mean_vel[k] - s[i - 1].mean_vel[k]) / dt_sum;
                r.force_rule = std::max(r.force_rule, std::abs(dv));
            }
        }
    }
    return r;
}

DeviationReport klimontovich_deviation(const std::string& scenario_name, double sigma,
                                       const ObservableSeries& series,
                                       const std::vector<TrajectorySample>& oracle) {
    DeviationReport rep;
    rep.scenario = scenario_name;
    rep.sigma = sigma;
    std::size_t oi = 0;
    for (const auto& s : series.samples) {
        while (oi + 1 < oracle.size() && std::abs(oracle[oi + 1].t - s.t) < std::abs(oracle[oi].t - s.t))
            ++oi;
        if (std::abs(oracle[oi].t - s.t) > 1e-9 + 1e-9 * std::abs(s.t))
            throw ConfigError("klimontovich_deviation: oracle samples do not cover the series times");
        double d2 = 0.0;
        const std::size_t d = s.mean_pos.size();
        for (std::size_t k = 0; k < d; ++k) {
            d2 += std::pow(s.mean_pos[k] - oracle[oi].z[k], 2);
            d2 += std::pow(s.mean_vel[k] - oracle[oi].z[d + k], 2);
        }
        const double dist = std::sqrt(d2);
        rep.series.emplace_back(s.t, dist);
        if (dist > rep.max_dev) {
            rep.max_dev = dist;
            rep.t_of_max = s.t;
        }
    }
    return rep;
}

}  // namespace kvn
