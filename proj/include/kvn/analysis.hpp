#pragma once

#include "kvn/propagate.hpp"

namespace kvn {

/// One sampled instant of a run: norm and per-config-axis expectations.
struct ObservableSample {
    double t = 0.0;
    double norm = 0.0;
    std::vector<double> mean_pos;
    std::vector<double> mean_vel;
    std::vector<double> mean_force;  // <F_k>/1, per pair (empty when free)
};

struct ObservableSeries {
    std::vector<ObservableSample> samples;

    void append(const ObservableSample& s);
    std::size_t size() const { return samples.size(); }
};

/// Samples norm, centroids, and mean force of a state under a Liouvillian spec.
ObservableSample sample_observables(const WaveField& f, const LiouvillianSpec& spec);

/// Expectation of a real multiplicative observable on a normalized state
/// (rejects states whose norm deviates from 1 by more than 1e-6).
double expectation(const WaveField& f, const std::function<double(const double*)>& obs);
double expectation_coord(const WaveField& f, const std::string& axis_name);

struct EhrenfestResiduals {
    double position_rule = 0.0;  // max |d<R>/dt - <V>|
    double force_rule = 0.0;     // max |d<V>/dt - <F>/m|
};

/// Central-difference residuals of the Ehrenfest relations along a series.
EhrenfestResiduals ehrenfest_residual(const ObservableSeries& series,
                                      const std::vector<double>& mass_per_pair);

struct DeviationReport {
    std::string scenario;
    double sigma = 0.0;
    double max_dev = 0.0;
    double t_of_max = 0.0;
    std::vector<std::pair<double, double>> series;  // (t, centroid-vs-oracle distance)
};

/// Distance between run centroids and the oracle trajectory at matching times.
DeviationReport klimontovich_deviation(const std::string& scenario_name, double sigma,
                                       const ObservableSeries& series,
                                       const std::vector<TrajectorySample>& oracle);

}  // namespace kvn
