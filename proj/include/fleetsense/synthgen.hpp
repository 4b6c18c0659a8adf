#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fleetsense/grid.hpp"
#include "fleetsense/weights.hpp"

namespace fleetsense {

struct MobilityParams {
    int hotspot_count = 5;
    double hotspot_attraction = 2.0; // odds of a hotspot trip vs an exploratory one
    double hotspot_sigma_m = 500.0;
    double trip_length_scale_m = 2500.0; // mean exploratory jump length
    double speed_m_per_min = 500.0;
    double dwell_minutes = 6.0;
    double ping_cadence_s = 30.0;
    double gps_jitter_m = 10.0;
    double base_active_minutes = 150.0; // median daily activity
    double activity_sigma = 0.6;        // lognormal sigma; long-tailed fleet heterogeneity
};

struct FieldParams {
    double kernel_length_m = 1000.0; // spatial smoothing length-scale
    double baseline = 35.0;
    double spatial_amplitude = 5.0;
    double traffic_coupling = 30.0; // scales the normalized congestion signal
    double noise_sd = 3.0;
    // on-road readings get noisier with traffic (plume intermittency):
    // sd(g,t) = noise_sd * (1 + noise_congestion_gain * congestion(g,t))
    double noise_congestion_gain = 0.5;
    std::vector<std::string> pollutants = {"PM2.5", "NO2"};
};

struct ScenarioConfig {
    std::string name = "custom";
    GridSpec grid;
    int n_vehicles = 12;
    MobilityParams mobility;
    FieldParams field;
    std::uint64_t seed = 0;
    // local civil date of observation day 0
    int start_year = 2023, start_month = 3, start_day = 1;

    void validate() const;
    std::string to_json() const;
    static ScenarioConfig from_json_file(const std::string& path);
};

struct GeneratedScenario {
    ScenarioConfig config;
    std::vector<std::string> vehicle_ids;

    struct Ping {
        std::int32_t vehicle;
        std::int64_t ts; // UTC epoch seconds
        double lat, lon;
    };
    std::vector<Ping> pings;           // grouped by vehicle, then day, then time
    Eigen::MatrixXd readings;          // n_pings x n_pollutants, clamped at 0
    std::vector<Layer> latent;         // per pollutant, over the flattened (g, t) space
    Eigen::VectorXd spatial_component; // per cell, standardized; anchor for static features
    Layer congestion;                  // per (g, t), normalized to [0, 1]
    FeatureTable static_features;
    FeatureTable dynamic_features;
    std::int64_t clamped_readings = 0;
    std::int64_t out_of_domain_pings = 0;
};

GeneratedScenario generate_scenario(const ScenarioConfig& config);

// writes trajectories.csv, grid.cfg, feature tables, per-pollutant truth
// fields and scenario.json into dir (created if missing)
void write_scenario(const GeneratedScenario& scenario, const std::string& dir);

std::vector<std::string> scenario_preset_names();
ScenarioConfig scenario_preset(const std::string& name, std::uint64_t seed = 0);

} // namespace fleetsense
