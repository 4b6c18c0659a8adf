#include "fleetsense/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "fleetsense/csv.hpp"
#include "fleetsense/errors.hpp"
#include "fleetsense/rng.hpp"

namespace fleetsense {

namespace fs = std::filesystem;
using nlohmann::json;

void ScenarioConfig::validate() const {
    grid.validate();
    if (n_vehicles < 1) throw ConfigError("n_vehicles must be at least 1");
    if (mobility.hotspot_count < 0) throw ConfigError("hotspot_count must be non-negative");
    if (mobility.hotspot_attraction < 0.0)
        throw ConfigError("hotspot_attraction must be non-negative");
    if (mobility.speed_m_per_min <= 0.0) throw ConfigError("speed must be positive");
    if (mobility.dwell_minutes <= 0.0) throw ConfigError("dwell_minutes must be positive");
    if (mobility.ping_cadence_s <= 0.0) throw ConfigError("ping_cadence_s must be positive");
    if (mobility.base_active_minutes <= 0.0)
        throw ConfigError("base_active_minutes must be positive");
    if (field.noise_sd < 0.0) throw ConfigError("noise_sd must be non-negative");
    if (field.pollutants.empty()) throw ConfigError("at least one pollutant required");
}

namespace {

json grid_to_json(const GridSpec& g) {
    return json{{"origin_lat", g.origin_lat},
                {"origin_lon", g.origin_lon},
                {"cell_size_m", g.cell_size_m},
                {"n_rows", g.n_rows},
                {"n_cols", g.n_cols},
                {"time_interval_minutes", g.time_interval_minutes},
                {"n_days", g.n_days},
                {"utc_offset_minutes", g.utc_offset_minutes},
                {"corner_cuts", g.corner_cuts}};
}

GridSpec grid_from_json(const json& j) {
    GridSpec g;
    g.origin_lat = j.at("origin_lat").get<double>();
    g.origin_lon = j.at("origin_lon").get<double>();
    g.cell_size_m = j.at("cell_size_m").get<double>();
    g.n_rows = j.at("n_rows").get<int>();
    g.n_cols = j.at("n_cols").get<int>();
    g.time_interval_minutes = j.at("time_interval_minutes").get<int>();
    g.n_days = j.at("n_days").get<int>();
    g.utc_offset_minutes = j.value("utc_offset_minutes", 0);
    if (j.contains("corner_cuts")) {
        const auto cuts = j.at("corner_cuts").get<std::vector<int>>();
        for (std::size_t i = 0; i < 4 && i < cuts.size(); ++i) g.corner_cuts[i] = cuts[i];
    }
    return g;
}

} // namespace

std::string ScenarioConfig::to_json() const {
    json j;
    j["name"] = name;
    j["seed"] = seed;
    j["n_vehicles"] = n_vehicles;
    j["start_date"] = {start_year, start_month, start_day};
    j["grid"] = grid_to_json(grid);
    j["mobility"] = {{"hotspot_count", mobility.hotspot_count},
                     {"hotspot_attraction", mobility.hotspot_attraction},
                     {"hotspot_sigma_m", mobility.hotspot_sigma_m},
                     {"trip_length_scale_m", mobility.trip_length_scale_m},
                     {"speed_m_per_min", mobility.speed_m_per_min},
                     {"dwell_minutes", mobility.dwell_minutes},
                     {"ping_cadence_s", mobility.ping_cadence_s},
                     {"gps_jitter_m", mobility.gps_jitter_m},
                     {"base_active_minutes", mobility.base_active_minutes},
                     {"activity_sigma", mobility.activity_sigma}};
    j["field"] = {{"kernel_length_m", field.kernel_length_m},
                  {"baseline", field.baseline},
                  {"spatial_amplitude", field.spatial_amplitude},
                  {"traffic_coupling", field.traffic_coupling},
                  {"noise_sd", field.noise_sd},
                  {"noise_congestion_gain", field.noise_congestion_gain},
                  {"pollutants", field.pollutants}};
    return j.dump(2);
}

ScenarioConfig ScenarioConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("invalid scenario JSON in " + path + ": " + e.what());
    }
    ScenarioConfig c;
    try {
        c.name = j.value("name", std::string("custom"));
        c.seed = j.value("seed", std::uint64_t{0});
        c.n_vehicles = j.at("n_vehicles").get<int>();
        if (j.contains("start_date")) {
            const auto d = j.at("start_date").get<std::vector<int>>();
            if (d.size() == 3) {
                c.start_year = d[0];
                c.start_month = d[1];
                c.start_day = d[2];
            }
        }
        c.grid = grid_from_json(j.at("grid"));
        if (j.contains("mobility")) {
            const auto& m = j.at("mobility");
            auto& p = c.mobility;
            p.hotspot_count = m.value("hotspot_count", p.hotspot_count);
            p.hotspot_attraction = m.value("hotspot_attraction", p.hotspot_attraction);
            p.hotspot_sigma_m = m.value("hotspot_sigma_m", p.hotspot_sigma_m);
            p.trip_length_scale_m = m.value("trip_length_scale_m", p.trip_length_scale_m);
            p.speed_m_per_min = m.value("speed_m_per_min", p.speed_m_per_min);
            p.dwell_minutes = m.value("dwell_minutes", p.dwell_minutes);
            p.ping_cadence_s = m.value("ping_cadence_s", p.ping_cadence_s);
            p.gps_jitter_m = m.value("gps_jitter_m", p.gps_jitter_m);
            p.base_active_minutes = m.value("base_active_minutes", p.base_active_minutes);
            p.activity_sigma = m.value("activity_sigma", p.activity_sigma);
        }
        if (j.contains("field")) {
            const auto& f = j.at("field");
            auto& p = c.field;
            p.kernel_length_m = f.value("kernel_length_m", p.kernel_length_m);
            p.baseline = f.value("baseline", p.baseline);
            p.spatial_amplitude = f.value("spatial_amplitude", p.spatial_amplitude);
            p.traffic_coupling = f.value("traffic_coupling", p.traffic_coupling);
            p.noise_sd = f.value("noise_sd", p.noise_sd);
            p.noise_congestion_gain = f.value("noise_congestion_gain", p.noise_congestion_gain);
            p.pollutants = f.value("pollutants", p.pollutants);
        }
    } catch (const json::exception& e) {
        throw ConfigError("scenario config " + path + " missing field: " + e.what());
    }
    c.validate();
    return c;
}

namespace {

// reflect into [0, limit); folding is an isometry, so symmetric jump kernels
// keep the uniform distribution invariant
double fold(double x, double limit) {
    double m = std::fmod(x, 2.0 * limit);
    if (m < 0.0) m += 2.0 * limit;
    const double folded = m <= limit ? m : 2.0 * limit - m;
    return std::min(folded, limit * (1.0 - 1e-12));
}

// per-pollutant flavour so the pollutants are distinguishable
struct PollutantScale {
    double baseline, amplitude, coupling;
};
PollutantScale pollutant_scale(const std::string& name) {
    if (name == "NO2") return {0.6, 0.8, 0.8};
    if (name == "NO") return {0.4, 0.7, 0.9};
    if (name == "PM10") return {1.3, 1.1, 0.9};
    return {1.0, 1.0, 1.0}; // PM2.5 and anything unrecognized
}

// white noise per cell smoothed with a separable Gaussian kernel (reflect
// padding), then standardized over cells
Eigen::VectorXd smooth_field(int n_rows, int n_cols, double sigma_cells, Rng rng) {
    Eigen::MatrixXd noise(n_rows, n_cols);
    for (int r = 0; r < n_rows; ++r)
        for (int c = 0; c < n_cols; ++c) noise(r, c) = rng.normal();
    if (sigma_cells > 0.0) {
        const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_cells)));
        Eigen::VectorXd kernel(2 * radius + 1);
        for (int i = -radius; i <= radius; ++i)
            kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma_cells * sigma_cells));
        kernel /= kernel.sum();
        auto reflect = [](int i, int n) {
            while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
            return i;
        };
        Eigen::MatrixXd tmp(n_rows, n_cols);
        for (int r = 0; r < n_rows; ++r)
            for (int c = 0; c < n_cols; ++c) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k)
                    acc += kernel[k + radius] * noise(reflect(r + k, n_rows), c);
                tmp(r, c) = acc;
            }
        for (int r = 0; r < n_rows; ++r)
            for (int c = 0; c < n_cols; ++c) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k)
                    acc += kernel[k + radius] * tmp(r, reflect(c + k, n_cols));
                noise(r, c) = acc;
            }
    }
    Eigen::VectorXd flat(n_rows * n_cols);
    for (int r = 0; r < n_rows; ++r)
        for (int c = 0; c < n_cols; ++c) flat[r * n_cols + c] = noise(r, c);
    const double mean = flat.mean();
    const double sd = std::sqrt((flat.array() - mean).square().sum() /
                                std::max<Eigen::Index>(1, flat.size() - 1));
    if (sd > 0.0) flat = ((flat.array() - mean) / sd).matrix();
    return flat;
}

} // namespace

GeneratedScenario generate_scenario(const ScenarioConfig& config) {
    config.validate();
    GeneratedScenario out;
    out.config = config;

    const GridSpec& grid = config.grid;
    const SpatiotemporalIndex index(grid);
    const double W = index.domain_width_m();
    const double H = index.domain_height_m();
    const Rng master(config.seed == 0 ? 0x5eed5eedULL : config.seed);

    // vehicle ids zero-padded to a fixed width so lexicographic order is
    // numeric order
    {
        int width = 1;
        for (int n = config.n_vehicles - 1; n >= 10; n /= 10) ++width;
        width = std::min(width, 9);
        char buf[32];
        for (int v = 0; v < config.n_vehicles; ++v) {
            std::snprintf(buf, sizeof(buf), "v%0*d", width, v);
            out.vehicle_ids.emplace_back(buf);
        }
    }

    std::vector<std::pair<double, double>> hotspots;
    {
        Rng rng = master.substream("hotspots", 0);
        for (int k = 0; k < config.mobility.hotspot_count; ++k)
            hotspots.emplace_back(rng.uniform(0.0, W), rng.uniform(0.0, H));
    }

    const std::int64_t day0_local_midnight =
        days_from_civil(config.start_year, config.start_month, config.start_day) * 86400LL;
    const std::int64_t utc_shift = 60LL * grid.utc_offset_minutes;

    // ---- pass 1: mobility ----
    const auto& mob = config.mobility;
    const double cadence_min = mob.ping_cadence_s / 60.0;
    const double p_hot = mob.hotspot_attraction / (mob.hotspot_attraction + 1.0);
    for (int v = 0; v < config.n_vehicles; ++v) {
        const double activity =
            mob.activity_sigma > 0.0
                ? master.substream("activity", static_cast<std::uint64_t>(v))
                      .lognormal(-0.5 * mob.activity_sigma * mob.activity_sigma,
                                 mob.activity_sigma)
                : 1.0;
        // persistent schedule type: morning or evening rush, or off-peak.
        // Fleet-level density then peaks at rush hours, and vehicles differ in
        // when they sense, which is what temporal weighting keys on.
        double peak;
        {
            Rng rng = master.substream("schedule", static_cast<std::uint64_t>(v));
            const double u = rng.uniform01();
            if (u < 0.35) peak = 480.0;
            else if (u < 0.70) peak = 1080.0;
            else peak = rng.uniform(300.0, 1260.0);
        }
        for (int d = 0; d < grid.n_days; ++d) {
            Rng rng = master.substream("traj",
                                       static_cast<std::uint64_t>(v) * 1000003ULL +
                                           static_cast<std::uint64_t>(d));
            const double duration = std::min(720.0, mob.base_active_minutes * activity);
            const double start =
                std::clamp(peak + 60.0 * rng.normal(), 0.0, 1439.0 - duration);
            const double end = start + duration;

            double x = rng.uniform(0.0, W);
            double y = rng.uniform(0.0, H);
            double t = start;
            double tick = start;
            auto emit = [&](double px, double py, double minute) {
                const double jx = fold(px + mob.gps_jitter_m * rng.normal(), W);
                const double jy = fold(py + mob.gps_jitter_m * rng.normal(), H);
                const std::int64_t sec_of_day = std::llround(minute * 60.0);
                const std::int64_t ts =
                    day0_local_midnight + 86400LL * d + sec_of_day - utc_shift;
                out.pings.push_back(
                    {v, ts, index.lat_of_y(jy), index.lon_of_x(jx)});
            };
            while (t < end) {
                double dest_x, dest_y;
                if (!hotspots.empty() && rng.uniform01() < p_hot) {
                    const int k = rng.uniform_int(0, static_cast<int>(hotspots.size()) - 1);
                    dest_x = fold(hotspots[static_cast<std::size_t>(k)].first +
                                      mob.hotspot_sigma_m * rng.normal(),
                                  W);
                    dest_y = fold(hotspots[static_cast<std::size_t>(k)].second +
                                      mob.hotspot_sigma_m * rng.normal(),
                                  H);
                } else {
                    const double len = rng.exponential(mob.trip_length_scale_m);
                    const double theta = rng.uniform(0.0, 6.283185307179586);
                    dest_x = fold(x + len * std::cos(theta), W);
                    dest_y = fold(y + len * std::sin(theta), H);
                }
                const double dist = std::hypot(dest_x - x, dest_y - y);
                const double travel = dist / mob.speed_m_per_min;
                const double arrive = std::min(t + travel, end);
                while (tick < arrive) {
                    const double f = travel > 0.0 ? (tick - t) / travel : 0.0;
                    emit(x + f * (dest_x - x), y + f * (dest_y - y), tick);
                    tick += cadence_min;
                }
                if (t + travel >= end) break;
                t += travel;
                const double leave = std::min(t + mob.dwell_minutes, end);
                while (tick < leave) {
                    emit(dest_x, dest_y, tick);
                    tick += cadence_min;
                }
                t = leave;
                x = dest_x;
                y = dest_y;
            }
        }
    }

    // ---- congestion from ping density ----
    const Index n = grid.layer_size();
    std::vector<Index> ping_cell(out.pings.size());
    Layer density = Layer::Zero(n);
    for (std::size_t i = 0; i < out.pings.size(); ++i) {
        const auto loc = index.locate(out.pings[i].lat, out.pings[i].lon, out.pings[i].ts);
        if (loc) {
            ping_cell[i] = index.flat(loc->g, loc->t);
            density[ping_cell[i]] += 1.0;
        } else {
            ping_cell[i] = -1;
            ++out.out_of_domain_pings;
        }
    }
    density /= static_cast<double>(grid.n_days);
    // saturating index: log compression keeps the city-wide dynamic range
    // instead of letting one hotspot cell crush everything else to ~0
    const double max_density = density.maxCoeff();
    if (max_density > 0.0) {
        const double denom = std::log1p(max_density);
        out.congestion = density.unaryExpr([denom](double d) { return std::log1p(d) / denom; });
    } else {
        out.congestion = Layer::Zero(n);
    }

    // ---- latent fields and readings ----
    const auto& fld = config.field;
    const double sigma_cells = fld.kernel_length_m / grid.cell_size_m;
    const std::size_t P = fld.pollutants.size();
    out.latent.resize(P);
    const int T = grid.n_intervals();
    for (std::size_t p = 0; p < P; ++p) {
        const PollutantScale sc = pollutant_scale(fld.pollutants[p]);
        const Eigen::VectorXd z = smooth_field(grid.n_rows, grid.n_cols, sigma_cells,
                                               master.substream("field", p));
        if (p == 0) out.spatial_component = z;
        Layer latent(n);
        for (Index s = 0; s < n; ++s) {
            const Index g = s / T;
            latent[s] = sc.baseline * fld.baseline +
                        sc.amplitude * fld.spatial_amplitude * z[g] +
                        sc.coupling * fld.traffic_coupling * out.congestion[s];
        }
        out.latent[p] = std::move(latent);
    }

    out.readings.resize(static_cast<Index>(out.pings.size()), static_cast<Index>(P));
    {
        int32_t current_vehicle = -1;
        std::int64_t current_day = -1;
        Rng rng(0); // reseeded per vehicle-day below
        for (std::size_t i = 0; i < out.pings.size(); ++i) {
            const auto& ping = out.pings[i];
            const std::int64_t day = (ping.ts + utc_shift - day0_local_midnight) / 86400;
            if (ping.vehicle != current_vehicle || day != current_day) {
                current_vehicle = ping.vehicle;
                current_day = day;
                rng = master.substream("noise",
                                       static_cast<std::uint64_t>(ping.vehicle) * 1000003ULL +
                                           static_cast<std::uint64_t>(day));
            }
            const double sd =
                fld.noise_sd *
                (1.0 + fld.noise_congestion_gain *
                           (ping_cell[i] >= 0 ? out.congestion[ping_cell[i]] : 0.0));
            for (std::size_t p = 0; p < P; ++p) {
                const double base = ping_cell[i] >= 0
                                        ? out.latent[p][ping_cell[i]]
                                        : pollutant_scale(fld.pollutants[p]).baseline *
                                              fld.baseline;
                double value = base + (fld.noise_sd > 0.0 ? sd * rng.normal() : 0.0);
                if (value < 0.0) {
                    value = 0.0;
                    ++out.clamped_readings;
                }
                out.readings(static_cast<Index>(i), static_cast<Index>(p)) = value;
            }
        }
    }

    // ---- feature tables ----
    {
        const struct {
            const char* name;
            double rho;
        } kStatic[] = {{"building_density", 0.9},
                       {"greenery", 0.6},
                       {"road_density", 0.3},
                       {"facade_var", 0.0}};
        out.static_features.kind = FeatureTable::Kind::StaticSpatial;
        out.static_features.values.resize(grid.n_cells(), 4);
        for (int k = 0; k < 4; ++k) {
            out.static_features.names.emplace_back(kStatic[k].name);
            Rng rng = master.substream("static", static_cast<std::uint64_t>(k));
            const double rho = kStatic[k].rho;
            const double mix = std::sqrt(1.0 - rho * rho);
            for (Index g = 0; g < grid.n_cells(); ++g)
                out.static_features.values(g, k) =
                    rho * out.spatial_component[g] + mix * rng.normal();
        }

        out.dynamic_features.kind = FeatureTable::Kind::DynamicSpatiotemporal;
        out.dynamic_features.names = {"congestion_index", "ambient"};
        out.dynamic_features.values.resize(n, 2);
        Rng rng = master.substream("dynamic", 0);
        for (Index s = 0; s < n; ++s) {
            out.dynamic_features.values(s, 0) = out.congestion[s];
            out.dynamic_features.values(s, 1) = rng.uniform01();
        }
    }
    return out;
}

void write_scenario(const GeneratedScenario& scenario, const std::string& dir) {
    fs::create_directories(dir);
    const GridSpec& grid = scenario.config.grid;
    grid.save((fs::path(dir) / "grid.cfg").string());

    {
        std::ofstream out(fs::path(dir) / "trajectories.csv");
        if (!out) throw IoError("cannot write trajectories.csv in " + dir);
        out << "vehicle_id,timestamp,lat,lon";
        for (const auto& p : scenario.config.field.pollutants) out << "," << p;
        out << "\n";
        for (std::size_t i = 0; i < scenario.pings.size(); ++i) {
            const auto& ping = scenario.pings[i];
            out << scenario.vehicle_ids[static_cast<std::size_t>(ping.vehicle)] << ","
                << ping.ts << "," << format_double(ping.lat) << "," << format_double(ping.lon);
            for (Index p = 0; p < scenario.readings.cols(); ++p)
                out << "," << format_double(scenario.readings(static_cast<Index>(i), p));
            out << "\n";
        }
        if (!out) throw IoError("failed writing trajectories.csv in " + dir);
    }

    save_feature_table(scenario.static_features, grid,
                       (fs::path(dir) / "static_features.csv").string());
    save_feature_table(scenario.dynamic_features, grid,
                       (fs::path(dir) / "dynamic_features.csv").string());

    const int T = grid.n_intervals();
    for (std::size_t p = 0; p < scenario.latent.size(); ++p) {
        std::ofstream out(fs::path(dir) /
                          ("truth_" + scenario.config.field.pollutants[p] + ".csv"));
        if (!out) throw IoError("cannot write truth field in " + dir);
        out << "g,t,value\n";
        for (Index s = 0; s < scenario.latent[p].size(); ++s)
            out << (s / T) << "," << (s % T) << "," << format_double(scenario.latent[p][s])
                << "\n";
    }

    {
        std::ofstream out(fs::path(dir) / "scenario.json");
        json j = json::parse(scenario.config.to_json());
        j["stats"] = {{"pings", scenario.pings.size()},
                      {"clamped_readings", scenario.clamped_readings},
                      {"out_of_domain_pings", scenario.out_of_domain_pings}};
        out << j.dump(2) << "\n";
        if (!out) throw IoError("failed writing scenario.json in " + dir);
    }
}

std::vector<std::string> scenario_preset_names() {
    return {"desk-small", "desk-medium", "guangzhou-shape"};
}

ScenarioConfig scenario_preset(const std::string& name, std::uint64_t seed) {
    ScenarioConfig c;
    c.name = name;
    c.seed = seed;
    c.grid.origin_lat = 23.05;
    c.grid.origin_lon = 113.25;
    c.grid.cell_size_m = 500.0;
    c.grid.utc_offset_minutes = 480;
    if (name == "desk-small") {
        c.grid.n_rows = 8;
        c.grid.n_cols = 8;
        c.grid.time_interval_minutes = 60;
        c.grid.n_days = 3;
        c.n_vehicles = 12;
        c.mobility.hotspot_count = 3;
        c.mobility.hotspot_sigma_m = 400.0;
        c.mobility.trip_length_scale_m = 1500.0;
    } else if (name == "desk-medium") {
        c.grid.n_rows = 20;
        c.grid.n_cols = 20;
        c.grid.time_interval_minutes = 30;
        c.grid.n_days = 7;
        c.n_vehicles = 64;
        c.mobility.hotspot_count = 6;
        c.mobility.hotspot_sigma_m = 800.0;
        c.mobility.hotspot_attraction = 1.5;
        c.mobility.trip_length_scale_m = 2000.0;
        c.mobility.base_active_minutes = 90.0;
        c.mobility.ping_cadence_s = 60.0;
        c.field.noise_sd = 4.0;
        c.field.spatial_amplitude = 3.0;
        c.field.traffic_coupling = 40.0;
    } else if (name == "guangzhou-shape") {
        c.grid.n_rows = 62;
        c.grid.n_cols = 62;
        c.grid.corner_cuts = {7, 2, 1, 1}; // 3844 - 33 = 3811 in-domain cells
        c.grid.time_interval_minutes = 60;
        c.grid.n_days = 61;
        c.n_vehicles = 320;
        c.mobility.hotspot_count = 12;
        c.mobility.trip_length_scale_m = 4000.0;
        c.mobility.ping_cadence_s = 60.0;
        c.field.pollutants = {"PM2.5", "NO2", "NO", "PM10"};
    } else {
        std::string names;
        for (const auto& n : scenario_preset_names()) names += (names.empty() ? "" : ", ") + n;
        throw ConfigError("unknown preset '" + name + "' (available: " + names + ")");
    }
    return c;
}

} // namespace fleetsense
