#include <doctest.h>

#include <fstream>
#include <sstream>

#include "fleetsense/binning.hpp"
#include "fleetsense/evaluation.hpp"
#include "fleetsense/synthgen.hpp"
#include "testutil.hpp"

using namespace fleetsense;
using testutil::TempDir;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ScenarioConfig tiny_config(std::uint64_t seed) {
    ScenarioConfig c = scenario_preset("desk-small", seed);
    c.grid.n_days = 2;
    c.n_vehicles = 4;
    return c;
}

} // namespace

TEST_CASE("generation is deterministic per seed, byte for byte") {
    TempDir a, b;
    write_scenario(generate_scenario(tiny_config(7)), a.path());
    write_scenario(generate_scenario(tiny_config(7)), b.path());
    for (const char* name : {"trajectories.csv", "grid.cfg", "static_features.csv",
                             "dynamic_features.csv", "truth_PM2.5.csv", "scenario.json"}) {
        CHECK(slurp(a.file(name)) == slurp(b.file(name)));
        CHECK_FALSE(slurp(a.file(name)).empty());
    }
    TempDir c;
    write_scenario(generate_scenario(tiny_config(8)), c.path());
    CHECK(slurp(a.file("trajectories.csv")) != slurp(c.file("trajectories.csv")));
}

TEST_CASE("single vehicle, single day emits exactly one vehicle id") {
    ScenarioConfig cfg = tiny_config(3);
    cfg.n_vehicles = 1;
    cfg.grid.n_days = 1;
    const GeneratedScenario s = generate_scenario(cfg);
    CHECK(s.vehicle_ids == std::vector<std::string>{"v0"});
    CHECK_FALSE(s.pings.empty());
    for (const auto& ping : s.pings) CHECK(ping.vehicle == 0);
}

TEST_CASE("zero attraction gives a uniform visit distribution (chi-square)") {
    ScenarioConfig cfg;
    cfg.name = "uniformity-probe";
    cfg.seed = 1234;
    cfg.grid.n_rows = 4;
    cfg.grid.n_cols = 4;
    cfg.grid.time_interval_minutes = 60;
    cfg.grid.n_days = 7;
    cfg.grid.origin_lat = 23.0;
    cfg.grid.origin_lon = 113.0;
    cfg.n_vehicles = 100;
    cfg.mobility.hotspot_count = 0;
    cfg.mobility.hotspot_attraction = 0.0;
    // near-iid waypoint sampling: instantaneous travel, one ping per dwell,
    // jump scale spanning the whole domain
    cfg.mobility.speed_m_per_min = 1e9;
    cfg.mobility.dwell_minutes = 0.5;
    cfg.mobility.ping_cadence_s = 30.0;
    cfg.mobility.trip_length_scale_m = 4000.0;
    cfg.mobility.base_active_minutes = 720.0;
    cfg.mobility.activity_sigma = 0.0;
    cfg.field.noise_sd = 0.0;

    const GeneratedScenario s = generate_scenario(cfg);
    REQUIRE(s.pings.size() > 900000); // ~1e6 waypoint samples

    const SpatiotemporalIndex index(cfg.grid);
    Eigen::ArrayXd counts = Eigen::ArrayXd::Zero(16);
    std::int64_t total = 0;
    for (const auto& ping : s.pings) {
        const auto loc = index.locate(ping.lat, ping.lon, ping.ts);
        REQUIRE(loc.has_value());
        counts[loc->g] += 1.0;
        ++total;
    }
    const double expected = static_cast<double>(total) / 16.0;
    const double chi2 = ((counts - expected).square() / expected).sum();
    // chi-square 0.99 quantile at df = 15
    CHECK(chi2 < 30.577914166892494);
}

TEST_CASE("noise-free readings recover the latent field through the full pipeline") {
    ScenarioConfig cfg = tiny_config(11);
    cfg.field.noise_sd = 0.0;
    const GeneratedScenario s = generate_scenario(cfg);

    TempDir tmp;
    write_scenario(s, tmp.path());
    TrajectoryReader reader(tmp.file("trajectories.csv"));
    std::vector<TrajectoryRecord> records;
    TrajectoryRecord rec;
    while (reader.next(rec)) records.push_back(rec);
    CHECK(reader.skipped().total() == 0);

    const SpatiotemporalIndex index(cfg.grid);
    const ReadingAggregate agg =
        bin_readings(records, index, "PM2.5", reader.pollutants());
    const ObservedField truth = full_fleet_field(agg);
    for (Index sidx = 0; sidx < truth.value.size(); ++sidx) {
        if (!truth.observed[static_cast<std::size_t>(sidx)]) continue;
        CHECK(truth.value[sidx] ==
              doctest::Approx(s.latent[0][sidx]).epsilon(1e-12));
    }
}

TEST_CASE("zero traffic coupling leaves the latent field constant over time") {
    ScenarioConfig cfg = tiny_config(5);
    cfg.field.traffic_coupling = 0.0;
    const GeneratedScenario s = generate_scenario(cfg);
    const int T = cfg.grid.n_intervals();
    for (int g = 0; g < cfg.grid.n_cells(); ++g)
        for (int t = 1; t < T; ++t)
            CHECK(s.latent[0][static_cast<Index>(g) * T + t] ==
                  s.latent[0][static_cast<Index>(g) * T]);
}

TEST_CASE("static features hit their target correlation with the spatial component") {
    ScenarioConfig cfg;
    cfg.seed = 99;
    cfg.grid.n_rows = 24; // 576 cells
    cfg.grid.n_cols = 24;
    cfg.grid.time_interval_minutes = 120;
    cfg.grid.n_days = 1;
    cfg.n_vehicles = 2;
    cfg.mobility.base_active_minutes = 30.0;
    const GeneratedScenario s = generate_scenario(cfg);

    const auto pearson = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        const double mx = x.mean(), my = y.mean();
        const Eigen::ArrayXd dx = x.array() - mx, dy = y.array() - my;
        return (dx * dy).sum() / std::sqrt(dx.square().sum() * dy.square().sum());
    };
    // building_density targets rho = 0.9
    const double r0 = pearson(s.static_features.values.col(0), s.spatial_component);
    CHECK(r0 > 0.8);
    CHECK(r0 < 0.97);
    // facade_var targets rho = 0
    const double r3 = pearson(s.static_features.values.col(3), s.spatial_component);
    CHECK(std::abs(r3) < 0.2);
}

TEST_CASE("congestion feature correlates positively with the latent field") {
    const ScenarioConfig cfg = scenario_preset("desk-medium", 42);
    const GeneratedScenario s = generate_scenario(cfg);
    const Layer& latent = s.latent[0];
    const double mx = s.congestion.mean(), my = latent.mean();
    const Eigen::ArrayXd dx = s.congestion - mx, dy = latent - my;
    const double r = (dx * dy).sum() / std::sqrt(dx.square().sum() * dy.square().sum());
    CHECK(r > 0.3);
    // and the exported dynamic feature is exactly that congestion signal
    CHECK((s.dynamic_features.values.col(0).array() - s.congestion).abs().maxCoeff() == 0.0);
}

TEST_CASE("readings are clamped at zero and the clamp count reported") {
    ScenarioConfig cfg = tiny_config(13);
    cfg.field.baseline = 1.0;
    cfg.field.spatial_amplitude = 0.5;
    cfg.field.traffic_coupling = 0.5;
    cfg.field.noise_sd = 5.0; // frequent negative draws before clamping
    const GeneratedScenario s = generate_scenario(cfg);
    CHECK(s.clamped_readings > 0);
    CHECK(s.readings.minCoeff() >= 0.0);
}

TEST_CASE("presets") {
    CHECK(scenario_preset_names() ==
          std::vector<std::string>{"desk-small", "desk-medium", "guangzhou-shape"});

    const ScenarioConfig small = scenario_preset("desk-small", 1);
    CHECK(small.n_vehicles <= 20); // exact-solver oracle compatible
    CHECK(small.grid.n_cells() == 64);

    const ScenarioConfig medium = scenario_preset("desk-medium", 1);
    CHECK(medium.n_vehicles == 64);
    CHECK(medium.grid.n_days == 7);

    const ScenarioConfig gz = scenario_preset("guangzhou-shape", 1);
    CHECK(gz.n_vehicles == 320);
    CHECK(gz.grid.n_days == 61);
    CHECK(gz.grid.time_interval_minutes == 60);
    const SpatiotemporalIndex index(gz.grid);
    CHECK(index.domain_cell_count() == 3811);

    CHECK_THROWS_AS(scenario_preset("nope"), ConfigError);
}

TEST_CASE("scenario config json round-trip") {
    TempDir tmp;
    ScenarioConfig cfg = scenario_preset("desk-small", 77);
    cfg.field.pollutants = {"PM2.5", "NO", "PM10"};
    cfg.mobility.hotspot_attraction = 3.5;
    testutil::write_file(tmp.file("s.json"), cfg.to_json());
    const ScenarioConfig back = ScenarioConfig::from_json_file(tmp.file("s.json"));
    CHECK(back.seed == 77);
    CHECK(back.mobility.hotspot_attraction == 3.5);
    CHECK(back.field.pollutants == cfg.field.pollutants);
    CHECK(back.grid.canonical() == cfg.grid.canonical());

    testutil::write_file(tmp.file("bad.json"), "{\"n_vehicles\": 0, \"grid\": {}}");
    CHECK_THROWS_AS(ScenarioConfig::from_json_file(tmp.file("bad.json")), ConfigError);
}
