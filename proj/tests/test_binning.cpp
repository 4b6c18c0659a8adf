#include <doctest.h>

#include "fleetsense/binning.hpp"
#include "fleetsense/errors.hpp"
#include "testutil.hpp"

using namespace fleetsense;

namespace {

GridSpec grid4() {
    GridSpec g;
    g.origin_lat = 23.0;
    g.origin_lon = 113.0;
    g.cell_size_m = 500.0;
    g.n_rows = 4;
    g.n_cols = 4;
    g.time_interval_minutes = 60;
    g.n_days = 4;
    return g;
}

TrajectoryRecord rec(const std::string& id, std::int64_t ts, double lat = 23.001,
                     double lon = 113.001, double reading = -1.0) {
    TrajectoryRecord r;
    r.vehicle_id = id;
    r.timestamp = ts;
    r.lat = lat;
    r.lon = lon;
    if (reading >= 0.0) r.readings = {reading};
    else r.readings = {std::numeric_limits<double>::quiet_NaN()};
    return r;
}

} // namespace

TEST_CASE("visits in the same cell, interval and day") {
    const SpatiotemporalIndex index(grid4());
    std::vector<TrajectoryRecord> records{rec("a", 100), rec("a", 200)};
    const VisitCounts counts = bin_visits(records, index);
    REQUIRE(counts.vehicle_ids == std::vector<std::string>{"a"});
    REQUIRE(counts.per_vehicle[0].idx.size() == 1);
    CHECK(counts.per_vehicle[0].count[0] == 2);
    CHECK(counts.per_vehicle[0].day_presence[0] == 1);
}

TEST_CASE("same cell and interval on two different days") {
    const SpatiotemporalIndex index(grid4());
    std::vector<TrajectoryRecord> records{rec("a", 100), rec("a", 100 + 86400)};
    const VisitCounts counts = bin_visits(records, index);
    REQUIRE(counts.per_vehicle[0].idx.size() == 1);
    CHECK(counts.per_vehicle[0].count[0] == 2);
    CHECK(counts.per_vehicle[0].day_presence[0] == 2);
    CHECK(counts.observed_day_keys.size() == 2);
}

TEST_CASE("out-of-bounds records increment the drop counter only") {
    const SpatiotemporalIndex index(grid4());
    std::vector<TrajectoryRecord> records{rec("a", 100), rec("a", 200, 60.0, 10.0)};
    const VisitCounts counts = bin_visits(records, index);
    CHECK(counts.per_vehicle[0].total_records == 2);
    CHECK(counts.per_vehicle[0].dropped_oob == 1);
    CHECK(counts.per_vehicle[0].count[0] == 1);
    CHECK(counts.total_dropped() == 1);
}

TEST_CASE("binning is permutation invariant") {
    const SpatiotemporalIndex index(grid4());
    Rng rng(11);
    std::vector<TrajectoryRecord> records;
    for (int i = 0; i < 300; ++i) {
        const std::string id = "v" + std::to_string(rng.uniform_int(0, 4));
        const double lat = 23.0 + rng.uniform(-0.005, 0.025);
        const double lon = 113.0 + rng.uniform(-0.005, 0.025);
        const std::int64_t ts = static_cast<std::int64_t>(rng.uniform_u64(4 * 86400));
        records.push_back(rec(id, ts, lat, lon));
    }
    const VisitCounts a = bin_visits(records, index);
    auto shuffled = records;
    rng.shuffle(shuffled);
    const VisitCounts b = bin_visits(shuffled, index);

    REQUIRE(a.vehicle_ids == b.vehicle_ids);
    for (std::size_t v = 0; v < a.per_vehicle.size(); ++v) {
        CHECK(a.per_vehicle[v].idx == b.per_vehicle[v].idx);
        CHECK(a.per_vehicle[v].count == b.per_vehicle[v].count);
        CHECK(a.per_vehicle[v].day_presence == b.per_vehicle[v].day_presence);
    }
    CHECK(a.observed_day_keys == b.observed_day_keys);

    // conservation: in-cell counts + drops = parsed records, per vehicle
    for (std::size_t v = 0; v < a.per_vehicle.size(); ++v) {
        std::int64_t cell_total = 0;
        for (auto c : a.per_vehicle[v].count) cell_total += c;
        CHECK(cell_total + a.per_vehicle[v].dropped_oob == a.per_vehicle[v].total_records);
        for (std::size_t i = 0; i < a.per_vehicle[v].idx.size(); ++i) {
            CHECK(a.per_vehicle[v].day_presence[i] <= a.per_vehicle[v].count[i]);
            CHECK(a.per_vehicle[v].day_presence[i] <= grid4().n_days);
        }
    }
}

TEST_CASE("reading aggregation sums and counts per cell") {
    const SpatiotemporalIndex index(grid4());
    std::vector<TrajectoryRecord> records{rec("a", 100, 23.001, 113.001, 10.0),
                                          rec("a", 200, 23.001, 113.001, 20.0)};
    const std::vector<std::string> pollutants{"PM2.5"};
    const ReadingAggregate agg = bin_readings(records, index, "PM2.5", pollutants);
    REQUIRE(agg.per_vehicle.size() == 1);
    REQUIRE(agg.per_vehicle[0].idx.size() == 1);
    CHECK(agg.per_vehicle[0].sum[0] == 30.0);
    CHECK(agg.per_vehicle[0].count[0] == 2);
}

TEST_CASE("fleet mean pools readings across vehicles") {
    const SpatiotemporalIndex index(grid4());
    std::vector<TrajectoryRecord> records{rec("a", 100, 23.001, 113.001, 10.0),
                                          rec("b", 130, 23.001, 113.001, 30.0)};
    const std::vector<std::string> pollutants{"PM2.5"};
    const ReadingAggregate agg = bin_readings(records, index, "PM2.5", pollutants);
    double sum = 0.0;
    std::int64_t count = 0;
    for (const auto& pv : agg.per_vehicle) {
        sum += pv.sum[0];
        count += pv.count[0];
    }
    CHECK(sum / count == 20.0); // means 10 and 30 with equal counts
}

TEST_CASE("absent pollutant raises an empty-aggregate error") {
    const SpatiotemporalIndex index(grid4());
    std::vector<TrajectoryRecord> records{rec("a", 100)}; // NaN reading
    const std::vector<std::string> pollutants{"PM2.5"};
    CHECK_THROWS_AS(bin_readings(records, index, "PM2.5", pollutants), ValidationError);
    CHECK_THROWS_AS(bin_readings(records, index, "O3", pollutants), ValidationError);
}
