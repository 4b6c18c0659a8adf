#include <doctest.h>

#include "fleetsense/grid.hpp"
#include "fleetsense/errors.hpp"
#include "testutil.hpp"

using namespace fleetsense;

namespace {

GridSpec small_grid() {
    GridSpec g;
    g.origin_lat = 23.0;
    g.origin_lon = 113.0;
    g.cell_size_m = 500.0;
    g.n_rows = 4;
    g.n_cols = 4;
    g.time_interval_minutes = 60;
    g.n_days = 1;
    return g;
}

} // namespace

TEST_CASE("grid spec validation") {
    GridSpec g = small_grid();
    CHECK_NOTHROW(g.validate());
    CHECK(g.layer_size() == 16 * 24); // 4x4 cells, hourly intervals -> 384

    g.time_interval_minutes = 7; // 1440 % 7 != 0
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g = small_grid();
    g.n_rows = 0;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g = small_grid();
    g.cell_size_m = -5;
    CHECK_THROWS_AS(g.validate(), ConfigError);
}

TEST_CASE("locate maps the origin to cell 0 at local midnight") {
    const SpatiotemporalIndex index(small_grid());
    const std::int64_t midnight = 86400LL * 19800; // any utc midnight, offset 0
    const auto loc = index.locate(23.0, 113.0, midnight);
    REQUIRE(loc.has_value());
    CHECK(loc->g == 0);
    CHECK(loc->t == 0);
}

TEST_CASE("points just west of the origin are out of bounds") {
    const SpatiotemporalIndex index(small_grid());
    // 0.1 m west
    const double lon = 113.0 - 0.1 / (111194.92664455873 * std::cos(23.0 * M_PI / 180.0));
    CHECK_FALSE(index.locate(23.0, lon, 0).has_value());
    // north edge is exclusive too
    const double lat_past = 23.0 + (4 * 500.0 + 0.1) / 111194.92664455873;
    CHECK_FALSE(index.locate(lat_past, 113.0, 0).has_value());
}

TEST_CASE("cells are half-open along both axes") {
    const SpatiotemporalIndex index(small_grid());
    const double m_lon = 111194.92664455873 * std::cos(23.0 * M_PI / 180.0);
    // just east / west of the first interior edge
    const auto east = index.locate(23.0, 113.0 + 500.01 / m_lon, 0);
    const auto west = index.locate(23.0, 113.0 + 499.99 / m_lon, 0);
    REQUIRE(east.has_value());
    REQUIRE(west.has_value());
    CHECK(east->g == 1);
    CHECK(west->g == 0);

    // the time axis is integral, so the boundary convention is exact there:
    // the first second of hour 1 belongs to interval 1
    const auto t_edge = index.locate(23.0, 113.0, 3600);
    REQUIRE(t_edge.has_value());
    CHECK(t_edge->t == 1);
    const auto t_before = index.locate(23.0, 113.0, 3599);
    REQUIRE(t_before.has_value());
    CHECK(t_before->t == 0);
}

TEST_CASE("time intervals and local-day handling") {
    GridSpec g = small_grid();
    g.utc_offset_minutes = 480; // UTC+8
    const SpatiotemporalIndex index(g);
    // 2023-03-01 00:30 local = 2023-02-28 16:30 UTC
    const std::int64_t ts = days_from_civil(2023, 3, 1) * 86400 + 30 * 60 - 480 * 60;
    const auto loc = index.locate(23.0, 113.0, ts);
    REQUIRE(loc.has_value());
    CHECK(loc->t == 0);
    CHECK(loc->day_key == days_from_civil(2023, 3, 1));

    // 23:59 local falls in the last interval of the same local day
    const std::int64_t late = days_from_civil(2023, 3, 1) * 86400 + (23 * 60 + 59) * 60 - 480 * 60;
    const auto loc2 = index.locate(23.0, 113.0, late);
    REQUIRE(loc2.has_value());
    CHECK(loc2->t == 23);
    CHECK(loc2->day_key == days_from_civil(2023, 3, 1));
}

TEST_CASE("rebuilding the index maps points identically") {
    const GridSpec g = small_grid();
    const SpatiotemporalIndex a(g), b(g);
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const double lat = 23.0 + rng.uniform(-0.01, 0.03);
        const double lon = 113.0 + rng.uniform(-0.01, 0.03);
        const std::int64_t ts = static_cast<std::int64_t>(rng.uniform_u64(400000000));
        const auto la = a.locate(lat, lon, ts);
        const auto lb = b.locate(lat, lon, ts);
        CHECK(la.has_value() == lb.has_value());
        if (la && lb) {
            CHECK(la->g == lb->g);
            CHECK(la->t == lb->t);
            CHECK(la->day_key == lb->day_key);
        }
    }
}

TEST_CASE("corner cuts mask the expected number of cells") {
    GridSpec g = small_grid();
    g.n_rows = 62;
    g.n_cols = 62;
    g.corner_cuts = {7, 2, 1, 1};
    const SpatiotemporalIndex index(g);
    CHECK(index.domain_cell_count() == 3811); // 3844 - (28 + 3 + 1 + 1)

    // the SW corner cell is cut (leg 1)
    CHECK_FALSE(index.in_domain(0));
    CHECK(index.in_domain(1));
    // a cut cell rejects points that fall inside it
    CHECK_FALSE(index.locate(23.0001, 113.0001, 0).has_value());
}

TEST_CASE("grid config file round-trip") {
    const testutil::TempDir tmp;
    GridSpec g = small_grid();
    g.utc_offset_minutes = 480;
    g.corner_cuts = {2, 0, 0, 1};
    const std::string path = tmp.file("grid.cfg");
    g.save(path);
    const GridSpec back = GridSpec::from_file(path);
    CHECK(back.canonical() == g.canonical());
    CHECK(back.hash() == g.hash());
}

TEST_CASE("grid config rejects unknown keys and bad values") {
    const testutil::TempDir tmp;
    const std::string path = tmp.file("bad.cfg");
    testutil::write_file(path, "n_rows = 4\nn_cols = 4\nwhatever = 3\n");
    CHECK_THROWS_AS(GridSpec::from_file(path), ConfigError);
    testutil::write_file(path, "n_rows = 4\nn_cols = 4\ntime_interval_minutes = 37\n");
    CHECK_THROWS_AS(GridSpec::from_file(path), ConfigError);
    CHECK_THROWS_AS(GridSpec::from_file(tmp.file("missing.cfg")), IoError);
}
