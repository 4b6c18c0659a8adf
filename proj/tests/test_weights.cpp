#include <doctest.h>

#include "fleetsense/weights.hpp"
#include "fleetsense/errors.hpp"
#include "testutil.hpp"

using namespace fleetsense;
using testutil::TempDir;
using testutil::write_file;

namespace {

GridSpec grid_2x2() {
    GridSpec g;
    g.n_rows = 2;
    g.n_cols = 2;
    g.time_interval_minutes = 720; // T = 2
    g.n_days = 1;
    return g;
}

TargetVector target_from(std::initializer_list<double> vals) {
    TargetVector t;
    t.value = Eigen::VectorXd(static_cast<Index>(vals.size()));
    Index i = 0;
    for (double v : vals) t.value[i++] = v;
    t.observed.assign(vals.size(), 1);
    t.n_observed = static_cast<int>(vals.size());
    return t;
}

FeatureTable static_table(std::vector<std::string> names, const Eigen::MatrixXd& values) {
    FeatureTable ft;
    ft.kind = FeatureTable::Kind::StaticSpatial;
    ft.names = std::move(names);
    ft.values = values;
    return ft;
}

} // namespace

TEST_CASE("pearson correlation extremes") {
    const TargetVector target = target_from({1.0, 2.0, 5.0, 9.0});
    Eigen::MatrixXd values(4, 3);
    values.col(0) << 1.0, 2.0, 5.0, 9.0;     // identical
    values.col(1) << 3.0, 3.0, 3.0, 3.0;     // constant
    values.col(2) << -1.0, -2.0, -5.0, -9.0; // exact negation
    const auto r = correlate_features(static_table({"same", "const", "neg"}, values), target);
    CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r[1] == 0.0);
    CHECK(r[2] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("correlation needs at least 3 paired observations") {
    TargetVector target = target_from({1.0, 2.0, 5.0});
    target.observed = {1, 1, 0};
    target.n_observed = 2;
    Eigen::MatrixXd values(3, 1);
    values.col(0) << 1.0, 2.0, 3.0;
    CHECK_THROWS_AS(correlate_features(static_table({"f"}, values), target),
                    InsufficientDataError);
}

TEST_CASE("uniform variant ignores features entirely") {
    const GridSpec grid = grid_2x2();
    const WeightField f =
        build_weight_field(nullptr, {}, nullptr, {}, WeightVariant::Uniform, 0.01, grid);
    CHECK((f.w == 1.0).all());
    CHECK(f.variant == WeightVariant::Uniform);
}

TEST_CASE("single binary static feature maps to the floor and 1") {
    const GridSpec grid = grid_2x2();
    Eigen::MatrixXd values(4, 1);
    values.col(0) << 0.0, 1.0, 1.0, 0.0;
    const FeatureTable ft = static_table({"z"}, values);
    const double r[] = {1.0};
    const WeightField f =
        build_weight_field(&ft, r, nullptr, {}, WeightVariant::SpatialOnly, 0.01, grid);
    // cells with z=0 sit at the floor, z=1 at the top, replicated over t
    for (Index g = 0; g < 4; ++g) {
        for (Index t = 0; t < 2; ++t) {
            const double expected = values(g, 0) == 0.0 ? 0.01 : 1.0;
            CHECK(f.w[g * 2 + t] == doctest::Approx(expected).epsilon(1e-15));
        }
    }
    CHECK(f.w.maxCoeff() == 1.0);
    CHECK(f.w.minCoeff() == doctest::Approx(0.01).epsilon(1e-15));
}

TEST_CASE("full variant with unit spatial score equals the temporal-only field") {
    const GridSpec grid = grid_2x2();
    // two complementary binary features with |r| = 1 blend to s(g) = 1 exactly
    Eigen::MatrixXd sv(4, 2);
    sv.col(0) << 0.0, 1.0, 0.0, 1.0;
    sv.col(1) << 1.0, 0.0, 1.0, 0.0;
    const FeatureTable st = static_table({"a", "b"}, sv);

    Eigen::MatrixXd dv(8, 1);
    dv.col(0) << 0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0;
    FeatureTable dt;
    dt.kind = FeatureTable::Kind::DynamicSpatiotemporal;
    dt.names = {"d"};
    dt.values = dv;

    const double rs[] = {1.0, -1.0};
    const double rd[] = {0.8};
    const WeightField full =
        build_weight_field(&st, rs, &dt, rd, WeightVariant::Full, 0.01, grid);
    const WeightField temporal =
        build_weight_field(nullptr, {}, &dt, rd, WeightVariant::TemporalOnly, 0.01, grid);
    CHECK((full.w - temporal.w).abs().maxCoeff() == 0.0);
    CHECK(temporal.w.minCoeff() == doctest::Approx(0.01));
    CHECK(temporal.w.maxCoeff() == 1.0);
}

TEST_CASE("a lone constant feature yields no variation and falls back to uniform") {
    const GridSpec grid = grid_2x2();
    Eigen::MatrixXd sv(4, 1);
    sv.col(0) << 2.0, 2.0, 2.0, 2.0;
    const FeatureTable st = static_table({"c"}, sv);
    const double rs[] = {0.0};
    std::vector<std::string> warnings;
    const WeightField f = build_weight_field(&st, rs, nullptr, {}, WeightVariant::SpatialOnly,
                                             0.01, grid, &warnings);
    CHECK((f.w == 1.0).all());
    CHECK(warnings.size() == 1);
}

TEST_CASE("full variant multiplies spatial and temporal structure") {
    const GridSpec grid = grid_2x2();
    Eigen::MatrixXd sv(4, 1);
    sv.col(0) << 0.0, 1.0, 0.5, 0.25;
    const FeatureTable st = static_table({"s"}, sv);
    Eigen::MatrixXd dv(8, 1);
    for (Index i = 0; i < 8; ++i) dv(i, 0) = static_cast<double>(i % 2); // t parity
    FeatureTable dt;
    dt.kind = FeatureTable::Kind::DynamicSpatiotemporal;
    dt.names = {"d"};
    dt.values = dv;
    const double r1[] = {1.0};
    const WeightField f = build_weight_field(&st, r1, &dt, r1, WeightVariant::Full, 0.01, grid);
    // raw product is s(g) * parity(t); max at (g=1, t=1), min 0
    CHECK(f.w[1 * 2 + 1] == 1.0);
    CHECK(f.w[0 * 2 + 0] == doctest::Approx(0.01));
    CHECK((f.w >= 0.01 - 1e-15).all());
    CHECK((f.w <= 1.0).all());
}

TEST_CASE("weight fields are invariant to positive affine feature rescaling") {
    // min-max scaling absorbs a*x + b for a > 0 and Pearson r is unchanged;
    // a < 0 mirrors the min-max z, so only the |r| side is sign-invariant
    const GridSpec grid = grid_2x2();
    Rng rng(17);
    Eigen::MatrixXd values(4, 2);
    for (Index i = 0; i < 4; ++i)
        for (Index k = 0; k < 2; ++k) values(i, k) = rng.uniform(0.0, 10.0);
    const TargetVector target = target_from({3.0, 1.0, 7.0, 5.0});

    const FeatureTable ft = static_table({"a", "b"}, values);
    const auto r = correlate_features(ft, target);
    const WeightField f =
        build_weight_field(&ft, r, nullptr, {}, WeightVariant::SpatialOnly, 0.01, grid);

    Eigen::MatrixXd rescaled = values;
    rescaled.col(0) = values.col(0) * 3.5;
    rescaled.col(0).array() += 11.0;
    rescaled.col(1) = values.col(1) * 0.25;
    rescaled.col(1).array() -= 2.0;
    const FeatureTable ft2 = static_table({"a", "b"}, rescaled);
    const auto r2 = correlate_features(ft2, target);
    const WeightField f2 =
        build_weight_field(&ft2, r2, nullptr, {}, WeightVariant::SpatialOnly, 0.01, grid);
    CHECK((f.w - f2.w).abs().maxCoeff() < 1e-12);

    // sign flip: |r| is preserved even though z mirrors
    Eigen::MatrixXd negated = values;
    negated.col(1) = values.col(1) * -2.0;
    const auto r3 = correlate_features(static_table({"a", "b"}, negated), target);
    CHECK(std::abs(r3[1]) == doctest::Approx(std::abs(r[1])).epsilon(1e-12));
}

TEST_CASE("all-zero raw field falls back to uniform with a warning") {
    const GridSpec grid = grid_2x2();
    Eigen::MatrixXd values = Eigen::MatrixXd::Zero(4, 1);
    const FeatureTable ft = static_table({"flat"}, values);
    const double r[] = {0.0};
    std::vector<std::string> warnings;
    const WeightField f = build_weight_field(&ft, r, nullptr, {}, WeightVariant::SpatialOnly,
                                             0.01, grid, &warnings);
    CHECK((f.w == 1.0).all());
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("uniform") != std::string::npos);
}

TEST_CASE("weight field save/load round-trip is exact") {
    TempDir tmp;
    const GridSpec grid = grid_2x2();
    Rng rng(5);
    WeightField f = testutil::random_weights(rng, grid.layer_size());
    f.variant = WeightVariant::Full;
    f.epsilon_floor = 0.01;
    const std::string path = tmp.file("w.csv");
    save_weight_field(f, grid, path);
    const WeightField back = load_weight_field(path, grid);
    CHECK(back.variant == WeightVariant::Full);
    CHECK(back.epsilon_floor == 0.01);
    CHECK((back.w - f.w).abs().maxCoeff() == 0.0);
}

TEST_CASE("weight field loader validates range and completeness") {
    TempDir tmp;
    const GridSpec grid = grid_2x2();
    const std::string path = tmp.file("w.csv");

    SUBCASE("w outside [0,1]") {
        write_file(path, "# variant=full epsilon_floor=0.01\ng,t,w\n"
                         "0,0,0.5\n0,1,1.2\n1,0,0.5\n1,1,0.5\n2,0,0.5\n2,1,0.5\n"
                         "3,0,0.5\n3,1,0.5\n");
        CHECK_THROWS_AS(load_weight_field(path, grid), ValidationError);
    }
    SUBCASE("a missing cell is reported by name") {
        write_file(path, "# variant=full epsilon_floor=0.01\ng,t,w\n"
                         "0,0,0.5\n0,1,0.5\n1,0,0.5\n1,1,0.5\n2,0,0.5\n2,1,0.5\n"
                         "3,0,0.5\n");
        try {
            load_weight_field(path, grid);
            FAIL("expected gap error");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("(3,1)") != std::string::npos);
        }
    }
    SUBCASE("header is mandatory") {
        write_file(path, "g,t,w\n0,0,0.5\n");
        CHECK_THROWS_AS(load_weight_field(path, grid), SchemaError);
    }
}

TEST_CASE("feature table io round-trip") {
    TempDir tmp;
    const GridSpec grid = grid_2x2();
    Rng rng(3);
    FeatureTable ft;
    ft.kind = FeatureTable::Kind::DynamicSpatiotemporal;
    ft.names = {"congestion_index", "ambient"};
    ft.values.resize(8, 2);
    for (Index i = 0; i < 8; ++i)
        for (Index k = 0; k < 2; ++k) ft.values(i, k) = rng.uniform(0.0, 2.0);
    const std::string path = tmp.file("dyn.csv");
    save_feature_table(ft, grid, path);
    const FeatureTable back = load_dynamic_features(path, grid);
    CHECK(back.names == ft.names);
    CHECK((back.values - ft.values).cwiseAbs().maxCoeff() == 0.0);

    // a static table with a missing row is rejected
    testutil::write_file(tmp.file("static.csv"), "g,f\n0,1\n1,2\n2,3\n");
    CHECK_THROWS_AS(load_static_features(tmp.file("static.csv"), grid), ValidationError);
}
