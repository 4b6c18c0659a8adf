#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fleetsense/binning.hpp"
#include "fleetsense/grid.hpp"

namespace fleetsense {

enum class WeightVariant { Uniform, SpatialOnly, TemporalOnly, Full };

std::string to_string(WeightVariant v);
WeightVariant weight_variant_from_string(const std::string& s);

// Tabular context features. Static tables have one row per cell g; dynamic
// tables one row per flattened (g, t) point.
struct FeatureTable {
    enum class Kind { StaticSpatial, DynamicSpatiotemporal };
    Kind kind = Kind::StaticSpatial;
    std::vector<std::string> names;
    Eigen::MatrixXd values; // [g][feature] or [s][feature]
};

FeatureTable load_static_features(const std::string& path, const GridSpec& grid);
FeatureTable load_dynamic_features(const std::string& path, const GridSpec& grid);
void save_feature_table(const FeatureTable& table, const GridSpec& grid,
                        const std::string& path);

// w_{g,t} importance weights over the sensing space, normalized into
// [epsilon_floor, 1] so no cell is invisible to selection.
struct WeightField {
    Layer w;
    WeightVariant variant = WeightVariant::Uniform;
    double epsilon_floor = 0.01;

    static WeightField uniform(const GridSpec& grid) {
        WeightField f;
        f.w = Layer::Ones(grid.layer_size());
        f.variant = WeightVariant::Uniform;
        f.epsilon_floor = 1.0;
        return f;
    }
};

// Mean observed concentration with an observation mask; the regression
// targets for feature correlation.
struct TargetVector {
    Eigen::VectorXd value;
    std::vector<std::uint8_t> observed;
    int n_observed = 0;
};

TargetVector mean_by_cell(const ReadingAggregate& agg, const GridSpec& grid);  // per g
TargetVector mean_by_point(const ReadingAggregate& agg, const GridSpec& grid); // per s

// Pearson correlation of each feature column against the target, over rows
// where the target is observed. Zero-variance features get r = 0. Fewer than
// 3 paired observations throws InsufficientDataError.
std::vector<double> correlate_features(const FeatureTable& features, const TargetVector& target);

// Raw spatial score s(g) = sum_k |r_k| z_k(g) over min-max scaled static
// features; temporal score d(g,t) analogous over dynamic features. Variants
// combine them (uniform: 1, spatial_only: s, temporal_only: d, full: s*d),
// then the whole field is min-max normalized into [epsilon_floor, 1].
// A flat raw field falls back to uniform weights with a warning.
WeightField build_weight_field(const FeatureTable* static_features,
                               std::span<const double> static_r,
                               const FeatureTable* dynamic_features,
                               std::span<const double> dynamic_r, WeightVariant variant,
                               double epsilon_floor, const GridSpec& grid,
                               std::vector<std::string>* warnings = nullptr);

void save_weight_field(const WeightField& field, const GridSpec& grid, const std::string& path);
WeightField load_weight_field(const std::string& path, const GridSpec& grid);

} // namespace fleetsense
