#include "fleetsense/weights.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fleetsense/csv.hpp"
#include "fleetsense/errors.hpp"
#include "fleetsense/summation.hpp"

namespace fleetsense {

std::string to_string(WeightVariant v) {
    switch (v) {
    case WeightVariant::Uniform: return "uniform";
    case WeightVariant::SpatialOnly: return "spatial_only";
    case WeightVariant::TemporalOnly: return "temporal_only";
    case WeightVariant::Full: return "full";
    }
    return "uniform";
}

WeightVariant weight_variant_from_string(const std::string& s) {
    if (s == "uniform") return WeightVariant::Uniform;
    if (s == "spatial_only") return WeightVariant::SpatialOnly;
    if (s == "temporal_only") return WeightVariant::TemporalOnly;
    if (s == "full") return WeightVariant::Full;
    throw ConfigError("unknown weight variant '" + s +
                      "' (expected uniform|spatial_only|temporal_only|full)");
}

namespace {

FeatureTable load_features(const std::string& path, const GridSpec& grid, bool dynamic) {
    CsvReader csv(path);
    const int col_g = csv.column("g");
    const int col_t = dynamic ? csv.column("t") : -1;
    if (col_g < 0) throw SchemaError("feature table missing column 'g': " + path);
    if (dynamic && col_t < 0) throw SchemaError("dynamic feature table missing column 't': " + path);

    FeatureTable table;
    table.kind = dynamic ? FeatureTable::Kind::DynamicSpatiotemporal
                         : FeatureTable::Kind::StaticSpatial;
    std::vector<int> feature_cols;
    for (std::size_t i = 0; i < csv.header().size(); ++i) {
        const int ii = static_cast<int>(i);
        if (ii == col_g || ii == col_t) continue;
        table.names.push_back(csv.header()[i]);
        feature_cols.push_back(ii);
    }
    if (table.names.empty()) throw SchemaError("feature table has no feature columns: " + path);

    const Index n_rows = dynamic ? grid.layer_size() : grid.n_cells();
    table.values.resize(n_rows, static_cast<Index>(table.names.size()));
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(n_rows), 0);

    std::vector<std::string> fields;
    while (csv.next(fields)) {
        if (fields.size() != csv.header().size())
            throw SchemaError("malformed row at " + path + ":" + std::to_string(csv.line_number()));
        long long g, t = 0;
        if (!parse_int64(fields[static_cast<std::size_t>(col_g)], g) || g < 0 ||
            g >= grid.n_cells())
            throw ValidationError("cell index out of range at " + path + ":" +
                                  std::to_string(csv.line_number()));
        if (dynamic) {
            if (!parse_int64(fields[static_cast<std::size_t>(col_t)], t) || t < 0 ||
                t >= grid.n_intervals())
                throw ValidationError("interval index out of range at " + path + ":" +
                                      std::to_string(csv.line_number()));
        }
        const Index row = dynamic ? static_cast<Index>(g) * grid.n_intervals() + t
                                  : static_cast<Index>(g);
        if (seen[static_cast<std::size_t>(row)]++)
            throw ValidationError("duplicate row for index " + std::to_string(row) + " in " + path);
        for (std::size_t k = 0; k < feature_cols.size(); ++k) {
            double v;
            if (!parse_double(fields[static_cast<std::size_t>(feature_cols[k])], v) ||
                !std::isfinite(v))
                throw ValidationError("non-finite feature value at " + path + ":" +
                                      std::to_string(csv.line_number()));
            table.values(row, static_cast<Index>(k)) = v;
        }
    }
    for (Index r = 0; r < n_rows; ++r)
        if (!seen[static_cast<std::size_t>(r)])
            throw ValidationError("feature table " + path + " missing row for index " +
                                  std::to_string(r));
    return table;
}

} // namespace

FeatureTable load_static_features(const std::string& path, const GridSpec& grid) {
    return load_features(path, grid, false);
}

FeatureTable load_dynamic_features(const std::string& path, const GridSpec& grid) {
    return load_features(path, grid, true);
}

void save_feature_table(const FeatureTable& table, const GridSpec& grid,
                        const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write feature table: " + path);
    const bool dynamic = table.kind == FeatureTable::Kind::DynamicSpatiotemporal;
    out << "g";
    if (dynamic) out << ",t";
    for (const auto& n : table.names) out << "," << n;
    out << "\n";
    const int T = grid.n_intervals();
    for (Index r = 0; r < table.values.rows(); ++r) {
        if (dynamic) out << (r / T) << "," << (r % T);
        else out << r;
        for (Index k = 0; k < table.values.cols(); ++k)
            out << "," << format_double(table.values(r, k));
        out << "\n";
    }
    if (!out) throw IoError("failed writing feature table: " + path);
}

TargetVector mean_by_cell(const ReadingAggregate& agg, const GridSpec& grid) {
    const int T = grid.n_intervals();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(grid.n_cells());
    Eigen::VectorXd count = Eigen::VectorXd::Zero(grid.n_cells());
    for (const auto& pv : agg.per_vehicle) {
        for (std::size_t i = 0; i < pv.idx.size(); ++i) {
            const Index g = static_cast<Index>(pv.idx[i]) / T;
            sum[g] += pv.sum[i];
            count[g] += pv.count[i];
        }
    }
    TargetVector out;
    out.value = Eigen::VectorXd::Zero(grid.n_cells());
    out.observed.assign(static_cast<std::size_t>(grid.n_cells()), 0);
    for (Index g = 0; g < grid.n_cells(); ++g) {
        if (count[g] > 0) {
            out.value[g] = sum[g] / count[g];
            out.observed[static_cast<std::size_t>(g)] = 1;
            ++out.n_observed;
        }
    }
    return out;
}

TargetVector mean_by_point(const ReadingAggregate& agg, const GridSpec& grid) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(grid.layer_size());
    Eigen::VectorXd count = Eigen::VectorXd::Zero(grid.layer_size());
    for (const auto& pv : agg.per_vehicle) {
        for (std::size_t i = 0; i < pv.idx.size(); ++i) {
            sum[static_cast<Index>(pv.idx[i])] += pv.sum[i];
            count[static_cast<Index>(pv.idx[i])] += pv.count[i];
        }
    }
    TargetVector out;
    out.value = Eigen::VectorXd::Zero(grid.layer_size());
    out.observed.assign(static_cast<std::size_t>(grid.layer_size()), 0);
    for (Index s = 0; s < grid.layer_size(); ++s) {
        if (count[s] > 0) {
            out.value[s] = sum[s] / count[s];
            out.observed[static_cast<std::size_t>(s)] = 1;
            ++out.n_observed;
        }
    }
    return out;
}

std::vector<double> correlate_features(const FeatureTable& features, const TargetVector& target) {
    if (features.values.rows() != target.value.size())
        throw DimensionError("feature table and target have different row counts");
    if (target.n_observed < 3)
        throw InsufficientDataError("need at least 3 observed rows for correlation, have " +
                                    std::to_string(target.n_observed));
    const Index n = features.values.rows();
    const double m = target.n_observed;

    double ty = 0.0;
    for (Index r = 0; r < n; ++r)
        if (target.observed[static_cast<std::size_t>(r)]) ty += target.value[r];
    const double mean_y = ty / m;
    double var_y = 0.0;
    for (Index r = 0; r < n; ++r)
        if (target.observed[static_cast<std::size_t>(r)]) {
            const double d = target.value[r] - mean_y;
            var_y += d * d;
        }

    std::vector<double> out(static_cast<std::size_t>(features.values.cols()), 0.0);
    if (var_y <= 0.0) return out;
    for (Index k = 0; k < features.values.cols(); ++k) {
        double tx = 0.0;
        for (Index r = 0; r < n; ++r)
            if (target.observed[static_cast<std::size_t>(r)]) tx += features.values(r, k);
        const double mean_x = tx / m;
        double var_x = 0.0, cov = 0.0;
        for (Index r = 0; r < n; ++r) {
            if (!target.observed[static_cast<std::size_t>(r)]) continue;
            const double dx = features.values(r, k) - mean_x;
            const double dy = target.value[r] - mean_y;
            var_x += dx * dx;
            cov += dx * dy;
        }
        out[static_cast<std::size_t>(k)] = var_x > 0.0 ? cov / std::sqrt(var_x * var_y) : 0.0;
    }
    return out;
}

namespace {

// per-feature min-max scaling to [0, 1]; constant columns scale to 0
Eigen::VectorXd blended_score(const FeatureTable& table, std::span<const double> r) {
    if (r.size() != static_cast<std::size_t>(table.values.cols()))
        throw DimensionError("correlation count does not match feature count");
    Eigen::VectorXd score = Eigen::VectorXd::Zero(table.values.rows());
    for (Index k = 0; k < table.values.cols(); ++k) {
        const auto col = table.values.col(k);
        const double lo = col.minCoeff(), hi = col.maxCoeff();
        if (hi > lo) {
            const double abs_r = std::abs(r[static_cast<std::size_t>(k)]);
            score += abs_r * ((col.array() - lo) / (hi - lo)).matrix();
        }
    }
    return score;
}

} // namespace

WeightField build_weight_field(const FeatureTable* static_features,
                               std::span<const double> static_r,
                               const FeatureTable* dynamic_features,
                               std::span<const double> dynamic_r, WeightVariant variant,
                               double epsilon_floor, const GridSpec& grid,
                               std::vector<std::string>* warnings) {
    if (variant == WeightVariant::Uniform) return WeightField::uniform(grid);
    if (!(epsilon_floor > 0.0 && epsilon_floor < 1.0))
        throw ConfigError("epsilon_floor must lie in (0, 1)");

    const int T = grid.n_intervals();
    const Index n = grid.layer_size();

    Eigen::VectorXd spatial, temporal;
    if (variant == WeightVariant::SpatialOnly || variant == WeightVariant::Full) {
        if (!static_features || static_features->kind != FeatureTable::Kind::StaticSpatial)
            throw ConfigError("variant " + to_string(variant) + " requires a static feature table");
        spatial = blended_score(*static_features, static_r);
    }
    if (variant == WeightVariant::TemporalOnly || variant == WeightVariant::Full) {
        if (!dynamic_features ||
            dynamic_features->kind != FeatureTable::Kind::DynamicSpatiotemporal)
            throw ConfigError("variant " + to_string(variant) + " requires a dynamic feature table");
        temporal = blended_score(*dynamic_features, dynamic_r);
    }

    Layer raw(n);
    for (Index s = 0; s < n; ++s) {
        const Index g = s / T;
        switch (variant) {
        case WeightVariant::SpatialOnly: raw[s] = spatial[g]; break;
        case WeightVariant::TemporalOnly: raw[s] = temporal[s]; break;
        case WeightVariant::Full: raw[s] = spatial[g] * temporal[s]; break;
        case WeightVariant::Uniform: raw[s] = 1.0; break;
        }
    }

    const double lo = raw.minCoeff(), hi = raw.maxCoeff();
    WeightField field;
    field.variant = variant;
    field.epsilon_floor = epsilon_floor;
    if (!(hi > lo)) {
        if (warnings)
            warnings->push_back("weight field has no variation (" + to_string(variant) +
                                "); falling back to uniform weights");
        field.w = Layer::Ones(n);
        return field;
    }
    field.w = (epsilon_floor + (raw - lo) / (hi - lo) * (1.0 - epsilon_floor))
                  .min(1.0)
                  .max(epsilon_floor);
    return field;
}

void save_weight_field(const WeightField& field, const GridSpec& grid, const std::string& path) {
    if (field.w.size() != grid.layer_size())
        throw DimensionError("weight field does not match grid layer size");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write weight field: " + path);
    out << "# variant=" << to_string(field.variant)
        << " epsilon_floor=" << format_double(field.epsilon_floor) << "\n";
    out << "g,t,w\n";
    const int T = grid.n_intervals();
    for (Index s = 0; s < field.w.size(); ++s)
        out << (s / T) << "," << (s % T) << "," << format_double(field.w[s]) << "\n";
    if (!out) throw IoError("failed writing weight field: " + path);
}

WeightField load_weight_field(const std::string& path, const GridSpec& grid) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open weight field: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# variant=", 0) != 0)
        throw SchemaError("weight field missing '# variant=...' header: " + path);
    WeightField field;
    {
        std::istringstream ss(line.substr(2));
        std::string tok;
        while (ss >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
            if (key == "variant") field.variant = weight_variant_from_string(val);
            else if (key == "epsilon_floor") field.epsilon_floor = std::stod(val);
        }
    }
    if (!std::getline(in, line) || (line != "g,t,w" && line != "g,t,w\r"))
        throw SchemaError("weight field missing 'g,t,w' header: " + path);

    const int T = grid.n_intervals();
    const Index n = grid.layer_size();
    field.w = Layer::Zero(n);
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(n), 0);
    std::vector<std::string> fields;
    std::size_t lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        split_line(line, ',', fields);
        long long g, t;
        double w;
        if (fields.size() != 3 || !parse_int64(fields[0], g) || !parse_int64(fields[1], t) ||
            !parse_double(fields[2], w))
            throw SchemaError("malformed weight row at " + path + ":" + std::to_string(lineno));
        if (g < 0 || g >= grid.n_cells() || t < 0 || t >= T)
            throw ValidationError("weight cell (" + std::to_string(g) + "," + std::to_string(t) +
                                  ") out of range in " + path);
        if (!(w >= 0.0 && w <= 1.0))
            throw ValidationError("weight w=" + format_double(w) + " outside [0, 1] at cell (" +
                                  std::to_string(g) + "," + std::to_string(t) + ") in " + path);
        const Index s = static_cast<Index>(g) * T + t;
        if (seen[static_cast<std::size_t>(s)]++)
            throw ValidationError("duplicate weight for cell (" + std::to_string(g) + "," +
                                  std::to_string(t) + ") in " + path);
        field.w[s] = w;
    }
    std::string gaps;
    int n_gaps = 0;
    for (Index s = 0; s < n; ++s) {
        if (!seen[static_cast<std::size_t>(s)]) {
            ++n_gaps;
            if (n_gaps <= 5)
                gaps += " (" + std::to_string(s / T) + "," + std::to_string(s % T) + ")";
        }
    }
    if (n_gaps > 0)
        throw ValidationError("weight field " + path + " missing " + std::to_string(n_gaps) +
                              " cell(s):" + gaps + (n_gaps > 5 ? " ..." : ""));
    return field;
}

} // namespace fleetsense
