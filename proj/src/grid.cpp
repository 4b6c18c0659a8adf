#include "fleetsense/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fleetsense/errors.hpp"
#include "fleetsense/rng.hpp"

namespace fleetsense {

namespace {
constexpr double kEarthRadiusM = 6371000.0;
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
constexpr double kMetersPerDegree = kEarthRadiusM * kDegToRad;
} // namespace

void GridSpec::validate() const {
    if (cell_size_m <= 0.0) throw ConfigError("cell_size_m must be positive");
    if (n_rows < 1 || n_cols < 1) throw ConfigError("grid dimensions must be at least 1x1");
    if (time_interval_minutes <= 0 || 1440 % time_interval_minutes != 0)
        throw ConfigError("time_interval_minutes must divide 1440 evenly, got " +
                          std::to_string(time_interval_minutes));
    if (n_days < 1) throw ConfigError("n_days must be at least 1");
    if (origin_lat < -90.0 || origin_lat > 90.0 || origin_lon < -180.0 || origin_lon > 180.0)
        throw ConfigError("grid origin outside valid lat/lon range");
    for (int leg : corner_cuts) {
        if (leg < 0) throw ConfigError("corner cut legs must be non-negative");
        if (leg > n_rows || leg > n_cols)
            throw ConfigError("corner cut leg exceeds grid dimension");
    }
}

std::string GridSpec::canonical() const {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "origin_lat=%.17g;origin_lon=%.17g;cell_size_m=%.17g;n_rows=%d;n_cols=%d;"
                  "time_interval_minutes=%d;n_days=%d;utc_offset_minutes=%d;"
                  "corner_cuts=%d,%d,%d,%d",
                  origin_lat, origin_lon, cell_size_m, n_rows, n_cols, time_interval_minutes,
                  n_days, utc_offset_minutes, corner_cuts[0], corner_cuts[1], corner_cuts[2],
                  corner_cuts[3]);
    return buf;
}

std::uint64_t GridSpec::hash() const { return hash_string(canonical()); }

GridSpec GridSpec::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open grid config: " + path);
    GridSpec spec;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.erase(hash_pos);
        std::istringstream ss(line);
        std::string key, eq;
        if (!(ss >> key)) continue;
        if (!(ss >> eq) || eq != "=")
            throw ConfigError("expected 'key = value' at " + path + ":" + std::to_string(lineno));
        auto read_double = [&](double& out) {
            if (!(ss >> out)) throw ConfigError("bad value for " + key + " in " + path);
        };
        auto read_int = [&](int& out) {
            if (!(ss >> out)) throw ConfigError("bad value for " + key + " in " + path);
        };
        if (key == "origin_lat") read_double(spec.origin_lat);
        else if (key == "origin_lon") read_double(spec.origin_lon);
        else if (key == "cell_size_m") read_double(spec.cell_size_m);
        else if (key == "n_rows") read_int(spec.n_rows);
        else if (key == "n_cols") read_int(spec.n_cols);
        else if (key == "time_interval_minutes") read_int(spec.time_interval_minutes);
        else if (key == "n_days") read_int(spec.n_days);
        else if (key == "utc_offset_minutes") read_int(spec.utc_offset_minutes);
        else if (key == "corner_cut_nw") read_int(spec.corner_cuts[0]);
        else if (key == "corner_cut_ne") read_int(spec.corner_cuts[1]);
        else if (key == "corner_cut_sw") read_int(spec.corner_cuts[2]);
        else if (key == "corner_cut_se") read_int(spec.corner_cuts[3]);
        else throw ConfigError("unknown grid config key '" + key + "' in " + path);
    }
    spec.validate();
    return spec;
}

void GridSpec::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write grid config: " + path);
    char buf[128];
    auto put_double = [&](const char* key, double v) {
        std::snprintf(buf, sizeof(buf), "%s = %.17g\n", key, v);
        out << buf;
    };
    put_double("origin_lat", origin_lat);
    put_double("origin_lon", origin_lon);
    put_double("cell_size_m", cell_size_m);
    out << "n_rows = " << n_rows << "\n";
    out << "n_cols = " << n_cols << "\n";
    out << "time_interval_minutes = " << time_interval_minutes << "\n";
    out << "n_days = " << n_days << "\n";
    out << "utc_offset_minutes = " << utc_offset_minutes << "\n";
    if (corner_cuts != std::array<int, 4>{0, 0, 0, 0}) {
        out << "corner_cut_nw = " << corner_cuts[0] << "\n";
        out << "corner_cut_ne = " << corner_cuts[1] << "\n";
        out << "corner_cut_sw = " << corner_cuts[2] << "\n";
        out << "corner_cut_se = " << corner_cuts[3] << "\n";
    }
    if (!out) throw IoError("failed writing grid config: " + path);
}

SpatiotemporalIndex::SpatiotemporalIndex(GridSpec spec) : spec_(spec) {
    spec_.validate();
    m_per_deg_lat_ = kMetersPerDegree;
    m_per_deg_lon_ = kMetersPerDegree * std::cos(spec_.origin_lat * kDegToRad);
    mask_.assign(static_cast<std::size_t>(spec_.n_cells()), 1);
    const int R = spec_.n_rows, C = spec_.n_cols;
    for (int row = 0; row < R; ++row) {
        for (int col = 0; col < C; ++col) {
            const int from_n = R - 1 - row; // row 0 is the southern edge
            const int from_e = C - 1 - col;
            const bool cut = (from_n + col) < spec_.corner_cuts[0] ||
                             (from_n + from_e) < spec_.corner_cuts[1] ||
                             (row + col) < spec_.corner_cuts[2] ||
                             (row + from_e) < spec_.corner_cuts[3];
            if (cut) mask_[static_cast<std::size_t>(row) * C + col] = 0;
        }
    }
    domain_cells_ = 0;
    for (auto m : mask_) domain_cells_ += m;
}

std::optional<SpatiotemporalIndex::Located>
SpatiotemporalIndex::locate(double lat, double lon, std::int64_t timestamp_utc) const {
    const double x = (lon - spec_.origin_lon) * m_per_deg_lon_;
    const double y = (lat - spec_.origin_lat) * m_per_deg_lat_;
    const double col_f = std::floor(x / spec_.cell_size_m);
    const double row_f = std::floor(y / spec_.cell_size_m);
    if (col_f < 0.0 || col_f >= spec_.n_cols || row_f < 0.0 || row_f >= spec_.n_rows)
        return std::nullopt;
    const int col = static_cast<int>(col_f);
    const int row = static_cast<int>(row_f);
    const int g = row * spec_.n_cols + col;
    if (!in_domain(g)) return std::nullopt;

    const std::int64_t local = timestamp_utc + 60LL * spec_.utc_offset_minutes;
    std::int64_t day = local / 86400;
    std::int64_t secs = local % 86400;
    if (secs < 0) {
        secs += 86400;
        day -= 1;
    }
    const int t = static_cast<int>(secs / 60) / spec_.time_interval_minutes;
    return Located{g, t, day};
}

std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 +
                         static_cast<unsigned>(d) - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

} // namespace fleetsense
