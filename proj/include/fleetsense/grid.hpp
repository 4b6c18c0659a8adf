#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fleetsense {

using Index = Eigen::Index;
using Layer = Eigen::ArrayXd; // dense field over the flattened (g, t) space

// Spatiotemporal discretization: n_rows x n_cols square cells anchored at the
// southwest corner, and 1440/time_interval_minutes intervals per local day.
struct GridSpec {
    double origin_lat = 0.0;
    double origin_lon = 0.0;
    double cell_size_m = 500.0;
    int n_rows = 1;
    int n_cols = 1;
    int time_interval_minutes = 60;
    int n_days = 1;
    int utc_offset_minutes = 0;
    // Taxicab corner cuts (NW, NE, SW, SE legs) masking cells outside an
    // irregular domain boundary. A leg of L removes L*(L+1)/2 cells.
    std::array<int, 4> corner_cuts{0, 0, 0, 0};

    int n_cells() const { return n_rows * n_cols; }
    int n_intervals() const { return 1440 / time_interval_minutes; }
    Index layer_size() const { return static_cast<Index>(n_cells()) * n_intervals(); }

    void validate() const; // throws ConfigError
    std::string canonical() const;
    std::uint64_t hash() const;

    static GridSpec from_file(const std::string& path);
    void save(const std::string& path) const;
};

// Maps (lat, lon, timestamp) to flattened spatiotemporal coordinates.
// Cells are half-open [lo, hi) in both axes; local projection is
// equirectangular around the grid origin.
class SpatiotemporalIndex {
public:
    explicit SpatiotemporalIndex(GridSpec spec);

    struct Located {
        int g;                // row-major cell index
        int t;                // interval of local day
        std::int64_t day_key; // local day number (floor(local_seconds / 86400))
    };

    // nullopt for points outside the grid rectangle or the domain mask
    std::optional<Located> locate(double lat, double lon, std::int64_t timestamp_utc) const;

    bool in_domain(int g) const { return mask_[static_cast<std::size_t>(g)] != 0; }
    int domain_cell_count() const { return domain_cells_; }

    Index flat(int g, int t) const { return static_cast<Index>(g) * spec_.n_intervals() + t; }
    int cell_of(Index s) const { return static_cast<int>(s / spec_.n_intervals()); }
    int interval_of(Index s) const { return static_cast<int>(s % spec_.n_intervals()); }

    // inverse of the local projection, for synthetic data generation
    double lat_of_y(double y_m) const { return spec_.origin_lat + y_m / m_per_deg_lat_; }
    double lon_of_x(double x_m) const { return spec_.origin_lon + x_m / m_per_deg_lon_; }
    double domain_width_m() const { return spec_.n_cols * spec_.cell_size_m; }
    double domain_height_m() const { return spec_.n_rows * spec_.cell_size_m; }

    const GridSpec& spec() const { return spec_; }

private:
    GridSpec spec_;
    double m_per_deg_lat_;
    double m_per_deg_lon_;
    std::vector<std::uint8_t> mask_;
    int domain_cells_;
};

// Howard Hinnant's civil-date algorithm; days since 1970-01-01.
std::int64_t days_from_civil(int y, int m, int d);

} // namespace fleetsense
