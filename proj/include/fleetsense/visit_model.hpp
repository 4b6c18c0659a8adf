#pragma once

#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "fleetsense/binning.hpp"
#include "fleetsense/grid.hpp"

namespace fleetsense {

using SparseLayers = Eigen::SparseMatrix<double>; // layer_size x n_vehicles, one column per vehicle

// The two probabilistic views of a fleet's visit behaviour. The q view is a
// per-cell Bernoulli coverage probability (fraction of observation days with
// a visit); the pi view is each vehicle's visit distribution over the whole
// (g, t) space (count share, summing to 1). They are distinct objects: q
// feeds the coverage product, pi feeds the trajectory entropy.
struct VisitModel {
    GridSpec grid;
    std::vector<std::string> vehicle_ids; // sorted
    SparseLayers q;                       // entries in (0, 1]
    SparseLayers pi;                      // columns sum to 1 (or are empty)
    std::vector<double> cost;             // > 0
    std::vector<std::int64_t> total_records;
    std::vector<std::int64_t> dropped_oob;
    std::vector<std::uint8_t> degenerate; // 1 when the vehicle has no in-bounds record

    int n_vehicles() const { return static_cast<int>(vehicle_ids.size()); }
    Index layer_size() const { return grid.layer_size(); }
    bool uniform_costs() const;
};

// q[v][s] = day_presence / n_days. Throws ValidationError when the data spans
// more distinct days than the grid declares (q would exceed 1).
SparseLayers derive_coverage_prob(const VisitCounts& counts, const GridSpec& grid);

// pi[v][s] = count / total in-bounds count; empty column for degenerate vehicles
SparseLayers derive_trajectory_dist(const VisitCounts& counts);

VisitModel build_visit_model(const VisitCounts& counts, const GridSpec& grid,
                             std::vector<double> costs = {});

// Cost CSV `vehicle_id,cost`; vehicles absent from the file get the default.
// Unknown ids are ignored with a warning pushed to `warnings`.
std::vector<double> load_costs(const std::string& path, double default_cost,
                               const std::vector<std::string>& vehicle_ids,
                               std::vector<std::string>* warnings = nullptr);

// Everything an ingest run produces; cached to disk so selection and
// evaluation runs skip re-parsing trajectories.
struct IngestBundle {
    GridSpec grid;
    VisitCounts counts;
    std::vector<ReadingAggregate> readings;

    const ReadingAggregate& aggregate_for(const std::string& pollutant) const;
};

void save_bundle(const IngestBundle& bundle, const std::string& path);
IngestBundle load_bundle(const std::string& path);

} // namespace fleetsense
