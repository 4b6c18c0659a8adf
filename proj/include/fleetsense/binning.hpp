#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fleetsense/grid.hpp"
#include "fleetsense/trajectory.hpp"

namespace fleetsense {

// Raw per-vehicle visit frequencies over the flattened (g, t) space.
// Vehicles are ordered by id; entries within a vehicle are sorted by index.
struct VisitCounts {
    struct PerVehicle {
        std::vector<std::int64_t> idx; // flat s = g * T + t, strictly increasing
        std::vector<std::int32_t> count;
        std::vector<std::int32_t> day_presence; // distinct local days with >= 1 hit
        std::int64_t total_records = 0;         // parsed records for this vehicle
        std::int64_t dropped_oob = 0;           // out of grid rectangle or domain mask
        std::int64_t in_bounds() const { return total_records - dropped_oob; }
    };

    Index layer_size = 0;
    std::vector<std::string> vehicle_ids; // sorted
    std::vector<PerVehicle> per_vehicle;
    std::vector<std::int64_t> observed_day_keys; // distinct local days, sorted

    std::int64_t total_dropped() const;
    std::int64_t total_records() const;
    int vehicle_index(const std::string& id) const; // -1 when unknown
};

class VisitBinner {
public:
    explicit VisitBinner(const SpatiotemporalIndex& index) : index_(&index) {}
    void add(const TrajectoryRecord& rec);
    VisitCounts finish();

private:
    struct Acc {
        std::vector<std::pair<std::int64_t, std::int64_t>> hits; // (flat s, day key)
        std::int64_t total = 0;
        std::int64_t dropped = 0;
    };
    const SpatiotemporalIndex* index_;
    std::unordered_map<std::string, Acc> acc_;
};

VisitCounts bin_visits(std::span<const TrajectoryRecord> records,
                       const SpatiotemporalIndex& index);
VisitCounts bin_visits(TrajectoryReader& reader, const SpatiotemporalIndex& index);

// Per-pollutant sums/counts of readings, per vehicle and per cell.
struct ReadingAggregate {
    struct PerVehicle {
        std::vector<std::int64_t> idx; // sorted flat s
        std::vector<double> sum;
        std::vector<std::int32_t> count;
    };

    std::string pollutant;
    Index layer_size = 0;
    std::vector<std::string> vehicle_ids; // sorted, same universe as VisitCounts
    std::vector<PerVehicle> per_vehicle;
    std::int64_t total_readings = 0;
};

class ReadingBinner {
public:
    ReadingBinner(const SpatiotemporalIndex& index, std::vector<std::string> pollutants)
        : index_(&index), pollutants_(std::move(pollutants)) {}
    void add(const TrajectoryRecord& rec); // rec.readings aligned with pollutants
    std::vector<ReadingAggregate> finish();

private:
    struct Acc {
        // per pollutant: (flat s, value)
        std::vector<std::vector<std::pair<std::int64_t, double>>> vals;
    };
    const SpatiotemporalIndex* index_;
    std::vector<std::string> pollutants_;
    std::unordered_map<std::string, Acc> acc_;
};

// throws if the pollutant has no readings anywhere
ReadingAggregate bin_readings(std::span<const TrajectoryRecord> records,
                              const SpatiotemporalIndex& index, const std::string& pollutant,
                              std::span<const std::string> record_pollutants);

} // namespace fleetsense
