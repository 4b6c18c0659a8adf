#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "fleetsense/csv.hpp"

namespace fleetsense {

struct TrajectoryRecord {
    std::string vehicle_id;
    std::int64_t timestamp = 0; // UTC epoch seconds
    double lat = 0.0;
    double lon = 0.0;
    // aligned with the reader's pollutants(); NaN where the field is empty
    std::vector<double> readings;
};

inline bool reading_present(double v) { return v == v; }

struct ColumnMapping {
    std::string vehicle = "vehicle_id";
    std::string time = "timestamp";
    std::string lat = "lat";
    std::string lon = "lon";
    // empty: every column other than the four above is a pollutant
    std::vector<std::string> pollutants;
    char delimiter = ',';
};

struct SkipStats {
    std::int64_t wrong_field_count = 0;
    std::int64_t bad_timestamp = 0;
    std::int64_t bad_coordinate = 0;
    std::int64_t bad_reading = 0;
    std::int64_t total() const {
        return wrong_field_count + bad_timestamp + bad_coordinate + bad_reading;
    }
};

// Streams records from a trajectory CSV. Timestamps are ISO-8601 or epoch
// seconds, detected once from the first data row. Malformed rows are counted
// and skipped rather than aborting the run.
class TrajectoryReader {
public:
    TrajectoryReader(const std::string& path, ColumnMapping mapping = {});

    const std::vector<std::string>& pollutants() const { return pollutants_; }
    bool next(TrajectoryRecord& rec);
    const SkipStats& skipped() const { return skips_; }
    std::int64_t parsed() const { return parsed_; }

private:
    CsvReader csv_;
    ColumnMapping mapping_;
    int col_vehicle_, col_time_, col_lat_, col_lon_;
    std::vector<int> col_pollutants_;
    std::vector<std::string> pollutants_;
    std::vector<std::string> fields_;
    enum class TimeFormat { Unknown, Epoch, Iso8601 } time_format_ = TimeFormat::Unknown;
    SkipStats skips_;
    std::int64_t parsed_ = 0;
};

// "YYYY-MM-DD[T ]HH:MM:SS" with optional 'Z' or +/-HH:MM offset
bool parse_iso8601(const std::string& s, std::int64_t& epoch_out);

} // namespace fleetsense
