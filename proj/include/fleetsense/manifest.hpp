#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fleetsense {

inline constexpr const char* kToolVersion = "fleetsense 0.1.0";

// Reproducibility record written into every output directory. The manifest
// captures the resolved command so the identical run can be replayed; it is
// run metadata (wall time, timestamps live here, not in data outputs).
struct RunManifest {
    std::string subcommand;
    std::vector<std::string> command; // argv-style resolved invocation
    std::string config_json;          // resolved parameter snapshot
    std::vector<std::pair<std::string, std::string>> input_hashes; // path -> fnv64 hex
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;
    double wall_time_ms = 0.0;
    std::string started_at_utc;
};

std::uint64_t hash_file(const std::string& path);
std::string hash_hex(std::uint64_t h);
std::string utc_now_iso8601();

void write_manifest(const RunManifest& manifest, const std::string& out_dir);

} // namespace fleetsense
