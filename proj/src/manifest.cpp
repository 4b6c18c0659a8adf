#include "fleetsense/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "fleetsense/errors.hpp"
#include "fleetsense/rng.hpp"

namespace fleetsense {

std::uint64_t hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot hash missing file: " + path);
    std::uint64_t h = 1469598103934665603ULL;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
        if (!in) break;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string utc_now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const RunManifest& manifest, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    nlohmann::json j;
    j["tool_version"] = kToolVersion;
    j["subcommand"] = manifest.subcommand;
    j["command"] = manifest.command;
    j["config"] = manifest.config_json.empty()
                      ? nlohmann::json::object()
                      : nlohmann::json::parse(manifest.config_json);
    nlohmann::json hashes = nlohmann::json::object();
    for (const auto& [path, hex] : manifest.input_hashes) hashes[path] = hex;
    j["input_hashes"] = hashes;
    j["seed"] = manifest.seed;
    j["outputs"] = manifest.outputs;
    j["wall_time_ms"] = manifest.wall_time_ms;
    j["started_at_utc"] = manifest.started_at_utc;

    std::ofstream out(fs::path(out_dir) / "manifest.json");
    if (!out) throw IoError("cannot write manifest in " + out_dir);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("failed writing manifest in " + out_dir);
}

} // namespace fleetsense
