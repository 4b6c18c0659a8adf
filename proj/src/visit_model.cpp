#include "fleetsense/visit_model.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fleetsense/csv.hpp"
#include "fleetsense/errors.hpp"
#include "fleetsense/rng.hpp"

namespace fleetsense {

bool VisitModel::uniform_costs() const {
    for (double c : cost)
        if (c != cost.front()) return false;
    return true;
}

SparseLayers derive_coverage_prob(const VisitCounts& counts, const GridSpec& grid) {
    if (static_cast<int>(counts.observed_day_keys.size()) > grid.n_days)
        throw ValidationError("data spans " + std::to_string(counts.observed_day_keys.size()) +
                              " distinct local days but the grid declares n_days=" +
                              std::to_string(grid.n_days));
    const int V = static_cast<int>(counts.vehicle_ids.size());
    SparseLayers q(counts.layer_size, V);
    std::vector<Eigen::Triplet<double>> trips;
    for (int v = 0; v < V; ++v) {
        const auto& pv = counts.per_vehicle[static_cast<std::size_t>(v)];
        for (std::size_t i = 0; i < pv.idx.size(); ++i)
            trips.emplace_back(static_cast<Index>(pv.idx[i]), v,
                               static_cast<double>(pv.day_presence[i]) / grid.n_days);
    }
    q.setFromTriplets(trips.begin(), trips.end());
    return q;
}

SparseLayers derive_trajectory_dist(const VisitCounts& counts) {
    const int V = static_cast<int>(counts.vehicle_ids.size());
    SparseLayers pi(counts.layer_size, V);
    std::vector<Eigen::Triplet<double>> trips;
    for (int v = 0; v < V; ++v) {
        const auto& pv = counts.per_vehicle[static_cast<std::size_t>(v)];
        std::int64_t total = 0;
        for (auto c : pv.count) total += c;
        if (total == 0) continue;
        for (std::size_t i = 0; i < pv.idx.size(); ++i)
            trips.emplace_back(static_cast<Index>(pv.idx[i]), v,
                               static_cast<double>(pv.count[i]) / static_cast<double>(total));
    }
    pi.setFromTriplets(trips.begin(), trips.end());
    return pi;
}

VisitModel build_visit_model(const VisitCounts& counts, const GridSpec& grid,
                             std::vector<double> costs) {
    VisitModel m;
    m.grid = grid;
    m.vehicle_ids = counts.vehicle_ids;
    m.q = derive_coverage_prob(counts, grid);
    m.pi = derive_trajectory_dist(counts);
    const std::size_t V = m.vehicle_ids.size();
    if (costs.empty()) costs.assign(V, 1.0);
    if (costs.size() != V) throw DimensionError("cost vector size does not match vehicle count");
    for (std::size_t v = 0; v < V; ++v)
        if (!(costs[v] > 0.0))
            throw ValidationError("non-positive cost for vehicle " + m.vehicle_ids[v]);
    m.cost = std::move(costs);
    m.total_records.resize(V);
    m.dropped_oob.resize(V);
    m.degenerate.resize(V);
    for (std::size_t v = 0; v < V; ++v) {
        const auto& pv = counts.per_vehicle[v];
        m.total_records[v] = pv.total_records;
        m.dropped_oob[v] = pv.dropped_oob;
        m.degenerate[v] = pv.idx.empty() ? 1 : 0;
    }
    return m;
}

std::vector<double> load_costs(const std::string& path, double default_cost,
                               const std::vector<std::string>& vehicle_ids,
                               std::vector<std::string>* warnings) {
    if (!(default_cost > 0.0)) throw ValidationError("default cost must be positive");
    std::vector<double> costs(vehicle_ids.size(), default_cost);
    CsvReader csv(path);
    const int col_id = csv.column("vehicle_id");
    const int col_cost = csv.column("cost");
    if (col_id < 0 || col_cost < 0)
        throw SchemaError("cost file must have columns vehicle_id,cost: " + path);
    std::vector<std::string> fields;
    while (csv.next(fields)) {
        if (fields.size() != csv.header().size())
            throw SchemaError("malformed cost row at " + path + ":" +
                              std::to_string(csv.line_number()));
        const std::string& id = fields[static_cast<std::size_t>(col_id)];
        double c;
        if (!parse_double(fields[static_cast<std::size_t>(col_cost)], c))
            throw ValidationError("unparsable cost for vehicle " + id + " in " + path);
        if (!(c > 0.0))
            throw ValidationError("non-positive cost for vehicle " + id + " in " + path);
        const auto it = std::lower_bound(vehicle_ids.begin(), vehicle_ids.end(), id);
        if (it == vehicle_ids.end() || *it != id) {
            if (warnings)
                warnings->push_back("unknown vehicle id '" + id + "' in cost file, ignored");
            continue;
        }
        costs[static_cast<std::size_t>(it - vehicle_ids.begin())] = c;
    }
    return costs;
}

const ReadingAggregate& IngestBundle::aggregate_for(const std::string& pollutant) const {
    for (const auto& agg : readings)
        if (agg.pollutant == pollutant) return agg;
    std::string have;
    for (const auto& agg : readings) have += (have.empty() ? "" : ", ") + agg.pollutant;
    throw ValidationError("pollutant '" + pollutant + "' not in cache (available: " + have + ")");
}

namespace {

constexpr char kMagic[4] = {'F', 'S', 'C', '1'};

template <typename T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void put_vec(std::ofstream& out, const std::vector<T>& v) {
    put<std::uint64_t>(out, v.size());
    if (!v.empty())
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(T)));
}

void put_str(std::ofstream& out, const std::string& s) {
    put<std::uint64_t>(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
void get(std::ifstream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

template <typename T>
void get_vec(std::ifstream& in, std::vector<T>& v) {
    std::uint64_t n = 0;
    get(in, n);
    v.resize(n);
    if (n)
        in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
}

void get_str(std::ifstream& in, std::string& s) {
    std::uint64_t n = 0;
    get(in, n);
    s.resize(n);
    if (n) in.read(s.data(), static_cast<std::streamsize>(n));
}

} // namespace

void save_bundle(const IngestBundle& bundle, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write cache: " + path);
    out.write(kMagic, 4);
    put_str(out, bundle.grid.canonical());
    put<std::uint64_t>(out, bundle.grid.hash());

    const auto& c = bundle.counts;
    put<std::int64_t>(out, c.layer_size);
    put<std::uint64_t>(out, c.vehicle_ids.size());
    for (const auto& id : c.vehicle_ids) put_str(out, id);
    for (const auto& pv : c.per_vehicle) {
        put_vec(out, pv.idx);
        put_vec(out, pv.count);
        put_vec(out, pv.day_presence);
        put(out, pv.total_records);
        put(out, pv.dropped_oob);
    }
    put_vec(out, c.observed_day_keys);

    put<std::uint64_t>(out, bundle.readings.size());
    for (const auto& agg : bundle.readings) {
        put_str(out, agg.pollutant);
        put<std::int64_t>(out, agg.layer_size);
        put<std::int64_t>(out, agg.total_readings);
        put<std::uint64_t>(out, agg.per_vehicle.size());
        for (const auto& pv : agg.per_vehicle) {
            put_vec(out, pv.idx);
            put_vec(out, pv.sum);
            put_vec(out, pv.count);
        }
    }
    if (!out) throw IoError("failed writing cache: " + path);
}

IngestBundle load_bundle(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open cache: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw ValidationError("not a fleetsense cache (bad magic / version): " + path);

    IngestBundle bundle;
    std::string canonical;
    get_str(in, canonical);
    std::uint64_t stored_hash = 0;
    get(in, stored_hash);
    if (hash_string(canonical) != stored_hash)
        throw ValidationError("cache grid hash mismatch (corrupt file?): " + path);
    {
        // round-trip the canonical form through a temp file-free parse
        GridSpec spec;
        std::istringstream ss(canonical);
        std::string kv;
        while (std::getline(ss, kv, ';')) {
            const auto eq = kv.find('=');
            const std::string key = kv.substr(0, eq);
            const std::string val = kv.substr(eq + 1);
            if (key == "origin_lat") spec.origin_lat = std::stod(val);
            else if (key == "origin_lon") spec.origin_lon = std::stod(val);
            else if (key == "cell_size_m") spec.cell_size_m = std::stod(val);
            else if (key == "n_rows") spec.n_rows = std::stoi(val);
            else if (key == "n_cols") spec.n_cols = std::stoi(val);
            else if (key == "time_interval_minutes") spec.time_interval_minutes = std::stoi(val);
            else if (key == "n_days") spec.n_days = std::stoi(val);
            else if (key == "utc_offset_minutes") spec.utc_offset_minutes = std::stoi(val);
            else if (key == "corner_cuts") {
                std::istringstream cs(val);
                std::string leg;
                for (int i = 0; i < 4 && std::getline(cs, leg, ','); ++i)
                    spec.corner_cuts[static_cast<std::size_t>(i)] = std::stoi(leg);
            }
        }
        spec.validate();
        bundle.grid = spec;
    }

    auto& c = bundle.counts;
    get(in, c.layer_size);
    std::uint64_t n_vehicles = 0;
    get(in, n_vehicles);
    c.vehicle_ids.resize(n_vehicles);
    for (auto& id : c.vehicle_ids) get_str(in, id);
    c.per_vehicle.resize(n_vehicles);
    for (auto& pv : c.per_vehicle) {
        get_vec(in, pv.idx);
        get_vec(in, pv.count);
        get_vec(in, pv.day_presence);
        get(in, pv.total_records);
        get(in, pv.dropped_oob);
    }
    get_vec(in, c.observed_day_keys);

    std::uint64_t n_aggs = 0;
    get(in, n_aggs);
    bundle.readings.resize(n_aggs);
    for (auto& agg : bundle.readings) {
        get_str(in, agg.pollutant);
        get(in, agg.layer_size);
        get(in, agg.total_readings);
        std::uint64_t npv = 0;
        get(in, npv);
        agg.vehicle_ids = c.vehicle_ids;
        agg.per_vehicle.resize(npv);
        for (auto& pv : agg.per_vehicle) {
            get_vec(in, pv.idx);
            get_vec(in, pv.sum);
            get_vec(in, pv.count);
        }
    }
    if (!in) throw ValidationError("truncated cache file: " + path);
    return bundle;
}

} // namespace fleetsense
