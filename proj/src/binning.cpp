#include "fleetsense/binning.hpp"

#include <algorithm>
#include <set>

#include "fleetsense/errors.hpp"

namespace fleetsense {

std::int64_t VisitCounts::total_dropped() const {
    std::int64_t n = 0;
    for (const auto& v : per_vehicle) n += v.dropped_oob;
    return n;
}

std::int64_t VisitCounts::total_records() const {
    std::int64_t n = 0;
    for (const auto& v : per_vehicle) n += v.total_records;
    return n;
}

int VisitCounts::vehicle_index(const std::string& id) const {
    const auto it = std::lower_bound(vehicle_ids.begin(), vehicle_ids.end(), id);
    if (it == vehicle_ids.end() || *it != id) return -1;
    return static_cast<int>(it - vehicle_ids.begin());
}

void VisitBinner::add(const TrajectoryRecord& rec) {
    Acc& a = acc_[rec.vehicle_id];
    ++a.total;
    const auto loc = index_->locate(rec.lat, rec.lon, rec.timestamp);
    if (!loc) {
        ++a.dropped;
        return;
    }
    a.hits.emplace_back(index_->flat(loc->g, loc->t), loc->day_key);
}

VisitCounts VisitBinner::finish() {
    VisitCounts out;
    out.layer_size = index_->spec().layer_size();
    out.vehicle_ids.reserve(acc_.size());
    for (const auto& [id, _] : acc_) out.vehicle_ids.push_back(id);
    std::sort(out.vehicle_ids.begin(), out.vehicle_ids.end());

    std::set<std::int64_t> day_keys;
    out.per_vehicle.resize(out.vehicle_ids.size());
    for (std::size_t v = 0; v < out.vehicle_ids.size(); ++v) {
        Acc& a = acc_[out.vehicle_ids[v]];
        auto& pv = out.per_vehicle[v];
        pv.total_records = a.total;
        pv.dropped_oob = a.dropped;
        // sorting makes the result independent of record order
        std::sort(a.hits.begin(), a.hits.end());
        for (std::size_t i = 0; i < a.hits.size();) {
            const std::int64_t s = a.hits[i].first;
            std::int32_t cnt = 0, days = 0;
            std::int64_t prev_day = std::numeric_limits<std::int64_t>::min();
            for (; i < a.hits.size() && a.hits[i].first == s; ++i) {
                ++cnt;
                if (a.hits[i].second != prev_day) {
                    ++days;
                    prev_day = a.hits[i].second;
                    day_keys.insert(prev_day);
                }
            }
            pv.idx.push_back(s);
            pv.count.push_back(cnt);
            pv.day_presence.push_back(days);
        }
        a.hits.clear();
        a.hits.shrink_to_fit();
    }
    out.observed_day_keys.assign(day_keys.begin(), day_keys.end());
    return out;
}

VisitCounts bin_visits(std::span<const TrajectoryRecord> records,
                       const SpatiotemporalIndex& index) {
    VisitBinner binner(index);
    for (const auto& rec : records) binner.add(rec);
    return binner.finish();
}

VisitCounts bin_visits(TrajectoryReader& reader, const SpatiotemporalIndex& index) {
    VisitBinner binner(index);
    TrajectoryRecord rec;
    while (reader.next(rec)) binner.add(rec);
    return binner.finish();
}

void ReadingBinner::add(const TrajectoryRecord& rec) {
    const auto loc = index_->locate(rec.lat, rec.lon, rec.timestamp);
    if (!loc) return;
    Acc& a = acc_[rec.vehicle_id];
    if (a.vals.empty()) a.vals.resize(pollutants_.size());
    const std::int64_t s = index_->flat(loc->g, loc->t);
    for (std::size_t k = 0; k < pollutants_.size() && k < rec.readings.size(); ++k)
        if (reading_present(rec.readings[k])) a.vals[k].emplace_back(s, rec.readings[k]);
}

std::vector<ReadingAggregate> ReadingBinner::finish() {
    std::vector<std::string> ids;
    ids.reserve(acc_.size());
    for (const auto& [id, _] : acc_) ids.push_back(id);
    std::sort(ids.begin(), ids.end());

    std::vector<ReadingAggregate> out(pollutants_.size());
    for (std::size_t k = 0; k < pollutants_.size(); ++k) {
        out[k].pollutant = pollutants_[k];
        out[k].layer_size = index_->spec().layer_size();
        out[k].vehicle_ids = ids;
        out[k].per_vehicle.resize(ids.size());
    }
    for (std::size_t v = 0; v < ids.size(); ++v) {
        Acc& a = acc_[ids[v]];
        for (std::size_t k = 0; k < pollutants_.size(); ++k) {
            if (a.vals.empty()) break;
            auto& vals = a.vals[k];
            // sort by (cell, value) so sums do not depend on record order
            std::sort(vals.begin(), vals.end());
            auto& pv = out[k].per_vehicle[v];
            for (std::size_t i = 0; i < vals.size();) {
                const std::int64_t s = vals[i].first;
                double sum = 0.0;
                std::int32_t cnt = 0;
                for (; i < vals.size() && vals[i].first == s; ++i) {
                    sum += vals[i].second;
                    ++cnt;
                }
                pv.idx.push_back(s);
                pv.sum.push_back(sum);
                pv.count.push_back(cnt);
                out[k].total_readings += cnt;
            }
            vals.clear();
            vals.shrink_to_fit();
        }
    }
    return out;
}

ReadingAggregate bin_readings(std::span<const TrajectoryRecord> records,
                              const SpatiotemporalIndex& index, const std::string& pollutant,
                              std::span<const std::string> record_pollutants) {
    std::size_t k = record_pollutants.size();
    for (std::size_t i = 0; i < record_pollutants.size(); ++i)
        if (record_pollutants[i] == pollutant) k = i;
    if (k == record_pollutants.size())
        throw ValidationError("pollutant '" + pollutant + "' not present in records");

    ReadingBinner binner(index, {pollutant});
    TrajectoryRecord slim;
    for (const auto& rec : records) {
        slim = rec;
        slim.readings.assign(1, k < rec.readings.size()
                                    ? rec.readings[k]
                                    : std::numeric_limits<double>::quiet_NaN());
        binner.add(slim);
    }
    auto aggs = binner.finish();
    if (aggs[0].total_readings == 0)
        throw ValidationError("pollutant '" + pollutant + "' has no readings in any record");
    return std::move(aggs[0]);
}

} // namespace fleetsense
