#include "fleetsense/trajectory.hpp"

#include <cctype>
#include <cmath>

#include "fleetsense/errors.hpp"
#include "fleetsense/grid.hpp"

namespace fleetsense {

namespace {

bool all_digits(const std::string& s) {
    std::size_t i = (!s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
    if (i >= s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

bool read2(const std::string& s, std::size_t pos, int& out) {
    if (pos + 1 >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])) ||
        !std::isdigit(static_cast<unsigned char>(s[pos + 1])))
        return false;
    out = (s[pos] - '0') * 10 + (s[pos + 1] - '0');
    return true;
}

} // namespace

bool parse_iso8601(const std::string& s, std::int64_t& epoch_out) {
    // minimal fixed-layout parse: YYYY-MM-DD{T| }HH:MM:SS[Z|+HH:MM|-HH:MM]
    if (s.size() < 19) return false;
    int year = 0;
    for (int i = 0; i < 4; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        year = year * 10 + (s[i] - '0');
    }
    int month, day, hh, mm, ss;
    if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' ||
        s[16] != ':')
        return false;
    if (!read2(s, 5, month) || !read2(s, 8, day) || !read2(s, 11, hh) || !read2(s, 14, mm) ||
        !read2(s, 17, ss))
        return false;
    if (month < 1 || month > 12 || day < 1 || day > 31 || hh > 23 || mm > 59 || ss > 60)
        return false;
    std::int64_t offset = 0;
    if (s.size() > 19) {
        if (s.size() == 20 && s[19] == 'Z') {
            // UTC marker
        } else if (s.size() == 25 && (s[19] == '+' || s[19] == '-') && s[22] == ':') {
            int oh, om;
            if (!read2(s, 20, oh) || !read2(s, 23, om)) return false;
            offset = (s[19] == '+' ? 1 : -1) * (oh * 3600LL + om * 60LL);
        } else {
            return false;
        }
    }
    epoch_out = days_from_civil(year, month, day) * 86400LL + hh * 3600LL + mm * 60LL + ss -
                offset;
    return true;
}

TrajectoryReader::TrajectoryReader(const std::string& path, ColumnMapping mapping)
    : csv_(path, mapping.delimiter), mapping_(std::move(mapping)) {
    col_vehicle_ = csv_.column(mapping_.vehicle);
    col_time_ = csv_.column(mapping_.time);
    col_lat_ = csv_.column(mapping_.lat);
    col_lon_ = csv_.column(mapping_.lon);
    if (col_vehicle_ < 0) throw SchemaError("missing column '" + mapping_.vehicle + "' in " + path);
    if (col_time_ < 0) throw SchemaError("missing column '" + mapping_.time + "' in " + path);
    if (col_lat_ < 0) throw SchemaError("missing column '" + mapping_.lat + "' in " + path);
    if (col_lon_ < 0) throw SchemaError("missing column '" + mapping_.lon + "' in " + path);

    if (mapping_.pollutants.empty()) {
        for (std::size_t i = 0; i < csv_.header().size(); ++i) {
            const int ii = static_cast<int>(i);
            if (ii == col_vehicle_ || ii == col_time_ || ii == col_lat_ || ii == col_lon_)
                continue;
            pollutants_.push_back(csv_.header()[i]);
            col_pollutants_.push_back(ii);
        }
    } else {
        for (const auto& name : mapping_.pollutants) {
            const int c = csv_.column(name);
            if (c < 0) throw SchemaError("missing pollutant column '" + name + "' in " + path);
            pollutants_.push_back(name);
            col_pollutants_.push_back(c);
        }
    }
}

bool TrajectoryReader::next(TrajectoryRecord& rec) {
    while (csv_.next(fields_)) {
        if (fields_.size() != csv_.header().size()) {
            ++skips_.wrong_field_count;
            continue;
        }
        const std::string& ts = fields_[static_cast<std::size_t>(col_time_)];
        if (time_format_ == TimeFormat::Unknown)
            time_format_ = all_digits(ts) ? TimeFormat::Epoch : TimeFormat::Iso8601;

        std::int64_t epoch = 0;
        if (time_format_ == TimeFormat::Epoch) {
            long long v;
            if (!parse_int64(ts, v)) {
                ++skips_.bad_timestamp;
                continue;
            }
            epoch = v;
        } else if (!parse_iso8601(ts, epoch)) {
            ++skips_.bad_timestamp;
            continue;
        }

        double lat, lon;
        if (!parse_double(fields_[static_cast<std::size_t>(col_lat_)], lat) ||
            !parse_double(fields_[static_cast<std::size_t>(col_lon_)], lon) ||
            !std::isfinite(lat) || !std::isfinite(lon) || lat < -90.0 || lat > 90.0 ||
            lon < -180.0 || lon > 180.0) {
            ++skips_.bad_coordinate;
            continue;
        }

        rec.readings.assign(col_pollutants_.size(), std::numeric_limits<double>::quiet_NaN());
        bool bad = false;
        for (std::size_t k = 0; k < col_pollutants_.size(); ++k) {
            const std::string& f = fields_[static_cast<std::size_t>(col_pollutants_[k])];
            if (f.empty()) continue;
            double v;
            if (!parse_double(f, v) || !std::isfinite(v) || v < 0.0) {
                bad = true;
                break;
            }
            rec.readings[k] = v;
        }
        if (bad) {
            ++skips_.bad_reading;
            continue;
        }

        rec.vehicle_id = fields_[static_cast<std::size_t>(col_vehicle_)];
        rec.timestamp = epoch;
        rec.lat = lat;
        rec.lon = lon;
        ++parsed_;
        return true;
    }
    return false;
}

} // namespace fleetsense
