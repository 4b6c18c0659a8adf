#include "fleetsense/csv.hpp"

#include <cstdlib>
#include <cerrno>

#include "fleetsense/errors.hpp"

namespace fleetsense {

void split_line(const std::string& line, char delim, std::vector<std::string>& out) {
    out.clear();
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(delim, start);
        if (pos == std::string::npos) {
            out.emplace_back(line, start);
            break;
        }
        out.emplace_back(line, start, pos - start);
        start = pos + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
}

CsvReader::CsvReader(const std::string& path, char delim)
    : in_(path), path_(path), delim_(delim) {
    if (!in_) throw IoError("cannot open file: " + path);
    if (!std::getline(in_, line_)) throw SchemaError("empty file (missing header): " + path);
    ++line_number_;
    split_line(line_, delim_, header_);
}

int CsvReader::column(const std::string& name) const {
    for (std::size_t i = 0; i < header_.size(); ++i)
        if (header_[i] == name) return static_cast<int>(i);
    return -1;
}

bool CsvReader::next(std::vector<std::string>& fields) {
    while (std::getline(in_, line_)) {
        ++line_number_;
        if (line_.empty() || line_ == "\r") continue;
        split_line(line_, delim_, fields);
        return true;
    }
    return false;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    errno = 0;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return errno == 0 && end == s.c_str() + s.size();
}

bool parse_int64(const std::string& s, long long& out) {
    if (s.empty()) return false;
    errno = 0;
    char* end = nullptr;
    out = std::strtoll(s.c_str(), &end, 10);
    return errno == 0 && end == s.c_str() + s.size();
}

} // namespace fleetsense
