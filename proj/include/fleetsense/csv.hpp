#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace fleetsense {

// Shortest text that round-trips the double exactly.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void split_line(const std::string& line, char delim, std::vector<std::string>& out);

// Header-aware delimited-text reader. No quoting support; the formats this
// toolkit defines never emit quoted fields.
class CsvReader {
public:
    CsvReader(const std::string& path, char delim = ',');

    const std::vector<std::string>& header() const { return header_; }
    // -1 when absent
    int column(const std::string& name) const;

    bool next(std::vector<std::string>& fields);
    std::size_t line_number() const { return line_number_; }
    const std::string& path() const { return path_; }

private:
    std::ifstream in_;
    std::string path_;
    char delim_;
    std::vector<std::string> header_;
    std::string line_;
    std::size_t line_number_ = 0;
};

bool parse_double(const std::string& s, double& out);
bool parse_int64(const std::string& s, long long& out);

} // namespace fleetsense
