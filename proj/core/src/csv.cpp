#include "nnscore/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nnscore/errors.hpp"

namespace nnscore {

std::string format_double(double value) {
    char buf[40];
    // Try increasing precision until the value round-trips; keeps small
    // numbers like 0.5 short while preserving bit-exactness.
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
        if (std::strtod(buf, nullptr) == value) return buf;
    }
    return buf;
}

CsvTable read_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open CSV file: " + path);

    CsvTable table;
    std::string line;
    std::size_t offset = 0;
    while (std::getline(in, line)) {
        const std::size_t line_start = offset;
        offset += line.size() + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::size_t cols_in_row = 0;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            errno = 0;
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            while (end && *end == ' ') ++end;
            if (end == cell.c_str() || (end && *end != '\0') || errno == ERANGE) {
                throw FormatError("unparseable CSV cell '" + cell + "'", line_start);
            }
            if (!std::isfinite(v)) throw DataError("non-finite value in CSV: " + path);
            table.values.push_back(v);
            ++cols_in_row;
        }
        if (table.rows == 0) {
            table.cols = cols_in_row;
        } else if (cols_in_row != table.cols) {
            throw FormatError("ragged CSV row (expected " + std::to_string(table.cols) +
                                  " columns, got " + std::to_string(cols_in_row) + ")",
                              line_start);
        }
        ++table.rows;
    }
    if (table.rows == 0) throw FormatError("empty CSV file: " + path);
    return table;
}

std::uint64_t file_checksum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open file for checksum: " + path);
    std::uint64_t hash = 0xcbf29ce484222325ull;
    char chunk[4096];
    while (in.read(chunk, sizeof(chunk)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(chunk[i]);
            hash *= 0x100000001b3ull;
        }
        if (got < static_cast<std::streamsize>(sizeof(chunk))) break;
    }
    return hash;
}

}  // namespace nnscore
