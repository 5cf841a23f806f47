#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nnscore {

/// Shortest round-trippable decimal form of a double ("%.17g" then trimmed).
std::string format_double(double value);

/// Parses a headerless CSV of decimal floats into row-major values.
/// All rows must have the same width. Throws FormatError on malformed
/// input, DataError on NaN/Inf entries.
struct CsvTable {
    std::vector<double> values;  // rows * cols, row-major
    std::size_t rows = 0;
    std::size_t cols = 0;
};
CsvTable read_csv_matrix(const std::string& path);

/// FNV-1a 64-bit over a file's bytes; used for dataset checksums.
std::uint64_t file_checksum(const std::string& path);

}  // namespace nnscore
