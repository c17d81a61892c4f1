#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace spectraclass {

/// Fixed 6-significant-digit rendering used for every CSV output, so golden
/// files are byte-stable across runs and thread counts.
std::string format_g6(double value);

/// Shortest text that round-trips to the same double.
std::string format_exact(double value);

/// Parses the whole of `text` as a decimal number. Returns false on any
/// trailing garbage, so "12abc" is rejected.
bool parse_double(std::string_view text, double& value);

std::string_view trim(std::string_view s);

/// Splits one CSV line, honouring double-quoted fields ("" escapes a quote).
std::vector<std::string> split_csv(std::string_view line);

/// Quotes a field when it contains a comma, quote or newline.
std::string csv_field(std::string_view text);

}  // namespace spectraclass
