#pragma once

#include <string>
#include <vector>

namespace multipac {

// Shortest round-trippable decimal form of a double (printf %.17g trimmed by
// round-trip probing). Used for every float the project serializes, so
// canonical files and CSVs are bit-stable.
std::string format_g17(double v);

// strtod with full-token validation; throws ParseError naming `what`.
double parse_double(const std::string& token, const std::string& what);
long long parse_int(const std::string& token, const std::string& what);

std::vector<std::string> split_ws(const std::string& line);

}  // namespace multipac
