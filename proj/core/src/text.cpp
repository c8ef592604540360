#include "multipac/text.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "multipac/errors.hpp"

namespace multipac {

std::string format_g17(double v) {
  // Probe increasing precision and keep the first form that round-trips, so
  // 0.1 prints as "0.1" rather than "0.10000000000000001" whenever exact.
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& token, const std::string& what) {
  if (token.empty()) throw ParseError(what + ": empty number");
  char* end = nullptr;
  double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size())
    throw ParseError(what + ": bad number '" + token + "'");
  return v;
}

long long parse_int(const std::string& token, const std::string& what) {
  if (token.empty()) throw ParseError(what + ": empty integer");
  char* end = nullptr;
  long long v = std::strtoll(token.c_str(), &end, 10);
  if (end != token.c_str() + token.size())
    throw ParseError(what + ": bad integer '" + token + "'");
  return v;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace multipac
