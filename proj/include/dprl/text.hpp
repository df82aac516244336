#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>

namespace dprl {

// Shortest decimal form that parses back to exactly the same double; keeps
// CSV and log output byte-stable across runs.
inline std::string format_double(double value) {
  char buf[40];
  std::string best;
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
    if (std::strtod(buf, nullptr) != value) continue;
    best = buf;
    break;
  }
  if (best.empty()) best = buf;  // nan/inf never round-trip through strtod
  // %.1g turns 20 into 2e+01; plain integer form is shorter and clearer.
  if (std::abs(value) < 1e15 && value == static_cast<long long>(value)) {
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(value));
    if (std::string_view(buf).size() <= best.size()) best = buf;
  }
  return best;
}

}  // namespace dprl
