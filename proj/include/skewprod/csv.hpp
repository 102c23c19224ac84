#pragma once

#include <cstdio>
#include <string>

namespace skewprod::csv {

/// Round-trippable text for a double (17 significant digits).
inline std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace skewprod::csv
