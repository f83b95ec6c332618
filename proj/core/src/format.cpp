#include "ustatlab/format.hpp"

#include <cstdio>
#include <cstdlib>

namespace ustatlab {

std::string format_double(double x) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

}  // namespace ustatlab
