#pragma once

#include <string>

namespace ustatlab {

// Shortest decimal form that parses back to the identical double. Keeps
// CSV/JSON output byte-stable and lossless.
std::string format_double(double x);

}  // namespace ustatlab
