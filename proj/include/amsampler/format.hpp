#pragma once

#include <cstdio>
#include <string>

namespace amsampler {

// 17 significant digits round-trips every double exactly.
inline std::string format_double(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

}  // namespace amsampler
