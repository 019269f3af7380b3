#pragma once

#include <cstdio>
#include <string>

namespace tsc {

/// Round-trip decimal form (17 significant digits, trailing zeros trimmed).
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace tsc
