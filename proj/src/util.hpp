#pragma once

#include <cstdio>
#include <string>

namespace fracheat {

// Shortest round-trippable decimal form of a double for CSV/JSON output.
inline std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace fracheat
