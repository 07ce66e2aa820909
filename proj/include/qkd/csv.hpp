#pragma once

#include <cstdio>
#include <string>

namespace qkd {

// Fixed 9 significant digits for every emitted number.
inline std::string fmt9(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

} // namespace qkd
