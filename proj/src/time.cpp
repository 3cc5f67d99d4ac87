#include "lelect/time.hpp"

#include <cmath>
#include <cstdio>

namespace lelect {

VirtualTime VirtualTime::fromUnits(double units) {
    return VirtualTime(static_cast<std::int64_t>(std::llround(units * static_cast<double>(kTicksPerUnit))));
}

std::string VirtualTime::toString() const {
    char buf[48];
    const std::int64_t whole = ticks_ / kTicksPerUnit;
    const std::int64_t frac = ticks_ % kTicksPerUnit;
    if (ticks_ < 0) {
        std::snprintf(buf, sizeof buf, "-%lld.%06lld", static_cast<long long>(-whole),
                      static_cast<long long>(-frac));
    } else {
        std::snprintf(buf, sizeof buf, "%lld.%06lld", static_cast<long long>(whole), static_cast<long long>(frac));
    }
    return buf;
}

}  // namespace lelect
