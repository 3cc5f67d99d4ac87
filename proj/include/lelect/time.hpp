#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace lelect {

using NodeId = std::int32_t;

/// Simulated time as an integer count of ticks; one time unit (the maximum
/// delay of a single message) is kTicksPerUnit ticks.
class VirtualTime {
public:
    static constexpr std::int64_t kTicksPerUnit = 1'000'000;

    constexpr VirtualTime() = default;

    static constexpr VirtualTime fromTicks(std::int64_t ticks) { return VirtualTime(ticks); }
    static constexpr VirtualTime units(std::int64_t whole) { return VirtualTime(whole * kTicksPerUnit); }
    /// Rounds to the nearest tick.
    static VirtualTime fromUnits(double units);

    constexpr std::int64_t ticks() const { return ticks_; }
    constexpr double asUnits() const { return static_cast<double>(ticks_) / kTicksPerUnit; }

    constexpr auto operator<=>(const VirtualTime&) const = default;

    constexpr VirtualTime operator+(VirtualTime o) const { return VirtualTime(ticks_ + o.ticks_); }
    constexpr VirtualTime operator-(VirtualTime o) const { return VirtualTime(ticks_ - o.ticks_); }

    std::string toString() const;

private:
    constexpr explicit VirtualTime(std::int64_t ticks) : ticks_(ticks) {}

    std::int64_t ticks_ = 0;
};

inline constexpr VirtualTime kOneUnit = VirtualTime::units(1);

}  // namespace lelect
