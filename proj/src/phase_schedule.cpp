#include "lelect/phase_schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lelect {

namespace {

// Smallest integer c with c * c >= x.
std::int64_t ceilSqrt(double x) {
    if (x <= 0.0) return 0;
    auto c = static_cast<std::int64_t>(std::ceil(std::sqrt(x)));
    while (c > 0 && static_cast<double>(c - 1) * static_cast<double>(c - 1) >= x) --c;
    while (static_cast<double>(c) * static_cast<double>(c) < x) ++c;
    return c;
}

}  // namespace

PhaseSchedule::PhaseSchedule(NodeId n) : n_(n) {
    if (n < 1) throw std::invalid_argument("phase schedule needs n >= 1");
    if (n == 1) {
        phases_ = 1;
        cap_ = 0;
        attritionLimit_ = phases_ - 5;
        saturationPhase_ = 0;
        return;
    }
    const double x = 4.0 * static_cast<double>(n) * std::log2(static_cast<double>(n));
    cap_ = ceilSqrt(x);

    // ceil(log2 sqrt(x)) is the least k with 4^k >= x.
    std::int32_t k = 0;
    double pow4 = 1.0;
    while (pow4 < x) {
        pow4 *= 4.0;
        ++k;
    }
    phases_ = k + 1;

    const double loglog = std::log2(std::log2(static_cast<double>(n)));
    const auto loglogCeil = static_cast<std::int32_t>(std::ceil(loglog - 1e-12));
    attritionLimit_ = phases_ - std::max(loglogCeil, 0) - 5;

    saturationPhase_ = 0;
    while (saturationPhase_ + 1 < phases_ && (10LL << (saturationPhase_ + 1)) <= cap_) ++saturationPhase_;
}

std::int32_t PhaseSchedule::refCount(std::int32_t phase) const {
    if (phase < 1 || phase > phases_) {
        throw std::out_of_range("phase " + std::to_string(phase) + " outside 1.." + std::to_string(phases_));
    }
    const std::int64_t others = n_ - 1;
    if (phase == phases_) return static_cast<std::int32_t>(others);
    const std::int64_t geometric = phase >= 40 ? others : (10LL << phase);
    return static_cast<std::int32_t>(std::min({geometric, cap_, others}));
}

std::int64_t PhaseSchedule::attritionBound(std::int32_t phase) const {
    if (phase < 1) throw std::out_of_range("phase must be >= 1");
    const int shift = 2 * (phase - 1);
    if (shift >= 62) return 1;
    const std::int64_t d = std::int64_t{1} << shift;
    return (static_cast<std::int64_t>(n_) + d - 1) / d;
}

std::uint64_t rankDomain(NodeId n) {
    if (n < 1 || n >= 65536) throw std::out_of_range("rank domain n^4 requires 1 <= n < 65536");
    const auto v = static_cast<std::uint64_t>(n);
    return v * v * v * v;
}

std::int32_t syncRefereeCount(NodeId n) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    const double dn = static_cast<double>(n);
    const double raw = 2.0 * std::sqrt(dn) * std::log2(dn);
    const auto count = static_cast<std::int64_t>(std::ceil(raw - 1e-9));
    return static_cast<std::int32_t>(std::min<std::int64_t>(count, n - 1));
}

double syncAttemptProbability(NodeId n, int attempt) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    const double dn = static_cast<double>(n);
    switch (attempt) {
        case 1: return std::pow(dn, -2.0 / 3.0);
        case 2: return std::pow(dn, -1.0 / 3.0);
        case 3: return 1.0;
        default: throw std::out_of_range("attempt must be 1, 2 or 3");
    }
}

}  // namespace lelect
