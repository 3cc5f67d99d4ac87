#pragma once

#include "time.hpp"

#include <cstdint>

namespace lelect {

/// Phase structure of the asynchronous election for a network of n nodes.
/// All logarithms are base 2. Phases run 1..K; phase K addresses every
/// other node, earlier phases min{10 * 2^i, ceil(sqrt(4 n log n))} nodes,
/// clamped to n - 1.
class PhaseSchedule {
public:
    explicit PhaseSchedule(NodeId n);

    NodeId n() const { return n_; }
    std::int32_t phases() const { return phases_; }
    /// ceil(sqrt(4 n log n)).
    std::int64_t refereeCap() const { return cap_; }
    /// Remote referees contacted in `phase` (excluding the self-referee).
    std::int32_t refCount(std::int32_t phase) const;
    /// Last phase covered by the geometric attrition bound:
    /// K - ceil(log log n) - 5. May be zero or negative for small n.
    std::int32_t attritionLimit() const { return attritionLimit_; }
    /// Largest phase whose referee count is still 10 * 2^i (below the cap).
    std::int32_t saturationPhase() const { return saturationPhase_; }
    /// ceil(n / 4^(phase - 1)).
    std::int64_t attritionBound(std::int32_t phase) const;

private:
    NodeId n_;
    std::int32_t phases_;
    std::int64_t cap_;
    std::int32_t attritionLimit_;
    std::int32_t saturationPhase_;
};

/// n^4, the size of the rank domain [1, n^4]. Requires n < 65536.
std::uint64_t rankDomain(NodeId n);

/// Referees per active candidate in the synchronous election:
/// ceil(2 sqrt(n) log n), clamped to n - 1.
std::int32_t syncRefereeCount(NodeId n);

/// Activation probability of attempt 1, 2 or 3: n^(-2/3), n^(-1/3), 1.
double syncAttemptProbability(NodeId n, int attempt);

}  // namespace lelect
