#pragma once

// Hand-made trace corruptions shared by the checker tests and the
// acceptance run. Each returns false if the trace has no suitable spot.

#include "lelect/checker.hpp"
#include "lelect/trace.hpp"

#include <algorithm>
#include <iterator>
#include <string>
#include <vector>

namespace lelect::corrupt {

inline std::vector<Violation> check(const LoadedTrace& t) {
    TraceChecker checker(t.header);
    for (const auto& rec : t.records) checker.record(rec);
    return checker.finish();
}

inline bool has(const std::vector<Violation>& vs, const std::string& rule) {
    return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.rule == rule; });
}

/// Swaps the first two deliveries on one link.
inline bool swapLinkPair(LoadedTrace& t) {
    for (std::size_t i = 0; i < t.records.size(); ++i) {
        const auto& a = t.records[i];
        if (a.kind != EventKind::Deliver) continue;
        for (std::size_t j = i + 1; j < t.records.size(); ++j) {
            const auto& b = t.records[j];
            if (b.kind == EventKind::Deliver && b.from == a.from && b.to == a.to) {
                std::swap(t.records[i], t.records[j]);
                return true;
            }
        }
    }
    return false;
}

/// Turns the first C0 -> C1 step into C0 -> C2.
inline bool skipToC2(LoadedTrace& t) {
    auto it = std::find_if(t.records.begin(), t.records.end(), [](const TraceRecord& r) {
        return r.before && r.after && r.before->ref == RefState::C0 && r.after->ref == RefState::C1;
    });
    if (it == t.records.end()) return false;
    it->after->ref = RefState::C2;
    it->after->contender = it->after->chosen;
    return true;
}

/// Removes the first Approved delivery.
inline bool dropReply(LoadedTrace& t) {
    auto it = std::find_if(t.records.begin(), t.records.end(), [](const TraceRecord& r) {
        return r.kind == EventKind::Deliver && r.msg && r.msg->type == MessageType::Approved;
    });
    if (it == t.records.end()) return false;
    t.records.erase(it);
    return true;
}

/// Makes the first candidate that loses end up Elected instead, keeping the
/// rest of its history consistent with the forged state.
inline bool secondElected(LoadedTrace& t) {
    const auto elected = static_cast<std::uint8_t>(CandState::Elected);
    auto it = std::find_if(t.records.begin(), t.records.end(), [](const TraceRecord& r) {
        return r.before && r.after && r.before->role == static_cast<std::uint8_t>(CandState::Candidate) &&
               r.after->role == static_cast<std::uint8_t>(CandState::NonElected);
    });
    if (it == t.records.end()) return false;
    it->after->role = elected;
    for (auto jt = std::next(it); jt != t.records.end(); ++jt) {
        if (jt->to != it->to || !jt->before) continue;
        jt->before->role = elected;
        jt->after->role = elected;
    }
    return true;
}

/// Appends a copy of the last lockstep delivery, moved to `round`.
inline bool lateRound(LoadedTrace& t, std::int64_t round) {
    auto it = std::find_if(t.records.rbegin(), t.records.rend(),
                           [](const TraceRecord& r) { return r.kind == EventKind::Deliver; });
    if (it == t.records.rend()) return false;
    TraceRecord late = *it;
    late.time = VirtualTime::units(round);
    late.sentAt = VirtualTime::units(round - 1);
    late.seq = t.records.back().seq + 1;
    t.records.push_back(late);
    return true;
}

}  // namespace lelect::corrupt
