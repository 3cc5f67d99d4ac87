#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace lelect {

/// A candidate's place in the election: phase first, then rank, then (in
/// unique-id mode only) the node identifier.
struct Position {
    std::uint64_t rank = 0;
    std::int32_t phase = 0;
    std::optional<std::uint32_t> tiebreak;

    bool operator==(const Position&) const = default;
};

/// a ≫ b. In anonymous mode equal (phase, rank) pairs are incomparable.
constexpr bool aheadOf(const Position& a, const Position& b) {
    if (a.phase != b.phase) return a.phase > b.phase;
    if (a.rank != b.rank) return a.rank > b.rank;
    if (a.tiebreak && b.tiebreak) return *a.tiebreak > *b.tiebreak;
    return false;
}

constexpr bool behind(const Position& a, const Position& b) { return aheadOf(b, a); }

enum class MessageType : std::uint8_t {
    Request,
    Approved,
    Declined,
    Decide,
    DecideReply,
    Leader,
    SyncRequest,
    SyncReply,
    Winner,
};

inline constexpr std::size_t kMessageTypeCount = 9;

std::string_view messageTag(MessageType type);
std::optional<MessageType> parseMessageTag(std::string_view tag);

/// Every protocol message. `pos` is the position the message is about; for
/// DecideReply it is the contender and `chosen` holds the chosen's current
/// position. SyncReply carries the referee's running maximum in `pos`.
struct Message {
    MessageType type = MessageType::Request;
    Position pos;
    Position chosen;
    bool contenderWins = false;

    static Message request(const Position& p) { return {MessageType::Request, p, {}, false}; }
    static Message approved(const Position& p) { return {MessageType::Approved, p, {}, false}; }
    static Message declined(const Position& p) { return {MessageType::Declined, p, {}, false}; }
    static Message decide(const Position& p) { return {MessageType::Decide, p, {}, false}; }
    static Message decideReply(const Position& contender, const Position& chosen, bool contenderWins) {
        return {MessageType::DecideReply, contender, chosen, contenderWins};
    }
    static Message leader(const Position& p);
    static Message syncRequest(const Position& p) { return {MessageType::SyncRequest, p, {}, false}; }
    static Message syncReply(const Position& maxSeen) { return {MessageType::SyncReply, maxSeen, {}, false}; }
    static Message winner(const Position& p) { return {MessageType::Winner, p, {}, false}; }

    bool operator==(const Message&) const = default;
};

using MessageCounts = std::array<std::uint64_t, kMessageTypeCount>;

constexpr std::size_t index(MessageType t) { return static_cast<std::size_t>(t); }

}  // namespace lelect
