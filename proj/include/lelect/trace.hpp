#pragma once

#include "message.hpp"
#include "time.hpp"

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace lelect {

enum class ProtocolKind : std::uint8_t { Async, Sync };

std::string_view protocolName(ProtocolKind p);
std::optional<ProtocolKind> parseProtocol(std::string_view name);

enum class CandState : std::uint8_t { Asleep, Candidate, NonElected, Elected };
enum class RefState : std::uint8_t { None, C0, C1, C2, C3 };
enum class SyncRole : std::uint8_t { Asleep, Silent, Active, Referee, Done };

std::string_view candStateName(CandState s);
std::string_view refStateName(RefState s);
std::string_view syncRoleName(SyncRole s);

/// Observable state of one node, as exposed to traces. `role` holds a
/// CandState (async) or SyncRole (sync); chosen/contender are the ports
/// (sender NodeId) a referee has recorded, or -1.
struct NodeSnapshot {
    std::uint8_t role = 0;
    RefState ref = RefState::None;
    std::int32_t chosen = -1;
    std::int32_t contender = -1;
    bool terminated = false;
    std::optional<Position> leader;

    bool operator==(const NodeSnapshot&) const = default;
};

enum class EventKind : std::uint8_t { Wakeup, Deliver, LocalDeliver, Step };

std::string_view eventKindName(EventKind k);

/// One processed event. Message events carry the message and its send time;
/// handler invocations carry the handling node's state before and after.
struct TraceRecord {
    VirtualTime time;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::Wakeup;
    NodeId from = -1;
    NodeId to = -1;
    VirtualTime sentAt;
    bool woke = false;
    std::optional<Message> msg;
    std::optional<NodeSnapshot> before;
    std::optional<NodeSnapshot> after;
};

struct TraceHeader {
    ProtocolKind protocol = ProtocolKind::Async;
    std::int32_t n = 0;
    std::uint64_t seed = 0;
    bool uniqueIds = false;
    std::string adversary;
};

class TraceSink {
public:
    virtual ~TraceSink() = default;
    virtual void record(const TraceRecord& rec) = 0;
};

/// 64-bit FNV-1a.
class Fnv1a {
public:
    static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ULL;
    static constexpr std::uint64_t kPrime = 0x100000001b3ULL;

    void byte(std::uint8_t b) {
        state_ ^= b;
        state_ *= kPrime;
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) byte(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void bytes(std::string_view s) {
        for (char c : s) byte(static_cast<std::uint8_t>(c));
    }

    std::uint64_t value() const { return state_; }

private:
    std::uint64_t state_ = kOffset;
};

/// Folds the canonical binary form of a record into a running trace hash.
void hashRecord(Fnv1a& h, const TraceRecord& rec);

std::string hashToHex(std::uint64_t h);

nlohmann::json toJson(const TraceHeader& h);
nlohmann::json toJson(const TraceRecord& rec, ProtocolKind protocol);
TraceHeader headerFromJson(const nlohmann::json& j);
TraceRecord recordFromJson(const nlohmann::json& j, ProtocolKind protocol);

/// Writes a JSON-lines trace: header, one line per record, then a summary
/// line carrying the trace hash.
class TraceFileWriter final : public TraceSink {
public:
    TraceFileWriter(const std::string& path, const TraceHeader& header);
    void record(const TraceRecord& rec) override;
    void finish(std::uint64_t traceHash);

private:
    std::ofstream out_;
    std::string path_;
    ProtocolKind protocol_;
};

class TraceParseError : public std::runtime_error {
public:
    TraceParseError(std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct LoadedTrace {
    TraceHeader header;
    std::vector<TraceRecord> records;
    std::optional<std::uint64_t> declaredHash;
};

LoadedTrace readTrace(const std::string& path);

}  // namespace lelect
