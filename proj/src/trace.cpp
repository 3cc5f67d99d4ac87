#include "lelect/trace.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <string>

namespace lelect {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 4> kCandNames = {"Asleep", "Candidate", "NonElected", "Elected"};
constexpr std::array<std::string_view, 5> kRefNames = {"None", "C0", "C1", "C2", "C3"};
constexpr std::array<std::string_view, 5> kSyncNames = {"Asleep", "Silent", "Active", "Referee", "Done"};
constexpr std::array<std::string_view, 4> kKindNames = {"Wakeup", "Deliver", "LocalDeliver", "Step"};

template <std::size_t N>
std::optional<std::uint8_t> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == s) return static_cast<std::uint8_t>(i);
    }
    return std::nullopt;
}

void hashPosition(Fnv1a& h, const Position& p) {
    h.u64(p.rank);
    h.i64(p.phase);
    h.byte(p.tiebreak ? 1 : 0);
    if (p.tiebreak) h.u64(*p.tiebreak);
}

void hashSnapshot(Fnv1a& h, const NodeSnapshot& s) {
    h.byte(s.role);
    h.byte(static_cast<std::uint8_t>(s.ref));
    h.i64(s.chosen);
    h.i64(s.contender);
    h.byte(s.terminated ? 1 : 0);
    h.byte(s.leader ? 1 : 0);
    if (s.leader) hashPosition(h, *s.leader);
}

json positionJson(const Position& p) {
    json j = {{"rank", p.rank}, {"phase", p.phase}};
    if (p.tiebreak) j["id"] = *p.tiebreak;
    return j;
}

Position positionFrom(const json& j) {
    Position p;
    p.rank = j.at("rank").get<std::uint64_t>();
    p.phase = j.value("phase", 0);
    if (j.contains("id")) p.tiebreak = j.at("id").get<std::uint32_t>();
    return p;
}

json snapshotJson(const NodeSnapshot& s, ProtocolKind protocol) {
    const std::string_view role = protocol == ProtocolKind::Async ? candStateName(static_cast<CandState>(s.role))
                                                                  : syncRoleName(static_cast<SyncRole>(s.role));
    json j = {{"role", role},
              {"ref", refStateName(s.ref)},
              {"chosen", s.chosen},
              {"contender", s.contender},
              {"terminated", s.terminated}};
    j["leader"] = s.leader ? positionJson(*s.leader) : json(nullptr);
    return j;
}

NodeSnapshot snapshotFrom(const json& j, ProtocolKind protocol) {
    NodeSnapshot s;
    const auto roleName = j.at("role").get<std::string>();
    const auto role = protocol == ProtocolKind::Async ? lookup(kCandNames, roleName) : lookup(kSyncNames, roleName);
    if (!role) throw std::invalid_argument("unknown role '" + roleName + "'");
    s.role = *role;
    const auto refName = j.at("ref").get<std::string>();
    const auto ref = lookup(kRefNames, refName);
    if (!ref) throw std::invalid_argument("unknown referee state '" + refName + "'");
    s.ref = static_cast<RefState>(*ref);
    s.chosen = j.at("chosen").get<std::int32_t>();
    s.contender = j.at("contender").get<std::int32_t>();
    s.terminated = j.at("terminated").get<bool>();
    if (!j.at("leader").is_null()) s.leader = positionFrom(j.at("leader"));
    return s;
}

}  // namespace

std::string_view protocolName(ProtocolKind p) { return p == ProtocolKind::Async ? "async" : "sync"; }

std::optional<ProtocolKind> parseProtocol(std::string_view name) {
    if (name == "async") return ProtocolKind::Async;
    if (name == "sync") return ProtocolKind::Sync;
    return std::nullopt;
}

std::string_view candStateName(CandState s) { return kCandNames[static_cast<std::size_t>(s)]; }
std::string_view refStateName(RefState s) { return kRefNames[static_cast<std::size_t>(s)]; }
std::string_view syncRoleName(SyncRole s) { return kSyncNames[static_cast<std::size_t>(s)]; }
std::string_view eventKindName(EventKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

void hashRecord(Fnv1a& h, const TraceRecord& rec) {
    h.i64(rec.time.ticks());
    h.u64(rec.seq);
    h.byte(static_cast<std::uint8_t>(rec.kind));
    h.i64(rec.from);
    h.i64(rec.to);
    h.i64(rec.sentAt.ticks());
    h.byte(rec.woke ? 1 : 0);
    h.byte(rec.msg ? 1 : 0);
    if (rec.msg) {
        h.byte(static_cast<std::uint8_t>(rec.msg->type));
        hashPosition(h, rec.msg->pos);
        if (rec.msg->type == MessageType::DecideReply) {
            hashPosition(h, rec.msg->chosen);
            h.byte(rec.msg->contenderWins ? 1 : 0);
        }
    }
    h.byte(rec.before ? 1 : 0);
    if (rec.before) hashSnapshot(h, *rec.before);
    h.byte(rec.after ? 1 : 0);
    if (rec.after) hashSnapshot(h, *rec.after);
}

std::string hashToHex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json toJson(const TraceHeader& h) {
    return {{"kind", "header"},
            {"protocol", protocolName(h.protocol)},
            {"n", h.n},
            {"seed", h.seed},
            {"uniqueIds", h.uniqueIds},
            {"adversary", h.adversary},
            {"ticksPerUnit", VirtualTime::kTicksPerUnit}};
}

TraceHeader headerFromJson(const json& j) {
    if (j.value("kind", "") != "header") throw std::invalid_argument("first line is not a trace header");
    TraceHeader h;
    const auto proto = parseProtocol(j.at("protocol").get<std::string>());
    if (!proto) throw std::invalid_argument("unknown protocol");
    h.protocol = *proto;
    h.n = j.at("n").get<std::int32_t>();
    h.seed = j.at("seed").get<std::uint64_t>();
    h.uniqueIds = j.at("uniqueIds").get<bool>();
    h.adversary = j.value("adversary", "");
    if (j.value("ticksPerUnit", VirtualTime::kTicksPerUnit) != VirtualTime::kTicksPerUnit) {
        throw std::invalid_argument("unsupported ticksPerUnit");
    }
    return h;
}

json toJson(const TraceRecord& rec, ProtocolKind protocol) {
    json j = {{"t", rec.time.ticks()},
              {"seq", rec.seq},
              {"kind", eventKindName(rec.kind)},
              {"from", rec.from},
              {"to", rec.to}};
    if (rec.msg) {
        j["sent"] = rec.sentAt.ticks();
        j["woke"] = rec.woke;
        j["msgType"] = messageTag(rec.msg->type);
        if (rec.msg->type == MessageType::DecideReply) {
            j["msgFields"] = {{"contender", positionJson(rec.msg->pos)},
                              {"chosen", positionJson(rec.msg->chosen)},
                              {"contenderWins", rec.msg->contenderWins}};
        } else {
            j["msgFields"] = positionJson(rec.msg->pos);
        }
    }
    if (rec.before || rec.after) {
        json state = json::object();
        if (rec.before) state["before"] = snapshotJson(*rec.before, protocol);
        if (rec.after) state["after"] = snapshotJson(*rec.after, protocol);
        j["state"] = std::move(state);
    }
    return j;
}

TraceRecord recordFromJson(const json& j, ProtocolKind protocol) {
    TraceRecord rec;
    rec.time = VirtualTime::fromTicks(j.at("t").get<std::int64_t>());
    rec.seq = j.at("seq").get<std::uint64_t>();
    const auto kindName = j.at("kind").get<std::string>();
    const auto kind = lookup(kKindNames, kindName);
    if (!kind) throw std::invalid_argument("unknown event kind '" + kindName + "'");
    rec.kind = static_cast<EventKind>(*kind);
    rec.from = j.at("from").get<NodeId>();
    rec.to = j.at("to").get<NodeId>();
    if (j.contains("msgType")) {
        const auto tagName = j.at("msgType").get<std::string>();
        const auto type = parseMessageTag(tagName);
        if (!type) throw std::invalid_argument("unknown message type '" + tagName + "'");
        Message m;
        m.type = *type;
        const json& f = j.at("msgFields");
        if (m.type == MessageType::DecideReply) {
            m.pos = positionFrom(f.at("contender"));
            m.chosen = positionFrom(f.at("chosen"));
            m.contenderWins = f.at("contenderWins").get<bool>();
        } else {
            m.pos = positionFrom(f);
        }
        rec.msg = m;
        rec.sentAt = VirtualTime::fromTicks(j.at("sent").get<std::int64_t>());
        rec.woke = j.value("woke", false);
    }
    if (j.contains("state")) {
        const json& s = j.at("state");
        if (s.contains("before")) rec.before = snapshotFrom(s.at("before"), protocol);
        if (s.contains("after")) rec.after = snapshotFrom(s.at("after"), protocol);
    }
    return rec;
}

TraceFileWriter::TraceFileWriter(const std::string& path, const TraceHeader& header)
    : out_(path), path_(path), protocol_(header.protocol) {
    if (!out_) throw std::runtime_error("cannot open trace file '" + path + "' for writing");
    out_ << toJson(header).dump() << '\n';
}

void TraceFileWriter::record(const TraceRecord& rec) { out_ << toJson(rec, protocol_).dump() << '\n'; }

void TraceFileWriter::finish(std::uint64_t traceHash) {
    out_ << json{{"kind", "summary"}, {"traceHash", hashToHex(traceHash)}}.dump() << '\n';
    out_.flush();
    if (!out_) throw std::runtime_error("failed writing trace file '" + path_ + "'");
}

TraceParseError::TraceParseError(std::size_t line, const std::string& what)
    : std::runtime_error("trace line " + std::to_string(line) + ": " + what), line_(line) {}

LoadedTrace readTrace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file '" + path + "'");
    LoadedTrace trace;
    std::string line;
    std::size_t lineNo = 0;
    bool haveHeader = false;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            if (!haveHeader) {
                trace.header = headerFromJson(j);
                haveHeader = true;
                continue;
            }
            if (j.value("kind", "") == "summary") {
                trace.declaredHash = std::stoull(j.at("traceHash").get<std::string>(), nullptr, 16);
                continue;
            }
            trace.records.push_back(recordFromJson(j, trace.header.protocol));
        } catch (const TraceParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw TraceParseError(lineNo, e.what());
        }
    }
    if (!haveHeader) throw TraceParseError(lineNo, "missing trace header");
    return trace;
}

}  // namespace lelect
