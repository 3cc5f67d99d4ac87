#include "lelect/checker.hpp"
#include "lelect/rng.hpp"

#include <algorithm>

namespace lelect {

namespace {

std::string posString(const Position& p) {
    std::string s = "(" + std::to_string(p.rank) + "," + std::to_string(p.phase);
    if (p.tiebreak) s += ",#" + std::to_string(*p.tiebreak);
    return s + ")";
}

std::int64_t roundOf(VirtualTime t) { return t.ticks() / VirtualTime::kTicksPerUnit; }

bool legalRefArrow(RefState from, RefState to) {
    using R = RefState;
    if (from == to) return true;
    switch (from) {
        case R::C0: return to == R::C1;
        case R::C1: return to == R::C2;
        case R::C2: return to == R::C3 || to == R::C1;
        case R::C3: return to == R::C2 || to == R::C1;
        default: return false;
    }
}

bool refShapeOk(const NodeSnapshot& s) {
    switch (s.ref) {
        case RefState::None:
        case RefState::C0: return s.chosen < 0 && s.contender < 0;
        case RefState::C1: return s.chosen >= 0 && s.contender < 0;
        case RefState::C2:
        case RefState::C3: return s.chosen >= 0 && s.contender >= 0;
    }
    return false;
}

bool isAsyncType(MessageType t) {
    return t == MessageType::Request || t == MessageType::Approved || t == MessageType::Declined ||
           t == MessageType::Decide || t == MessageType::DecideReply || t == MessageType::Leader;
}

}  // namespace

std::string toString(const Violation& v) { return "seq " + std::to_string(v.seq) + " [" + v.rule + "] " + v.detail; }

std::size_t TraceChecker::KeyHash::operator()(const RequestKey& k) const {
    const auto a = static_cast<std::uint32_t>(k.requester);
    const auto b = static_cast<std::uint32_t>(k.referee);
    return mixSeed((static_cast<std::uint64_t>(a) << 32 | b) ^ mixSeed(static_cast<std::uint32_t>(k.phase)));
}

std::size_t TraceChecker::KeyHash::operator()(const std::pair<NodeId, std::int64_t>& k) const {
    return mixSeed(static_cast<std::uint64_t>(k.second) ^ mixSeed(static_cast<std::uint32_t>(k.first)));
}

TraceChecker::TraceChecker(const TraceHeader& header, CheckerOptions opts)
    : header_(header), opts_(opts), nodes_(static_cast<std::size_t>(std::max(header.n, 0))) {
    const std::size_t expected = nodes_.size() * 64;
    edges_.reserve(expected);
    if (header.protocol == ProtocolKind::Async) {
        requests_.reserve(expected);
        phases_.reserve(nodes_.size() * 2);
    }
}

void TraceChecker::fail(std::uint64_t seq, const std::string& rule, const std::string& detail) {
    violations_.push_back({seq, rule, detail});
}

std::string TraceChecker::roleName(std::uint8_t role) const {
    if (header_.protocol == ProtocolKind::Async) return std::string(candStateName(static_cast<CandState>(role)));
    return std::string(syncRoleName(static_cast<SyncRole>(role)));
}

void TraceChecker::record(const TraceRecord& rec) {
    ++records_;
    checkOrder(rec);
    if (!validNode(rec.to) || (rec.kind != EventKind::Wakeup && rec.kind != EventKind::Step && !validNode(rec.from))) {
        fail(rec.seq, "node-range", "record names a node outside [0, " + std::to_string(header_.n) + ")");
        return;
    }
    if (rec.kind == EventKind::Deliver || rec.kind == EventKind::LocalDeliver) checkMessage(rec);
    checkTransition(rec);
}

void TraceChecker::checkOrder(const TraceRecord& rec) {
    if (havePrev_ && (rec.time < prevTime_ || (rec.time == prevTime_ && rec.seq <= prevSeq_))) {
        fail(rec.seq, "event-order",
             "(" + rec.time.toString() + ", " + std::to_string(rec.seq) + ") does not follow (" +
                 prevTime_.toString() + ", " + std::to_string(prevSeq_) + ")");
    }
    havePrev_ = true;
    prevTime_ = rec.time;
    prevSeq_ = rec.seq;
    if (rec.kind == EventKind::Wakeup && !firstWake_ && rec.before && rec.before->role == 0) firstWake_ = rec.time;
}

void TraceChecker::checkMessage(const TraceRecord& rec) {
    if (!rec.msg) {
        fail(rec.seq, "missing-message", "delivery without a message");
        return;
    }
    if (rec.kind == EventKind::LocalDeliver) {
        if (rec.from != rec.to) fail(rec.seq, "local-delivery", "local delivery between distinct nodes");
    } else {
        if (rec.from == rec.to) fail(rec.seq, "local-delivery", "remote delivery from a node to itself");
        const std::uint64_t key = static_cast<std::uint64_t>(rec.from) * static_cast<std::uint64_t>(header_.n) +
                                  static_cast<std::uint64_t>(rec.to);
        EdgeView& edge = edges_[key];
        if (edge.any && rec.seq < edge.lastSeq) {
            fail(rec.seq, "fifo",
                 "edge " + std::to_string(rec.from) + "->" + std::to_string(rec.to) + " delivered seq " +
                     std::to_string(rec.seq) + " after seq " + std::to_string(edge.lastSeq));
        }
        edge.any = true;
        edge.lastSeq = std::max(edge.lastSeq, rec.seq);
    }
    if (header_.protocol == ProtocolKind::Async) {
        checkAsyncMessage(rec);
    } else {
        checkSyncMessage(rec);
    }
}

void TraceChecker::checkAsyncMessage(const TraceRecord& rec) {
    const Message& m = *rec.msg;
    if (!isAsyncType(m.type)) {
        fail(rec.seq, "message-type", std::string(messageTag(m.type)) + " in an asynchronous trace");
        return;
    }
    if (rec.kind == EventKind::LocalDeliver) {
        if (rec.time != rec.sentAt) fail(rec.seq, "delay-bound", "local delivery with non-zero delay");
    } else if (!(rec.sentAt < rec.time) || rec.time - rec.sentAt > kOneUnit) {
        fail(rec.seq, "delay-bound",
             "sent at " + rec.sentAt.toString() + ", delivered at " + rec.time.toString());
    }

    const bool targetTerminated = rec.before ? rec.before->terminated : nodes_[static_cast<std::size_t>(rec.to)].state.terminated;
    switch (m.type) {
        case MessageType::Request: {
            const NodeView& sender = nodes_[static_cast<std::size_t>(rec.from)];
            if (sender.retiredAt && *sender.retiredAt < rec.sentAt) {
                fail(rec.seq, "retired-request",
                     "node " + std::to_string(rec.from) + " retired at " + sender.retiredAt->toString() +
                         " but sent a request at " + rec.sentAt.toString());
            }
            const RequestKey key{rec.from, rec.to, m.pos.phase};
            auto [it, inserted] = requests_.try_emplace(key);
            if (!inserted) {
                fail(rec.seq, "duplicate-request",
                     "node " + std::to_string(rec.from) + " asked " + std::to_string(rec.to) + " twice in phase " +
                         std::to_string(m.pos.phase));
            }
            it->second.seq = rec.seq;
            it->second.refereeWasTerminated = targetTerminated;
            auto [ph, fresh] = phases_.try_emplace({rec.from, m.pos.phase});
            if (fresh || rec.sentAt < ph->second.start) ph->second.start = rec.sentAt;
            break;
        }
        case MessageType::Approved:
        case MessageType::Declined: {
            const RequestKey key{rec.to, rec.from, m.pos.phase};
            auto it = requests_.find(key);
            if (it == requests_.end()) {
                fail(rec.seq, "reply-conservation",
                     std::string(messageTag(m.type)) + " " + posString(m.pos) + " from " + std::to_string(rec.from) +
                         " answers no request");
                break;
            }
            if (++it->second.replies > 1) {
                fail(rec.seq, "reply-conservation",
                     "request " + posString(m.pos) + " of node " + std::to_string(rec.to) + " answered twice");
            }
            if (!targetTerminated) {
                auto ph = phases_.find({rec.to, m.pos.phase});
                if (ph != phases_.end()) ph->second.lastReply = rec.time;
            }
            break;
        }
        default: break;
    }
}

void TraceChecker::checkSyncMessage(const TraceRecord& rec) {
    const Message& m = *rec.msg;
    if (isAsyncType(m.type)) {
        fail(rec.seq, "message-type", std::string(messageTag(m.type)) + " in a synchronous trace");
        return;
    }
    if (rec.time - rec.sentAt != kOneUnit) {
        fail(rec.seq, "delay-bound",
             "lockstep message sent at " + rec.sentAt.toString() + " delivered at " + rec.time.toString());
    }
    if (!firstWake_) {
        fail(rec.seq, "round-bound", "delivery before any wake-up");
    } else if (rec.time - *firstWake_ > VirtualTime::units(opts_.syncRoundLimit)) {
        fail(rec.seq, "round-bound",
             "delivery at round " + std::to_string(roundOf(rec.time)) + ", more than " +
                 std::to_string(opts_.syncRoundLimit) + " rounds after the first wake-up at round " +
                 std::to_string(roundOf(*firstWake_)));
    }

    const std::int64_t sent = roundOf(rec.sentAt);
    if (!firstActivation_ || sent < *firstActivation_) {
        fail(rec.seq, "sync-window", "message sent at round " + std::to_string(sent) + " before any activation");
    }
    const auto activation = [&](NodeId v) { return nodes_[static_cast<std::size_t>(v)].activationRound; };
    switch (m.type) {
        case MessageType::SyncRequest:
            if (activation(rec.from) != sent) {
                fail(rec.seq, "sync-window",
                     "request from node " + std::to_string(rec.from) + " outside its activation round");
            }
            syncRequestsIn_[{rec.to, roundOf(rec.time)}] += 1;
            break;
        case MessageType::SyncReply:
            if (!syncRequestsIn_.contains({rec.from, sent}) || activation(rec.to) != sent - 1) {
                fail(rec.seq, "sync-window",
                     "reply from node " + std::to_string(rec.from) + " at round " + std::to_string(sent) +
                         " answers no request");
            }
            break;
        case MessageType::Winner:
            if (activation(rec.from) != sent - 2) {
                fail(rec.seq, "sync-window",
                     "winner broadcast by node " + std::to_string(rec.from) + " not two rounds after activation");
            }
            if (std::find(winners_.begin(), winners_.end(), rec.from) == winners_.end()) winners_.push_back(rec.from);
            break;
        default: break;
    }
}

void TraceChecker::checkTransition(const TraceRecord& rec) {
    if (!rec.before && !rec.after && header_.protocol == ProtocolKind::Sync && rec.kind != EventKind::Step &&
        rec.kind != EventKind::Wakeup) {
        return;  // lockstep deliveries only queue input; the node's Step record carries its state
    }
    if (!rec.before || !rec.after) {
        fail(rec.seq, "missing-state", "record lacks before/after state");
        return;
    }
    NodeView& v = nodes_[static_cast<std::size_t>(rec.to)];
    const NodeSnapshot& before = *rec.before;
    const NodeSnapshot& after = *rec.after;
    if (!(before == v.state)) {
        fail(rec.seq, "state-continuity",
             "node " + std::to_string(rec.to) + " starts in a state different from where it last ended");
    }
    if (before.terminated && !(before == after)) {
        fail(rec.seq, "absorbing", "terminated node " + std::to_string(rec.to) + " changed state");
    }
    if (before.leader && before.leader != after.leader) {
        fail(rec.seq, "absorbing", "node " + std::to_string(rec.to) + " changed its leader");
    }
    if (header_.protocol == ProtocolKind::Async) {
        checkAsyncTransition(rec, before, after);
    } else {
        checkSyncTransition(rec, before, after);
    }
    v.state = after;
}

void TraceChecker::checkAsyncTransition(const TraceRecord& rec, const NodeSnapshot& before,
                                        const NodeSnapshot& after) {
    using C = CandState;
    const auto b = static_cast<C>(before.role);
    const auto a = static_cast<C>(after.role);
    if (after.role > static_cast<std::uint8_t>(C::Elected)) {
        fail(rec.seq, "candidate-transition", "unknown candidate state");
        return;
    }
    const bool wokeSpontaneously = rec.kind == EventKind::Wakeup;
    bool legal = a == b;
    if (!legal) {
        switch (b) {
            case C::Asleep:
                legal = (a == C::Candidate && wokeSpontaneously) || (a == C::NonElected && rec.woke);
                break;
            case C::Candidate: legal = a == C::NonElected || a == C::Elected; break;
            default: legal = false; break;
        }
    }
    if (!legal) {
        fail(rec.seq, "candidate-transition",
             "node " + std::to_string(rec.to) + ": " + roleName(before.role) + " -> " + roleName(after.role));
    }

    bool refLegal = legalRefArrow(before.ref, after.ref);
    if (before.ref == RefState::None && after.ref != RefState::None) {
        refLegal = (after.ref == RefState::C0 && (wokeSpontaneously || rec.woke)) ||
                   (after.ref == RefState::C1 && rec.woke);
    }
    if (!refLegal) {
        fail(rec.seq, "referee-transition",
             "node " + std::to_string(rec.to) + ": " + std::string(refStateName(before.ref)) + " -> " +
                 std::string(refStateName(after.ref)));
    }
    if (!refShapeOk(after)) {
        fail(rec.seq, "referee-state",
             "node " + std::to_string(rec.to) + " in " + std::string(refStateName(after.ref)) +
                 " with chosen=" + std::to_string(after.chosen) + " contender=" + std::to_string(after.contender));
    }
    if ((a == C::Asleep) != (after.ref == RefState::None)) {
        fail(rec.seq, "referee-state", "node " + std::to_string(rec.to) + " referee state inconsistent with wake status");
    }

    NodeView& v = nodes_[static_cast<std::size_t>(rec.to)];
    if (a == C::NonElected && b != C::NonElected) v.retiredAt = rec.time;
    if (a == C::Elected && b != C::Elected) {
        elected_.push_back(rec.to);
        if (elected_.size() > 1) {
            fail(rec.seq, "unique-elected",
                 "node " + std::to_string(rec.to) + " elected while node " + std::to_string(elected_.front()) +
                     " already is");
        }
    }
}

void TraceChecker::checkSyncTransition(const TraceRecord& rec, const NodeSnapshot& before,
                                       const NodeSnapshot& after) {
    using S = SyncRole;
    if (after.role > static_cast<std::uint8_t>(S::Done)) {
        fail(rec.seq, "role-transition", "unknown role");
        return;
    }
    const auto b = static_cast<S>(before.role);
    const auto a = static_cast<S>(after.role);
    bool legal = a == b;
    if (!legal) {
        switch (b) {
            case S::Asleep:
                legal = a == S::Referee || a == S::Done ||
                        ((a == S::Silent || a == S::Active) && rec.kind == EventKind::Wakeup);
                break;
            case S::Silent: legal = a == S::Active || a == S::Referee || a == S::Done; break;
            case S::Active: legal = a == S::Referee || a == S::Done; break;
            case S::Referee: legal = a == S::Done; break;
            case S::Done: legal = false; break;
        }
    }
    if (!legal) {
        fail(rec.seq, "role-transition",
             "node " + std::to_string(rec.to) + ": " + roleName(before.role) + " -> " + roleName(after.role));
    }
    if (after.ref != RefState::None || after.chosen >= 0 || after.contender >= 0) {
        fail(rec.seq, "referee-state", "lockstep node carries asynchronous referee state");
    }
    if (a == S::Active && b != S::Active) {
        const std::int64_t r = roundOf(rec.time);
        nodes_[static_cast<std::size_t>(rec.to)].activationRound = r;
        if (!firstActivation_) firstActivation_ = r;
    }
}

void TraceChecker::checkAgreement(const std::vector<NodeId>& winners) {
    if (winners.size() != 1) return;
    const auto& leader = nodes_[static_cast<std::size_t>(winners.front())].state.leader;
    if (!leader) {
        fail(0, "agreement", "winning node " + std::to_string(winners.front()) + " holds no leader");
        return;
    }
    for (NodeId v = 0; v < header_.n; ++v) {
        const auto& mine = nodes_[static_cast<std::size_t>(v)].state.leader;
        if (!mine || *mine != *leader) {
            fail(0, "agreement",
                 "node " + std::to_string(v) + " holds " + (mine ? posString(*mine) : std::string("no leader")) +
                     ", expected " + posString(*leader));
        }
    }
}

void TraceChecker::finishAsync() {
    std::vector<std::pair<RequestKey, std::uint64_t>> unanswered;
    for (const auto& [key, req] : requests_) {
        if (req.replies > 0 || req.refereeWasTerminated) continue;
        const NodeSnapshot& referee = nodes_[static_cast<std::size_t>(key.referee)].state;
        if (referee.terminated && referee.contender == key.requester) continue;
        unanswered.emplace_back(key, req.seq);
    }
    std::sort(unanswered.begin(), unanswered.end());
    for (const auto& [key, seq] : unanswered) {
        fail(seq, "reply-conservation",
             "request of node " + std::to_string(key.requester) + " to " + std::to_string(key.referee) +
                 " in phase " + std::to_string(key.phase) + " never answered");
    }
    std::vector<std::pair<std::pair<NodeId, std::int64_t>, VirtualTime>> slow;
    for (const auto& [key, ph] : phases_) {
        if (!ph.lastReply) continue;
        const VirtualTime span = *ph.lastReply - ph.start;
        if (span > opts_.phaseSpanLimit) slow.emplace_back(key, span);
    }
    std::sort(slow.begin(), slow.end());
    for (const auto& [key, span] : slow) {
        fail(0, "phase-span",
             "node " + std::to_string(key.first) + " phase " + std::to_string(key.second) + " took " +
                 span.toString() + " units");
    }
    if (elected_.empty()) fail(0, "no-leader", "no node reached Elected");
    checkAgreement(elected_);
}

void TraceChecker::finishSync() {
    // A lone node wins without anyone to announce it to.
    if (winners_.empty() && header_.n == 1 && nodes_[0].state.leader) winners_.push_back(0);
    if (winners_.empty()) fail(0, "no-leader", "no winner was announced");
    if (winners_.size() > 1) {
        fail(0, "unique-winner", std::to_string(winners_.size()) + " nodes announced themselves winner");
    }
    checkAgreement(winners_);
}

std::vector<Violation> TraceChecker::finish() {
    if (!finished_) {
        finished_ = true;
        if (records_ == 0) {
            fail(0, "empty-trace", "trace holds no events");
        } else if (header_.protocol == ProtocolKind::Async) {
            finishAsync();
        } else {
            finishSync();
        }
    }
    return violations_;
}

VerifyResult verifyTrace(const std::string& path, CheckerOptions opts) {
    LoadedTrace trace = readTrace(path);
    VerifyResult result;
    result.header = trace.header;
    result.records = trace.records.size();
    result.declaredHash = trace.declaredHash;

    TraceChecker checker(trace.header, opts);
    Fnv1a hash;
    for (const TraceRecord& rec : trace.records) {
        hashRecord(hash, rec);
        checker.record(rec);
    }
    result.computedHash = hash.value();
    result.violations = checker.finish();
    if (!trace.declaredHash) {
        result.violations.push_back({0, "trace-hash", "trace has no summary line"});
    } else if (*trace.declaredHash != result.computedHash) {
        result.violations.push_back({0, "trace-hash",
                                     "declared " + hashToHex(*trace.declaredHash) + ", recomputed " +
                                         hashToHex(result.computedHash)});
    }
    return result;
}

}  // namespace lelect
