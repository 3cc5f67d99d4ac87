#include "lelect/engine.hpp"

#include <algorithm>
#include <string>

namespace lelect {

namespace {

bool rankAbove(const Position& a, const Position& b) {
    if (a.rank != b.rank) return a.rank > b.rank;
    return a.tiebreak && b.tiebreak && *a.tiebreak > *b.tiebreak;
}

void revealInto(ExecutionHistory& h, NodeId node, const Position& pos) {
    h.revealed[static_cast<std::size_t>(node)] = pos;
    if (!h.topCandidate || rankAbove(pos, *h.revealed[static_cast<std::size_t>(*h.topCandidate)])) {
        h.topCandidate = node;
    }
}

}  // namespace

VirtualTime RunStats::elapsed() const {
    if (!firstWake || !lastMessage || *lastMessage < *firstWake) return {};
    return *lastMessage - *firstWake;
}

// ---------------------------------------------------------------------------
// AsyncSimulator

AsyncSimulator::AsyncSimulator(NodeId n, std::uint64_t trialSeed, DelayOracle& delays, EngineOptions opts)
    : n_(n), trialSeed_(trialSeed), delays_(delays), opts_(opts) {
    if (n < 1) throw EngineError("network needs at least one node");
    rngs_.resize(static_cast<std::size_t>(n));
    awake_.assign(static_cast<std::size_t>(n), false);
    history_.revealed.resize(static_cast<std::size_t>(n));
    lastDelivery_.reserve(static_cast<std::size_t>(n) * 64);
}

void AsyncSimulator::checkNode(NodeId node) const {
    if (node < 0 || node >= n_) throw EngineError("node " + std::to_string(node) + " out of range");
}

std::uint64_t AsyncSimulator::schedule(VirtualTime time, EventKind kind, NodeId from, NodeId to, const Message& msg) {
    if (time < now_) {
        throw EngineError("cannot schedule at " + time.toString() + " before current time " + now_.toString());
    }
    const std::uint64_t seq = nextSeq_++;
    std::uint32_t slot;
    if (freeSlots_.empty()) {
        slot = static_cast<std::uint32_t>(slots_.size());
        slots_.push_back(Event{time, seq, kind, from, to, now_, msg});
    } else {
        slot = freeSlots_.back();
        freeSlots_.pop_back();
        slots_[slot] = Event{time, seq, kind, from, to, now_, msg};
    }
    queue_.push(Pending{time, seq, slot});
    return seq;
}

void AsyncSimulator::sendWithDelay(NodeId from, NodeId to, const Message& msg, VirtualTime delay) {
    checkNode(from);
    checkNode(to);
    if (from == to) throw EngineError("remote send to self; use sendLocal");
    if (!awake_[static_cast<std::size_t>(from)]) throw EngineError("sender " + std::to_string(from) + " is asleep");
    if (delay <= VirtualTime{} || delay > kOneUnit) {
        throw EngineError("delay " + delay.toString() + " outside (0, 1]");
    }
    VirtualTime at = now_ + delay;
    const std::uint64_t key = static_cast<std::uint64_t>(from) * static_cast<std::uint64_t>(n_) +
                              static_cast<std::uint64_t>(to);
    auto [it, inserted] = lastDelivery_.try_emplace(key, at);
    if (!inserted) {
        at = std::max(at, it->second);
        it->second = at;
    }
    schedule(at, EventKind::Deliver, from, to, msg);
    ++stats_.counts[index(msg.type)];
    ++stats_.remoteMessages;
    ++history_.sends;
}

void AsyncSimulator::send(NodeId from, NodeId to, const Message& msg) {
    const SendContext ctx{from, to, msg.type, now_, history_};
    sendWithDelay(from, to, msg, delays_.delay(ctx));
}

void AsyncSimulator::sendLocal(NodeId node, const Message& msg) {
    checkNode(node);
    if (!awake_[static_cast<std::size_t>(node)]) throw EngineError("node " + std::to_string(node) + " is asleep");
    schedule(now_, EventKind::LocalDeliver, node, node, msg);
    ++stats_.localMessages;
}

RngStream& AsyncSimulator::rng(NodeId node) {
    checkNode(node);
    auto& slot = rngs_[static_cast<std::size_t>(node)];
    if (!slot) slot.emplace(nodeStream(trialSeed_, node));
    return *slot;
}

void AsyncSimulator::reveal(NodeId node, const Position& pos) {
    checkNode(node);
    revealInto(history_, node, pos);
}

void AsyncSimulator::emit(TraceRecord& rec) {
    hashRecord(hash_, rec);
    history_.digest = hash_.value();
    for (TraceSink* sink : sinks_) sink->record(rec);
}

bool AsyncSimulator::step(AsyncProtocol& protocol) {
    if (queue_.empty()) return false;
    const std::uint32_t slot = queue_.top().slot;
    queue_.pop();
    const Event ev = slots_[slot];
    freeSlots_.push_back(slot);
    now_ = ev.time;
    ++stats_.eventsProcessed;

    TraceRecord rec;
    rec.time = ev.time;
    rec.seq = ev.seq;
    rec.kind = ev.kind;
    rec.from = ev.from;
    rec.to = ev.to;
    rec.sentAt = ev.sentAt;
    rec.before = protocol.snapshot(ev.to);

    auto isAwake = awake_[static_cast<std::size_t>(ev.to)];
    switch (ev.kind) {
        case EventKind::Wakeup:
            if (!isAwake) {
                isAwake = true;
                ++history_.wakeups;
                if (!stats_.firstWake) stats_.firstWake = ev.time;
                protocol.onWakeup(ev.to, WakeCause::Spontaneous, *this);
            }
            break;
        case EventKind::Deliver:
        case EventKind::LocalDeliver:
            rec.msg = ev.msg;
            if (!isAwake) {
                isAwake = true;
                rec.woke = true;
                protocol.onWakeup(ev.to, WakeCause::ByMessage, *this);
            }
            ++history_.deliveries;
            stats_.lastMessage = ev.time;
            protocol.onMessage(ev.to, ev.from, ev.msg, *this);
            break;
        case EventKind::Step:
            throw EngineError("step events are lockstep-only");
    }
    rec.after = protocol.snapshot(ev.to);
    emit(rec);
    return true;
}

RunStats AsyncSimulator::run(AsyncProtocol& protocol, const WakeSchedule& wakes) {
    if (wakes.empty()) throw EngineError("wake schedule wakes no node");
    std::vector<bool> seen(static_cast<std::size_t>(n_), false);
    for (const WakeEntry& w : wakes) {
        checkNode(w.node);
        if (seen[static_cast<std::size_t>(w.node)]) {
            throw EngineError("node " + std::to_string(w.node) + " woken twice");
        }
        seen[static_cast<std::size_t>(w.node)] = true;
        if (w.time < VirtualTime{}) throw EngineError("negative wake-up time");
    }
    for (const WakeEntry& w : wakes) schedule(w.time, EventKind::Wakeup, -1, w.node);

    while (!queue_.empty()) {
        if (stats_.eventsProcessed >= opts_.eventBudget) {
            stats_.budgetExceeded = true;
            break;
        }
        step(protocol);
    }
    stats_.traceHash = hash_.value();
    return stats_;
}

// ---------------------------------------------------------------------------
// SyncSimulator

SyncSimulator::SyncSimulator(NodeId n, std::uint64_t trialSeed, EngineOptions opts)
    : n_(n), trialSeed_(trialSeed), opts_(opts) {
    if (n < 1) throw EngineError("network needs at least one node");
    rngs_.resize(static_cast<std::size_t>(n));
    awake_.assign(static_cast<std::size_t>(n), false);
    history_.revealed.resize(static_cast<std::size_t>(n));
}

void SyncSimulator::checkNode(NodeId node) const {
    if (node < 0 || node >= n_) throw EngineError("node " + std::to_string(node) + " out of range");
}

void SyncSimulator::send(NodeId from, NodeId to, const Message& msg) {
    checkNode(from);
    checkNode(to);
    if (from == to) throw EngineError("remote send to self; use sendLocal");
    if (!awake_[static_cast<std::size_t>(from)]) throw EngineError("sender " + std::to_string(from) + " is asleep");
    outbox_.push_back(InFlight{nextSeq_++, from, to, false, msg});
    ++stats_.counts[index(msg.type)];
    ++stats_.remoteMessages;
    ++history_.sends;
}

void SyncSimulator::sendLocal(NodeId node, const Message& msg) {
    checkNode(node);
    if (!awake_[static_cast<std::size_t>(node)]) throw EngineError("node " + std::to_string(node) + " is asleep");
    outbox_.push_back(InFlight{nextSeq_++, node, node, true, msg});
    ++stats_.localMessages;
}

RngStream& SyncSimulator::rng(NodeId node) {
    checkNode(node);
    auto& slot = rngs_[static_cast<std::size_t>(node)];
    if (!slot) slot.emplace(nodeStream(trialSeed_, node));
    return *slot;
}

void SyncSimulator::reveal(NodeId node, const Position& pos) {
    checkNode(node);
    revealInto(history_, node, pos);
}

void SyncSimulator::setTimer(NodeId node, std::int64_t round) {
    checkNode(node);
    if (round <= round_) throw EngineError("timer must fire in a later round");
    timers_[round].push_back(node);
}

void SyncSimulator::emit(TraceRecord& rec) {
    hashRecord(hash_, rec);
    history_.digest = hash_.value();
    for (TraceSink* sink : sinks_) sink->record(rec);
}

RunStats SyncSimulator::run(SyncProtocol& protocol, const std::vector<SyncWake>& wakes) {
    if (wakes.empty()) throw EngineError("wake schedule wakes no node");
    std::map<std::int64_t, std::vector<NodeId>> pendingWakes;
    std::vector<bool> seen(static_cast<std::size_t>(n_), false);
    for (const SyncWake& w : wakes) {
        checkNode(w.node);
        if (seen[static_cast<std::size_t>(w.node)]) {
            throw EngineError("node " + std::to_string(w.node) + " woken twice");
        }
        if (w.round < 0) throw EngineError("negative wake-up round");
        seen[static_cast<std::size_t>(w.node)] = true;
        pendingWakes[w.round].push_back(w.node);
    }

    bool started = false;
    std::vector<Inbound> inbox;
    while (true) {
        std::optional<std::int64_t> next;
        auto consider = [&](std::int64_t r) {
            if (!next || r < *next) next = r;
        };
        if (!outbox_.empty()) consider(round_ + 1);
        if (!pendingWakes.empty()) consider(pendingWakes.begin()->first);
        if (!timers_.empty()) consider(timers_.begin()->first);
        if (!next) break;
        if (stats_.eventsProcessed >= opts_.eventBudget) {
            stats_.budgetExceeded = true;
            break;
        }
        if (started && *next <= round_) throw EngineError("lockstep rounds must advance");
        started = true;
        round_ = *next;

        std::vector<InFlight> deliveries;
        deliveries.swap(outbox_);
        std::vector<NodeId> waking;
        if (auto it = pendingWakes.find(round_); it != pendingWakes.end()) {
            waking = std::move(it->second);
            pendingWakes.erase(it);
        }
        std::vector<NodeId> timed;
        if (auto it = timers_.find(round_); it != timers_.end()) {
            timed = std::move(it->second);
            timers_.erase(it);
        }

        const VirtualTime now = VirtualTime::units(round_);
        for (const InFlight& f : deliveries) {
            TraceRecord rec;
            rec.time = now;
            rec.seq = f.seq;
            rec.kind = f.local ? EventKind::LocalDeliver : EventKind::Deliver;
            rec.from = f.from;
            rec.to = f.to;
            rec.sentAt = VirtualTime::units(round_ - 1);
            rec.msg = f.msg;
            auto&& isAwake = awake_[static_cast<std::size_t>(f.to)];
            if (!isAwake) {
                isAwake = true;
                rec.woke = true;
            }
            ++stats_.eventsProcessed;
            ++history_.deliveries;
            emit(rec);
        }
        if (!deliveries.empty()) stats_.lastMessage = now;

        std::stable_sort(deliveries.begin(), deliveries.end(),
                         [](const InFlight& a, const InFlight& b) { return a.to < b.to; });
        std::sort(waking.begin(), waking.end());
        std::sort(timed.begin(), timed.end());
        timed.erase(std::unique(timed.begin(), timed.end()), timed.end());

        std::vector<NodeId> involved;
        involved.reserve(deliveries.size() + waking.size() + timed.size());
        for (const InFlight& f : deliveries) {
            if (involved.empty() || involved.back() != f.to) involved.push_back(f.to);
        }
        involved.insert(involved.end(), waking.begin(), waking.end());
        involved.insert(involved.end(), timed.begin(), timed.end());
        std::sort(involved.begin(), involved.end());
        involved.erase(std::unique(involved.begin(), involved.end()), involved.end());

        std::size_t cursor = 0;
        for (NodeId node : involved) {
            inbox.clear();
            while (cursor < deliveries.size() && deliveries[cursor].to < node) ++cursor;
            while (cursor < deliveries.size() && deliveries[cursor].to == node) {
                inbox.push_back(Inbound{deliveries[cursor].from, deliveries[cursor].msg});
                ++cursor;
            }
            RoundInput in;
            in.spontaneousWake = std::binary_search(waking.begin(), waking.end(), node);
            in.timer = std::binary_search(timed.begin(), timed.end(), node);
            in.inbox = inbox;

            TraceRecord rec;
            rec.time = now;
            rec.seq = nextSeq_++;
            rec.kind = in.spontaneousWake ? EventKind::Wakeup : EventKind::Step;
            rec.to = node;
            rec.before = protocol.snapshot(node);
            auto&& isAwake = awake_[static_cast<std::size_t>(node)];
            if (in.spontaneousWake && !isAwake) {
                isAwake = true;
                ++history_.wakeups;
                if (!stats_.firstWake) stats_.firstWake = now;
            }
            protocol.onRound(node, in, *this);
            rec.after = protocol.snapshot(node);
            ++stats_.eventsProcessed;
            emit(rec);
        }
    }
    stats_.traceHash = hash_.value();
    return stats_;
}

}  // namespace lelect
