#include "lelect/async_election.hpp"

#include "lelect/adversary.hpp"

#include <random>

namespace lelect {

AsyncElection::AsyncElection(NodeId n, ElectionOptions opts)
    : n_(n), opts_(opts), schedule_(n), nodes_(static_cast<std::size_t>(n)),
      participants_(static_cast<std::size_t>(schedule_.phases()) + 1, 0) {}

Position AsyncElection::positionOf(NodeId node) const {
    const NodeState& st = state(node);
    Position p{st.rank, st.phase, std::nullopt};
    if (opts_.uniqueIds) p.tiebreak = static_cast<std::uint32_t>(node);
    return p;
}

std::vector<NodeId> AsyncElection::electedNodes() const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < n_; ++v) {
        if (nodes_[static_cast<std::size_t>(v)].cand == CandState::Elected) out.push_back(v);
    }
    return out;
}

NodeSnapshot AsyncElection::snapshot(NodeId node) const {
    const NodeState& st = state(node);
    NodeSnapshot s;
    s.role = static_cast<std::uint8_t>(st.cand);
    s.ref = st.ref;
    s.chosen = st.chosen ? st.chosen->port : -1;
    s.contender = st.contender ? st.contender->port : -1;
    s.terminated = st.terminated;
    s.leader = st.leader;
    return s;
}

void AsyncElection::anomaly(NodeId node, const Context& ctx, const std::string& what) {
    anomalies_.push_back("t=" + ctx.now().toString() + " node " + std::to_string(node) + ": " + what);
}

void AsyncElection::sendVia(NodeId node, NodeId port, const Message& msg, Context& ctx) {
    if (port == node) {
        ctx.sendLocal(node, msg);
    } else {
        ctx.send(node, port, msg);
    }
}

void AsyncElection::onWakeup(NodeId node, WakeCause cause, Context& ctx) {
    NodeState& st = at(node);
    if (st.cand != CandState::Asleep) {
        anomaly(node, ctx, "initialized twice");
        return;
    }
    st.ref = RefState::C0;
    if (cause == WakeCause::ByMessage) {
        st.cand = CandState::NonElected;
        return;
    }
    st.cand = CandState::Candidate;
    std::uniform_int_distribution<std::uint64_t> draw(1, rankDomain(n_));
    st.rank = draw(ctx.rng(node));
    ctx.reveal(node, positionOf(node));
    startPhase(node, 1, ctx);
}

void AsyncElection::startPhase(NodeId node, std::int32_t phase, Context& ctx) {
    NodeState& st = at(node);
    st.phase = phase;
    st.declinedSeen = false;
    st.inPhase = true;
    st.phaseStart = ctx.now();
    ++participants_[static_cast<std::size_t>(phase)];
    ctx.reveal(node, positionOf(node));

    std::vector<NodeId> targets;
    if (phase == schedule_.phases()) {
        targets.reserve(static_cast<std::size_t>(n_ - 1));
        for (NodeId v = 0; v < n_; ++v) {
            if (v != node) targets.push_back(v);
        }
    } else {
        targets = sampleTargets(node, schedule_.refCount(phase), n_, ctx.rng(node));
    }
    st.pendingReplies = static_cast<std::int32_t>(targets.size()) + 1;

    const Message req = Message::request(positionOf(node));
    ctx.sendLocal(node, req);
    for (NodeId v : targets) ctx.send(node, v, req);
}

void AsyncElection::onMessage(NodeId node, NodeId via, const Message& msg, Context& ctx) {
    if (at(node).terminated) return;
    switch (msg.type) {
        case MessageType::Request: onRequest(node, via, msg.pos, ctx); break;
        case MessageType::Approved:
        case MessageType::Declined: onReply(node, msg, ctx); break;
        case MessageType::Decide: onDecide(node, via, msg.pos, ctx); break;
        case MessageType::DecideReply: onDecideReply(node, msg, ctx); break;
        case MessageType::Leader: onLeader(node, msg.pos); break;
        default: anomaly(node, ctx, "unexpected " + std::string(messageTag(msg.type))); break;
    }
}

void AsyncElection::onReply(NodeId node, const Message& msg, Context& ctx) {
    NodeState& st = at(node);
    const Position self = positionOf(node);
    if (!st.inPhase || msg.pos.rank != self.rank || msg.pos.phase != self.phase) {
        // Echo of an earlier phase; already accounted for.
        return;
    }
    if (msg.type == MessageType::Declined) st.declinedSeen = true;
    if (--st.pendingReplies == 0) onPhaseComplete(node, ctx);
}

void AsyncElection::onPhaseComplete(NodeId node, Context& ctx) {
    NodeState& st = at(node);
    st.inPhase = false;
    const VirtualTime span = ctx.now() - st.phaseStart;
    if (span > maxPhaseSpan_) maxPhaseSpan_ = span;

    if (st.declinedSeen || st.cand == CandState::NonElected) {
        st.cand = CandState::NonElected;
        return;
    }
    if (st.phase < schedule_.phases()) {
        startPhase(node, st.phase + 1, ctx);
        return;
    }
    st.cand = CandState::Elected;
    const Message announce = Message::leader(positionOf(node));
    st.leader = announce.pos;
    for (NodeId v = 0; v < n_; ++v) {
        if (v != node) ctx.send(node, v, announce);
    }
    st.terminated = true;
}

void AsyncElection::onRequest(NodeId node, NodeId via, const Position& requester, Context& ctx) {
    NodeState& st = at(node);
    if (st.ref == RefState::C0) {
        st.chosen = Party{via, requester};
        st.ref = RefState::C1;
        sendVia(node, via, Message::approved(requester), ctx);
        return;
    }
    if (st.chosen && st.chosen->port == via) {
        if (st.chosen->pos.rank != requester.rank) anomaly(node, ctx, "chosen changed rank on its own link");
        st.chosen->pos = requester;
        sendVia(node, via, Message::approved(requester), ctx);
        return;
    }
    switch (st.ref) {
        case RefState::C1:
            if (behind(requester, st.chosen->pos)) {
                sendVia(node, via, Message::declined(requester), ctx);
            } else {
                st.contender = Party{via, requester};
                st.ref = RefState::C2;
                sendVia(node, st.chosen->port, Message::decide(requester), ctx);
            }
            break;
        case RefState::C2:
        case RefState::C3:
            if (behind(requester, st.contender->pos)) {
                sendVia(node, via, Message::declined(requester), ctx);
            } else {
                sendVia(node, st.contender->port, Message::declined(st.contender->pos), ctx);
                st.contender = Party{via, requester};
                st.ref = RefState::C3;
            }
            break;
        default:
            anomaly(node, ctx, "request before initialization");
            break;
    }
}

void AsyncElection::onDecide(NodeId node, NodeId via, const Position& contender, Context& ctx) {
    NodeState& st = at(node);
    const Position self = positionOf(node);
    bool contenderWins = true;
    if (st.cand == CandState::Candidate) {
        if (aheadOf(contender, self)) {
            st.cand = CandState::NonElected;
        } else {
            contenderWins = false;
        }
    } else if (st.cand != CandState::NonElected) {
        anomaly(node, ctx, "decide in state " + std::string(candStateName(st.cand)));
        contenderWins = false;
    }
    sendVia(node, via, Message::decideReply(contender, self, contenderWins), ctx);
}

void AsyncElection::onDecideReply(NodeId node, const Message& msg, Context& ctx) {
    NodeState& st = at(node);
    if (st.ref != RefState::C2 && st.ref != RefState::C3) {
        anomaly(node, ctx, "dispute reply in state " + std::string(refStateName(st.ref)));
        return;
    }
    st.chosen->pos = msg.chosen;
    const Party w = *st.contender;
    if (msg.contenderWins) {
        sendVia(node, w.port, Message::approved(w.pos), ctx);
        st.chosen = w;
        st.contender.reset();
        st.ref = RefState::C1;
    } else if (st.ref == RefState::C2 || aheadOf(st.chosen->pos, w.pos)) {
        sendVia(node, w.port, Message::declined(w.pos), ctx);
        st.contender.reset();
        st.ref = RefState::C1;
    } else {
        sendVia(node, st.chosen->port, Message::decide(w.pos), ctx);
        st.ref = RefState::C2;
    }
}

void AsyncElection::onLeader(NodeId node, const Position& leader) {
    NodeState& st = at(node);
    st.leader = leader;
    if (st.cand != CandState::Elected) st.cand = CandState::NonElected;
    st.terminated = true;
}

}  // namespace lelect
