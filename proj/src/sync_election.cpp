#include "lelect/sync_election.hpp"

#include "lelect/adversary.hpp"
#include "lelect/phase_schedule.hpp"

#include <random>

namespace lelect {

SyncElection::SyncElection(NodeId n, SyncElectionOptions opts)
    : n_(n), opts_(opts), nodes_(static_cast<std::size_t>(n)) {}

bool SyncElection::higher(const Position& a, const Position& b) const {
    if (a.rank != b.rank) return a.rank > b.rank;
    return a.tiebreak && b.tiebreak && *a.tiebreak > *b.tiebreak;
}

bool SyncElection::same(const Position& a, const Position& b) const {
    return a.rank == b.rank && a.tiebreak == b.tiebreak;
}

NodeSnapshot SyncElection::snapshot(NodeId node) const {
    const NodeState& st = state(node);
    NodeSnapshot s;
    s.role = static_cast<std::uint8_t>(st.role);
    s.terminated = st.role == SyncRole::Done;
    s.leader = st.leader;
    return s;
}

void SyncElection::onRound(NodeId node, const RoundInput& in, SyncContext& ctx) {
    NodeState& st = at(node);
    if (st.role == SyncRole::Done) return;

    // Winner announcements take precedence over everything else this round.
    bool sawWinner = false;
    for (const Inbound& m : in.inbox) {
        if (m.msg.type != MessageType::Winner) continue;
        if (!st.leader || higher(m.msg.pos, *st.leader)) st.leader = m.msg.pos;
        sawWinner = true;
    }
    if (sawWinner) {
        st.role = SyncRole::Done;
        return;
    }

    if (st.role == SyncRole::Asleep && !in.inbox.empty()) st.role = SyncRole::Referee;

    bool requested = false;
    for (const Inbound& m : in.inbox) {
        if (m.msg.type != MessageType::SyncRequest) continue;
        requested = true;
        if (!st.maxSeen || higher(m.msg.pos, *st.maxSeen)) st.maxSeen = m.msg.pos;
    }
    if (requested) {
        if (st.role == SyncRole::Silent) st.role = SyncRole::Referee;
        const Message reply = Message::syncReply(*st.maxSeen);
        for (const Inbound& m : in.inbox) {
            if (m.msg.type != MessageType::SyncRequest) continue;
            if (m.from == node) {
                ctx.sendLocal(node, reply);
            } else {
                ctx.send(node, m.from, reply);
            }
        }
    }

    for (const Inbound& m : in.inbox) {
        if (m.msg.type != MessageType::SyncReply) continue;
        if (st.role != SyncRole::Active) {
            anomaly(node, ctx, "reply outside an active wave");
            continue;
        }
        ++st.repliesSeen;
        if (!same(m.msg.pos, st.own)) st.repliesMatch = false;
    }

    if (st.role == SyncRole::Active && ctx.round() == st.activationRound + 2) {
        if (st.repliesSeen == st.expectedReplies && st.repliesMatch) {
            const Message win = Message::winner(st.own);
            for (NodeId v = 0; v < n_; ++v) {
                if (v != node) ctx.send(node, v, win);
            }
            st.leader = st.own;
            st.role = SyncRole::Done;
            winners_.push_back(node);
            return;
        }
        st.role = SyncRole::Referee;
    }

    if (in.spontaneousWake && st.role == SyncRole::Asleep) {
        st.role = SyncRole::Silent;
        st.wakeRound = ctx.round();
        std::uniform_int_distribution<std::uint64_t> draw(1, rankDomain(n_));
        st.own = Position{draw(ctx.rng(node)), 0, std::nullopt};
        if (opts_.uniqueIds) st.own.tiebreak = static_cast<std::uint32_t>(node);
        st.hasRank = true;
        ctx.reveal(node, st.own);
        attempt(node, ctx);
    } else if (in.timer && st.role == SyncRole::Silent) {
        attempt(node, ctx);
    }
}

void SyncElection::anomaly(NodeId node, const SyncContext& ctx, const std::string& what) {
    anomalies_.push_back("round " + std::to_string(ctx.round()) + " node " + std::to_string(node) + ": " + what);
}

void SyncElection::attempt(NodeId node, SyncContext& ctx) {
    NodeState& st = at(node);
    ++st.attempt;
    const double p = syncAttemptProbability(n_, st.attempt);
    bool success = true;
    if (p < 1.0) {
        std::bernoulli_distribution coin(p);
        success = coin(ctx.rng(node));
    }
    if (success) {
        activate(node, ctx);
    } else {
        ctx.setTimer(node, ctx.round() + 3);
    }
}

void SyncElection::activate(NodeId node, SyncContext& ctx) {
    NodeState& st = at(node);
    st.role = SyncRole::Active;
    st.activationRound = ctx.round();
    if (!firstActivation_) firstActivation_ = ctx.round();
    ++activations_;

    const std::int32_t count = syncRefereeCount(n_);
    std::vector<NodeId> targets;
    if (count > 0) targets = sampleTargets(node, count, n_, ctx.rng(node));
    st.expectedReplies = count + 1;
    st.repliesSeen = 0;
    st.repliesMatch = true;

    const Message req = Message::syncRequest(st.own);
    ctx.sendLocal(node, req);
    for (NodeId v : targets) ctx.send(node, v, req);
}

}  // namespace lelect
