#pragma once

#include "engine.hpp"
#include "message.hpp"
#include "phase_schedule.hpp"
#include "trace.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lelect {

struct ElectionOptions {
    /// Append the node index to every rank so positions are totally ordered.
    bool uniqueIds = false;
};

/// Per-node state machine of the asynchronous randomized election: phased
/// candidacy, referee arbitration through C0..C3, disputes, and the final
/// leader broadcast.
class AsyncElection final : public AsyncProtocol {
public:
    /// A candidate as recorded by a referee: the link it arrived on and its
    /// position at that time.
    struct Party {
        NodeId port = -1;
        Position pos;
    };

    struct NodeState {
        CandState cand = CandState::Asleep;
        RefState ref = RefState::None;
        std::optional<Party> chosen;
        std::optional<Party> contender;
        bool terminated = false;
        std::optional<Position> leader;

        // candidate side
        std::uint64_t rank = 0;
        std::int32_t phase = 0;
        std::int32_t pendingReplies = 0;
        bool declinedSeen = false;
        bool inPhase = false;
        VirtualTime phaseStart;
    };

    AsyncElection(NodeId n, ElectionOptions opts = {});

    void onWakeup(NodeId node, WakeCause cause, Context& ctx) override;
    void onMessage(NodeId node, NodeId via, const Message& msg, Context& ctx) override;
    NodeSnapshot snapshot(NodeId node) const override;

    const PhaseSchedule& schedule() const { return schedule_; }
    const NodeState& state(NodeId node) const { return nodes_.at(static_cast<std::size_t>(node)); }
    /// Current position of a node that has been a candidate.
    Position positionOf(NodeId node) const;

    std::vector<NodeId> electedNodes() const;
    /// participants[i] = number of candidates that started phase i.
    const std::vector<std::uint64_t>& phaseParticipants() const { return participants_; }
    /// Longest completed candidate phase (start of phase to last reply).
    VirtualTime maxPhaseSpan() const { return maxPhaseSpan_; }
    /// Protocol-level anomalies (e.g. a dispute reply with no dispute open).
    const std::vector<std::string>& anomalies() const { return anomalies_; }

private:
    NodeState& at(NodeId node) { return nodes_[static_cast<std::size_t>(node)]; }
    void sendVia(NodeId node, NodeId port, const Message& msg, Context& ctx);

    void startPhase(NodeId node, std::int32_t phase, Context& ctx);
    void onReply(NodeId node, const Message& msg, Context& ctx);
    void onPhaseComplete(NodeId node, Context& ctx);
    void onRequest(NodeId node, NodeId via, const Position& requester, Context& ctx);
    void onDecide(NodeId node, NodeId via, const Position& contender, Context& ctx);
    void onDecideReply(NodeId node, const Message& msg, Context& ctx);
    void onLeader(NodeId node, const Position& leader);
    void anomaly(NodeId node, const Context& ctx, const std::string& what);

    NodeId n_;
    ElectionOptions opts_;
    PhaseSchedule schedule_;
    std::vector<NodeState> nodes_;
    std::vector<std::uint64_t> participants_;
    VirtualTime maxPhaseSpan_;
    std::vector<std::string> anomalies_;
};

}  // namespace lelect
