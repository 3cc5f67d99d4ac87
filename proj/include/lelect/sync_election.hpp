#pragma once

#include "engine.hpp"
#include "message.hpp"
#include "trace.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lelect {

struct SyncElectionOptions {
    bool uniqueIds = false;
};

/// Lockstep election with silent and active candidates: up to three
/// activation attempts (at t, t+3, t+6), a referee poll by each active
/// candidate, and a winner broadcast.
class SyncElection final : public SyncProtocol {
public:
    struct NodeState {
        SyncRole role = SyncRole::Asleep;
        Position own;
        bool hasRank = false;
        std::int64_t wakeRound = -1;
        int attempt = 0;
        std::int64_t activationRound = -1;
        std::int32_t expectedReplies = 0;
        std::int32_t repliesSeen = 0;
        bool repliesMatch = true;
        std::optional<Position> maxSeen;
        std::optional<Position> leader;
    };

    SyncElection(NodeId n, SyncElectionOptions opts = {});

    void onRound(NodeId node, const RoundInput& in, SyncContext& ctx) override;
    NodeSnapshot snapshot(NodeId node) const override;

    const NodeState& state(NodeId node) const { return nodes_.at(static_cast<std::size_t>(node)); }

    /// Nodes that broadcast a Winner message.
    const std::vector<NodeId>& winners() const { return winners_; }
    std::optional<std::int64_t> firstActivationRound() const { return firstActivation_; }
    std::uint64_t activations() const { return activations_; }
    const std::vector<std::string>& anomalies() const { return anomalies_; }

private:
    NodeState& at(NodeId node) { return nodes_[static_cast<std::size_t>(node)]; }
    bool higher(const Position& a, const Position& b) const;
    bool same(const Position& a, const Position& b) const;
    void attempt(NodeId node, SyncContext& ctx);
    void activate(NodeId node, SyncContext& ctx);
    void anomaly(NodeId node, const SyncContext& ctx, const std::string& what);

    NodeId n_;
    SyncElectionOptions opts_;
    std::vector<NodeState> nodes_;
    std::vector<NodeId> winners_;
    std::optional<std::int64_t> firstActivation_;
    std::uint64_t activations_ = 0;
    std::vector<std::string> anomalies_;
};

}  // namespace lelect
