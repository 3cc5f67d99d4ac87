#pragma once

#include "engine.hpp"
#include "rng.hpp"
#include "time.hpp"

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace lelect {

class AdversaryError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A built-in generator or policy selected by name, with string-keyed
/// numeric parameters.
struct NamedSpec {
    std::string name;
    std::map<std::string, double> params;

    bool operator==(const NamedSpec&) const = default;

    /// "name" or "name:v1,v2" with positional values bound to the
    /// builtin's parameter names (e.g. "staggered:8,0.5").
    static NamedSpec parse(const std::string& text);
    std::string toString() const;
};

struct AdversaryConfig {
    NamedSpec wake{"all-at-zero", {}};
    NamedSpec delay{"unit", {}};
    std::uint64_t adversarySeed = 0;

    bool operator==(const AdversaryConfig&) const = default;

    /// Short label, e.g. "staggered:8,0.5/epsilon-rush:0.01".
    std::string label() const;
};

nlohmann::json toJson(const AdversaryConfig& cfg);
AdversaryConfig adversaryFromJson(const nlohmann::json& j);

/// Builds one of: all-at-zero, single, staggered(k, gap), random-subset(p).
/// random-subset draws from the adversary stream and, if no node was
/// selected, wakes one uniformly chosen node so the schedule is never empty.
WakeSchedule builtinWakeSchedule(const NamedSpec& spec, NodeId n, RngStream& adversaryRng);

/// Rejects schedules that are empty, name nodes outside [0, n), or wake a
/// node twice.
void validateWakeSchedule(const WakeSchedule& schedule, NodeId n);

/// Lockstep rounds for a wake schedule: a wake-up at time t happens in
/// round ceil(t).
std::vector<SyncWake> toSyncWakes(const WakeSchedule& schedule);

class DelayPolicy : public DelayOracle {
public:
    virtual std::string name() const = 0;
};

class UnitDelay final : public DelayPolicy {
public:
    VirtualTime delay(const SendContext&) override { return kOneUnit; }
    std::string name() const override { return "unit"; }
};

class UniformRandomDelay final : public DelayPolicy {
public:
    explicit UniformRandomDelay(RngStream rng) : rng_(std::move(rng)) {}
    VirtualTime delay(const SendContext&) override;
    std::string name() const override { return "uniform-random"; }

private:
    RngStream rng_;
};

class EpsilonRushDelay final : public DelayPolicy {
public:
    explicit EpsilonRushDelay(double epsilon);
    VirtualTime delay(const SendContext&) override { return epsilon_; }
    std::string name() const override { return "epsilon-rush"; }

private:
    VirtualTime epsilon_;
};

/// Holds back every message sent by the highest-ranked candidate observed
/// so far (full unit delay) and rushes everything else.
class SlowHighRankDelay final : public DelayPolicy {
public:
    explicit SlowHighRankDelay(double epsilon);
    VirtualTime delay(const SendContext& ctx) override;
    std::string name() const override { return "slow-high-rank"; }

private:
    VirtualTime epsilon_;
};

/// Builds one of: unit, uniform-random, epsilon-rush(epsilon),
/// slow-high-rank(epsilon).
std::unique_ptr<DelayPolicy> builtinDelayPolicy(const NamedSpec& spec, RngStream adversaryRng);

/// `count` distinct nodes drawn uniformly from everyone but `candidate`
/// (Floyd's algorithm on the n - 1 other indices).
std::vector<NodeId> sampleTargets(NodeId candidate, std::int32_t count, NodeId n, RngStream& rng);

}  // namespace lelect
