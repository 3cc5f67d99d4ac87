#include "lelect/adversary.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <sstream>

#include <absl/container/flat_hash_set.h>

namespace lelect {

using nlohmann::json;

namespace {

const std::vector<std::string>& positionalParams(const std::string& name) {
    static const std::map<std::string, std::vector<std::string>> table = {
        {"all-at-zero", {}},
        {"single", {}},
        {"staggered", {"k", "gap"}},
        {"random-subset", {"p"}},
        {"unit", {}},
        {"uniform-random", {}},
        {"epsilon-rush", {"epsilon"}},
        {"slow-high-rank", {"epsilon"}},
    };
    const auto it = table.find(name);
    if (it == table.end()) throw AdversaryError("unknown adversary builtin '" + name + "'");
    return it->second;
}

double param(const NamedSpec& spec, const std::string& key, std::optional<double> fallback = {}) {
    const auto it = spec.params.find(key);
    if (it != spec.params.end()) return it->second;
    if (fallback) return *fallback;
    throw AdversaryError("'" + spec.name + "' requires parameter '" + key + "'");
}

std::string formatNumber(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

VirtualTime epsilonDelay(double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
        throw AdversaryError("epsilon " + formatNumber(epsilon) + " outside (0, 1]");
    }
    const VirtualTime d = VirtualTime::fromUnits(epsilon);
    if (d.ticks() < 1) throw AdversaryError("epsilon below the clock resolution of 1e-6");
    return d;
}

NamedSpec specFromJson(const json& j, const char* field) {
    if (j.is_string()) return NamedSpec::parse(j.get<std::string>());
    if (!j.is_object()) throw AdversaryError(std::string("'") + field + "' must be a string or an object");
    NamedSpec spec;
    spec.name = j.at("name").get<std::string>();
    positionalParams(spec.name);
    if (j.contains("params")) {
        for (const auto& [k, v] : j.at("params").items()) {
            if (!v.is_number()) throw AdversaryError(std::string("'") + field + ".params." + k + "' must be numeric");
            spec.params[k] = v.get<double>();
        }
    }
    return spec;
}

}  // namespace

NamedSpec NamedSpec::parse(const std::string& text) {
    NamedSpec spec;
    const auto colon = text.find(':');
    spec.name = text.substr(0, colon);
    const auto& names = positionalParams(spec.name);
    if (colon == std::string::npos) return spec;

    std::stringstream rest(text.substr(colon + 1));
    std::string item;
    std::size_t i = 0;
    while (std::getline(rest, item, ',')) {
        if (i >= names.size()) throw AdversaryError("too many parameters for '" + spec.name + "'");
        try {
            std::size_t used = 0;
            spec.params[names[i]] = std::stod(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw AdversaryError("bad numeric parameter '" + item + "' for '" + spec.name + "'");
        }
        ++i;
    }
    return spec;
}

std::string NamedSpec::toString() const {
    std::string out = name;
    const auto& names = positionalParams(name);
    std::string values;
    for (const auto& key : names) {
        const auto it = params.find(key);
        if (it == params.end()) break;
        values += (values.empty() ? "" : ",") + formatNumber(it->second);
    }
    if (!values.empty()) out += ":" + values;
    return out;
}

std::string AdversaryConfig::label() const { return wake.toString() + "/" + delay.toString(); }

json toJson(const AdversaryConfig& cfg) {
    auto named = [](const NamedSpec& s) {
        json params = json::object();
        for (const auto& [k, v] : s.params) params[k] = v;
        return json{{"name", s.name}, {"params", params}};
    };
    return {{"wake", named(cfg.wake)}, {"delay", named(cfg.delay)}, {"adversarySeed", cfg.adversarySeed}};
}

AdversaryConfig adversaryFromJson(const json& j) {
    if (!j.is_object()) throw AdversaryError("adversary config must be an object");
    AdversaryConfig cfg;
    if (j.contains("wake")) cfg.wake = specFromJson(j.at("wake"), "wake");
    if (j.contains("delay")) cfg.delay = specFromJson(j.at("delay"), "delay");
    if (j.contains("adversarySeed")) {
        if (!j.at("adversarySeed").is_number_unsigned()) {
            throw AdversaryError("'adversarySeed' must be a non-negative integer");
        }
        cfg.adversarySeed = j.at("adversarySeed").get<std::uint64_t>();
    }
    return cfg;
}

WakeSchedule builtinWakeSchedule(const NamedSpec& spec, NodeId n, RngStream& adversaryRng) {
    if (n < 1) throw AdversaryError("network needs at least one node");
    WakeSchedule out;
    if (spec.name == "all-at-zero") {
        for (NodeId v = 0; v < n; ++v) out.push_back({v, VirtualTime{}});
    } else if (spec.name == "single") {
        out.push_back({0, VirtualTime{}});
    } else if (spec.name == "staggered") {
        const double k = param(spec, "k");
        const double gap = param(spec, "gap");
        if (k < 1 || k != static_cast<double>(static_cast<std::int64_t>(k))) {
            throw AdversaryError("staggered: k must be a positive integer");
        }
        if (k > n) throw AdversaryError("staggered: k = " + formatNumber(k) + " exceeds n = " + std::to_string(n));
        if (!(gap >= 0.0)) throw AdversaryError("staggered: gap must be non-negative");
        for (NodeId v = 0; v < static_cast<NodeId>(k); ++v) {
            out.push_back({v, VirtualTime::fromUnits(gap * v)});
        }
    } else if (spec.name == "random-subset") {
        const double p = param(spec, "p");
        if (!(p >= 0.0 && p <= 1.0)) throw AdversaryError("random-subset: p outside [0, 1]");
        std::bernoulli_distribution coin(p);
        for (NodeId v = 0; v < n; ++v) {
            if (coin(adversaryRng)) out.push_back({v, VirtualTime{}});
        }
        if (out.empty()) {
            std::uniform_int_distribution<NodeId> pick(0, n - 1);
            out.push_back({pick(adversaryRng), VirtualTime{}});
        }
    } else {
        throw AdversaryError("unknown wake schedule '" + spec.name + "'");
    }
    return out;
}

void validateWakeSchedule(const WakeSchedule& schedule, NodeId n) {
    if (schedule.empty()) throw AdversaryError("wake schedule wakes no node");
    std::vector<bool> seen(static_cast<std::size_t>(std::max<NodeId>(n, 0)), false);
    for (const WakeEntry& w : schedule) {
        if (w.node < 0 || w.node >= n) throw AdversaryError("wake entry for unknown node " + std::to_string(w.node));
        if (seen[static_cast<std::size_t>(w.node)]) {
            throw AdversaryError("node " + std::to_string(w.node) + " woken more than once");
        }
        seen[static_cast<std::size_t>(w.node)] = true;
        if (w.time < VirtualTime{}) throw AdversaryError("negative wake-up time");
    }
}

std::vector<SyncWake> toSyncWakes(const WakeSchedule& schedule) {
    std::vector<SyncWake> out;
    out.reserve(schedule.size());
    for (const WakeEntry& w : schedule) {
        const std::int64_t t = w.time.ticks();
        const std::int64_t round = (t + VirtualTime::kTicksPerUnit - 1) / VirtualTime::kTicksPerUnit;
        out.push_back({w.node, round});
    }
    return out;
}

VirtualTime UniformRandomDelay::delay(const SendContext&) {
    std::uniform_int_distribution<std::int64_t> ticks(1, VirtualTime::kTicksPerUnit);
    return VirtualTime::fromTicks(ticks(rng_));
}

EpsilonRushDelay::EpsilonRushDelay(double epsilon) : epsilon_(epsilonDelay(epsilon)) {}

SlowHighRankDelay::SlowHighRankDelay(double epsilon) : epsilon_(epsilonDelay(epsilon)) {}

VirtualTime SlowHighRankDelay::delay(const SendContext& ctx) {
    if (ctx.history.topCandidate && *ctx.history.topCandidate == ctx.from) return kOneUnit;
    return epsilon_;
}

std::unique_ptr<DelayPolicy> builtinDelayPolicy(const NamedSpec& spec, RngStream adversaryRng) {
    if (spec.name == "unit") return std::make_unique<UnitDelay>();
    if (spec.name == "uniform-random") return std::make_unique<UniformRandomDelay>(std::move(adversaryRng));
    if (spec.name == "epsilon-rush") return std::make_unique<EpsilonRushDelay>(param(spec, "epsilon"));
    if (spec.name == "slow-high-rank") return std::make_unique<SlowHighRankDelay>(param(spec, "epsilon", 0.01));
    throw AdversaryError("unknown delay policy '" + spec.name + "'");
}

std::vector<NodeId> sampleTargets(NodeId candidate, std::int32_t count, NodeId n, RngStream& rng) {
    if (candidate < 0 || candidate >= n) throw AdversaryError("candidate out of range");
    const std::int32_t others = n - 1;
    if (count < 1 || count > others) {
        throw AdversaryError("cannot sample " + std::to_string(count) + " of " + std::to_string(others) + " neighbors");
    }
    std::vector<NodeId> picked;
    picked.reserve(static_cast<std::size_t>(count));
    absl::flat_hash_set<NodeId> taken;
    taken.reserve(static_cast<std::size_t>(count) * 2);
    for (std::int32_t j = others - count; j < others; ++j) {
        std::uniform_int_distribution<std::int32_t> draw(0, j);
        std::int32_t t = draw(rng);
        if (!taken.insert(t).second) {
            t = j;
            taken.insert(t);
        }
        picked.push_back(t);
    }
    for (NodeId& v : picked) {
        if (v >= candidate) ++v;
    }
    return picked;
}

}  // namespace lelect
