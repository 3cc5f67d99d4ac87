#include "fakes.hpp"

#include "lelect/engine.hpp"
#include "lelect/rng.hpp"
#include "lelect/trace.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

using namespace lelect;
using namespace lelect::testing;

namespace {

VirtualTime at(double units) { return VirtualTime::fromUnits(units); }

struct UnitOracle : DelayOracle {
    VirtualTime delay(const SendContext&) override { return kOneUnit; }
};

}  // namespace

TEST_CASE("virtual time is integral ticks") {
    CHECK(at(0.1).ticks() == 100'000);
    CHECK(at(2.5) + at(0.5) == VirtualTime::units(3));
    CHECK(at(1.25).toString() == "1.250000");
    CHECK(at(0.0000004).ticks() == 0);
    CHECK(at(0.0000006).ticks() == 1);
}

TEST_CASE("seed derivation separates streams") {
    CHECK(deriveSeed(1, 2) != deriveSeed(2, 1));
    CHECK(trialSeed(5, 64, 0) != trialSeed(5, 64, 1));
    CHECK(trialSeed(5, 64, 0) != trialSeed(5, 65, 0));
    RngStream a = nodeStream(99, 3), b = nodeStream(99, 3), c = nodeStream(99, 4);
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(adversaryStream(1, 99)() != nodeStream(99, 1)());
}

TEST_CASE("schedule orders by time then sequence") {
    UnitOracle unit;
    AsyncSimulator sim(3, 1, unit);
    ScriptedProtocol p;

    sim.schedule(at(0.5), EventKind::LocalDeliver, 0, 0, Message::request({1, 1, {}}));
    CHECK(sim.pending() == 1);
    sim.schedule(at(0.2), EventKind::Wakeup, -1, 1);
    sim.schedule(at(0.2), EventKind::Wakeup, -1, 2);
    while (sim.step(p)) {
    }
    REQUIRE(p.seen.size() == 3);
    CHECK(p.seen[0].node == 1);
    CHECK(p.seen[1].node == 2);
    CHECK(p.seen[2].time == at(0.5));
}

TEST_CASE("scheduling into the past is an engine error") {
    UnitOracle unit;
    AsyncSimulator sim(2, 1, unit);
    ScriptedProtocol p;
    p.onWake = [&](NodeId, Context&) {
        CHECK_THROWS_AS(sim.schedule(at(0.5), EventKind::Wakeup, -1, 1), EngineError);
    };
    sim.run(p, {{0, at(1.0)}});
}

TEST_CASE("send adds the delay on an idle channel") {
    UnitOracle unit;
    AsyncSimulator sim(2, 1, unit);
    ScriptedProtocol p;
    p.onWake = [&](NodeId node, Context&) { sim.sendWithDelay(node, 1, Message::request({1, 1, {}}), kOneUnit); };
    sim.run(p, {{0, at(2.0)}});
    REQUIRE(p.seen.size() == 2);
    CHECK(p.seen[1].time == at(3.0));
    CHECK(p.seen[1].via == 0);
}

TEST_CASE("FIFO clamp delivers at the previous delivery time with a later seq") {
    UnitOracle unit;
    AsyncSimulator sim(2, 1, unit);
    ScriptedProtocol p;
    RecordingSink sink;
    sim.addSink(&sink);
    p.onWake = [&](NodeId node, Context& ctx) {
        if (ctx.now() == at(1.5)) sim.sendWithDelay(node, 1, Message::request({1, 1, {}}), at(1.0));
    };
    p.onMsg = [&](NodeId node, NodeId, const Message& m, Context& ctx) {
        if (node == 0 && m.type == MessageType::Leader && ctx.now() == at(2.0)) {
            sim.sendWithDelay(0, 1, Message::request({2, 1, {}}), at(0.1));
        }
    };
    // node 0 wakes at 1.5 and sends (arrives 2.5); a local event at 2.0 sends again with delay 0.1
    sim.schedule(at(2.0), EventKind::LocalDeliver, 0, 0, Message::leader({0, 0, {}}));
    sim.run(p, {{0, at(1.5)}});

    std::vector<TraceRecord> toOne;
    for (const auto& r : sink.records) {
        if (r.kind == EventKind::Deliver && r.to == 1) toOne.push_back(r);
    }
    REQUIRE(toOne.size() == 2);
    CHECK(toOne[0].time == at(2.5));
    CHECK(toOne[1].time == at(2.5));
    CHECK(toOne[1].seq > toOne[0].seq);
    CHECK(toOne[0].msg->pos.rank == 1);
    CHECK(toOne[1].msg->pos.rank == 2);
}

TEST_CASE("sends on one edge arrive in send order under shrinking delays") {
    ListDelay delays({0.9, 0.2, 0.2});
    AsyncSimulator sim(2, 1, delays);
    ScriptedProtocol p;
    p.onWake = [&](NodeId node, Context& ctx) {
        for (std::uint64_t r = 1; r <= 3; ++r) ctx.send(node, 1, Message::request({r, 1, {}}));
    };
    sim.run(p, {{0, at(0.0)}});
    std::vector<std::uint64_t> order;
    for (const auto& s : p.seen) {
        if (!s.wake && s.node == 1) order.push_back(s.msg.pos.rank);
    }
    CHECK(order == std::vector<std::uint64_t>{1, 2, 3});
    // all three are clamped to the first delivery
    CHECK(p.seen.back().time == at(0.9));
}

TEST_CASE("delays outside (0, 1] are rejected") {
    UnitOracle unit;
    AsyncSimulator sim(2, 1, unit);
    ScriptedProtocol p;
    p.onWake = [&](NodeId node, Context&) {
        CHECK_THROWS_AS(sim.sendWithDelay(node, 1, Message{}, VirtualTime{}), EngineError);
        CHECK_THROWS_AS(sim.sendWithDelay(node, 1, Message{}, VirtualTime::fromTicks(1'000'001)), EngineError);
        CHECK_NOTHROW(sim.sendWithDelay(node, 1, Message{}, VirtualTime::fromTicks(1)));
    };
    sim.run(p, {{0, at(0.0)}});
}

TEST_CASE("local sends are zero-delay, uncounted, and run after the current handler") {
    UnitOracle unit;
    AsyncSimulator sim(2, 1, unit);
    ScriptedProtocol p;
    bool handlerDone = false;
    p.onWake = [&](NodeId node, Context& ctx) {
        sim.sendWithDelay(node, 1, Message::request({9, 1, {}}), at(0.1));
        ctx.sendLocal(node, Message::request({7, 1, {}}));
        handlerDone = true;
    };
    p.onMsg = [&](NodeId node, NodeId, const Message&, Context&) {
        if (node == 0) CHECK(handlerDone);
    };
    const RunStats stats = sim.run(p, {{0, at(4.0)}});
    REQUIRE(p.seen.size() == 3);
    CHECK(p.seen[1].node == 0);
    CHECK(p.seen[1].time == at(4.0));
    CHECK(p.seen[2].node == 1);
    CHECK(p.seen[2].time == at(4.1));
    CHECK(stats.remoteMessages == 1);
    CHECK(stats.localMessages == 1);
}

TEST_CASE("a second wake-up for an awake node is ignored") {
    UnitOracle unit;
    AsyncSimulator sim(2, 1, unit);
    ScriptedProtocol p;
    p.onWake = [&](NodeId node, Context& ctx) {
        if (node == 0) ctx.send(0, 1, Message::request({1, 1, {}}));
    };
    sim.run(p, {{0, at(0.0)}, {1, at(3.0)}});
    const auto wakes = std::count_if(p.seen.begin(), p.seen.end(), [](const auto& s) { return s.wake; });
    CHECK(wakes == 1);
}

TEST_CASE("invalid wake schedules fail at setup") {
    UnitOracle unit;
    ScriptedProtocol p;
    {
        AsyncSimulator sim(2, 1, unit);
        CHECK_THROWS_AS(sim.run(p, {}), EngineError);
    }
    {
        AsyncSimulator sim(2, 1, unit);
        CHECK_THROWS_AS(sim.run(p, {{0, at(0)}, {0, at(1)}}), EngineError);
    }
    {
        AsyncSimulator sim(2, 1, unit);
        CHECK_THROWS_AS(sim.run(p, {{2, at(0)}}), EngineError);
    }
}

TEST_CASE("event budget stops a runaway protocol") {
    UnitOracle unit;
    EngineOptions opts;
    opts.eventBudget = 50;
    AsyncSimulator sim(2, 1, unit, opts);
    ScriptedProtocol p;
    p.onWake = [&](NodeId node, Context& ctx) { ctx.send(node, 1 - node, Message{}); };
    p.onMsg = [&](NodeId node, NodeId, const Message&, Context& ctx) { ctx.send(node, 1 - node, Message{}); };
    const RunStats stats = sim.run(p, {{0, at(0)}});
    CHECK(stats.budgetExceeded);
    CHECK(stats.eventsProcessed == 50);
}

TEST_CASE("random delays keep links FIFO and within one unit") {
    struct RandomDelay : DelayOracle {
        std::mt19937_64 rng{11};
        VirtualTime delay(const SendContext&) override {
            return VirtualTime::fromTicks(std::uniform_int_distribution<std::int64_t>(1, 1'000'000)(rng));
        }
    } delays;
    AsyncSimulator sim(4, 3, delays);
    ScriptedProtocol p;
    RecordingSink sink;
    sim.addSink(&sink);
    int budget = 400;
    p.onWake = [&](NodeId node, Context& ctx) {
        for (NodeId v = 0; v < 4; ++v) {
            if (v != node) ctx.send(node, v, Message{});
        }
    };
    p.onMsg = [&](NodeId node, NodeId via, const Message&, Context& ctx) {
        if (--budget > 0) ctx.send(node, via, Message{});
        if (--budget > 0) ctx.send(node, (node + 1) % 4, Message{});
    };
    sim.run(p, {{0, at(0)}, {2, at(0.3)}});

    std::map<std::pair<NodeId, NodeId>, std::uint64_t> lastSeq;
    std::size_t deliveries = 0;
    for (const auto& r : sink.records) {
        if (r.kind != EventKind::Deliver) continue;
        ++deliveries;
        CHECK(r.time > r.sentAt);
        CHECK(r.time - r.sentAt <= kOneUnit);
        auto [it, fresh] = lastSeq.try_emplace({r.from, r.to}, r.seq);
        if (!fresh) {
            CHECK(r.seq > it->second);
            it->second = r.seq;
        }
    }
    CHECK(deliveries > 300);
}

TEST_CASE("same seed gives the same trace hash") {
    auto runOnce = [](std::uint64_t seed) {
        struct RngDelay : DelayOracle {
            std::mt19937_64 rng{5};
            VirtualTime delay(const SendContext&) override {
                return VirtualTime::fromTicks(std::uniform_int_distribution<std::int64_t>(1, 1'000'000)(rng));
            }
        } delays;
        AsyncSimulator sim(5, seed, delays);
        ScriptedProtocol p;
        int budget = 100;
        p.onWake = [&](NodeId node, Context& ctx) { ctx.send(node, (node + 1) % 5, Message::request({ctx.rng(node)(), 1, {}})); };
        p.onMsg = [&](NodeId node, NodeId, const Message&, Context& ctx) {
            if (--budget > 0) {
                const auto to = static_cast<NodeId>(ctx.rng(node)() % 4);
                ctx.send(node, to >= node ? to + 1 : to, Message::request({ctx.rng(node)(), 1, {}}));
            }
        };
        return sim.run(p, {{0, at(0)}, {3, at(0.5)}}).traceHash;
    };
    CHECK(runOnce(42) == runOnce(42));
    CHECK(runOnce(42) != runOnce(43));
}

TEST_CASE("lockstep: a message sent in round 3 is seen in round 4") {
    struct Probe : SyncProtocol {
        std::vector<std::pair<std::int64_t, NodeId>> received;
        void onRound(NodeId node, const RoundInput& in, SyncContext& ctx) override {
            if (in.spontaneousWake && node == 0) ctx.setTimer(0, 3);
            if (in.timer) ctx.send(0, 1, Message::syncRequest({5, 0, {}}));
            for (const auto& m : in.inbox) {
                (void)m;
                received.push_back({ctx.round(), node});
            }
        }
        NodeSnapshot snapshot(NodeId) const override { return {}; }
    } probe;
    SyncSimulator sim(2, 1);
    const RunStats stats = sim.run(probe, {{0, 0}});
    REQUIRE(probe.received.size() == 1);
    CHECK(probe.received[0] == std::pair<std::int64_t, NodeId>{4, 1});
    CHECK(stats.remoteMessages == 1);
    CHECK(stats.elapsed() == VirtualTime::units(4));
}

TEST_CASE("trace records survive a JSON round trip with the same hash") {
    TraceRecord rec;
    rec.time = at(1.5);
    rec.seq = 17;
    rec.kind = EventKind::Deliver;
    rec.from = 2;
    rec.to = 3;
    rec.sentAt = at(0.75);
    rec.woke = true;
    rec.msg = Message::decideReply({9, 2, 4u}, {11, 3, 1u}, true);
    NodeSnapshot before;
    NodeSnapshot after;
    after.role = static_cast<std::uint8_t>(CandState::NonElected);
    after.ref = RefState::C1;
    after.chosen = 2;
    after.leader = Position{4, 0, 1u};
    rec.before = before;
    rec.after = after;

    const TraceRecord back = recordFromJson(toJson(rec, ProtocolKind::Async), ProtocolKind::Async);
    Fnv1a a, b;
    hashRecord(a, rec);
    hashRecord(b, back);
    CHECK(a.value() == b.value());
    CHECK(back.msg == rec.msg);
    CHECK(back.after == rec.after);
    CHECK(back.woke);
}
