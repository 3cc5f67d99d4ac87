// Command-line front end: single trials, sweeps and trace verification.

#include "lelect/adversary.hpp"
#include "lelect/checker.hpp"
#include "lelect/sweep.hpp"
#include "lelect/trial.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace lelect;

namespace {

bool isWakeName(const std::string& name) {
    return name == "all-at-zero" || name == "single" || name == "staggered" || name == "random-subset";
}

// Accepts "DELAY", "WAKE" or "WAKE/DELAY", each optionally with ":params".
void applyAdversary(const std::string& text, AdversaryConfig& cfg) {
    const auto slash = text.find('/');
    if (slash != std::string::npos) {
        cfg.wake = NamedSpec::parse(text.substr(0, slash));
        cfg.delay = NamedSpec::parse(text.substr(slash + 1));
        return;
    }
    NamedSpec spec = NamedSpec::parse(text);
    if (isWakeName(spec.name)) {
        cfg.wake = std::move(spec);
    } else {
        cfg.delay = std::move(spec);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Randomized leader election simulator"};
    app.require_subcommand(1);

    std::string protocol = "async";
    NodeId n = 16;
    std::uint64_t seed = 1;
    std::string adversary;
    std::string wake;
    std::uint64_t adversarySeed = 0;
    bool uniqueIds = false;
    std::string tracePath;
    std::uint64_t budget = 1'000'000'000ULL;
    double phaseSpan = 8.0;

    auto* run = app.add_subcommand("run", "run one trial and print its report as JSON");
    run->add_option("--protocol", protocol, "async or sync")->check(CLI::IsMember({"async", "sync"}));
    run->add_option("--n", n, "number of nodes")->check(CLI::Range(1, 65535));
    run->add_option("--seed", seed, "trial seed");
    run->add_option("--adversary", adversary, "delay policy, wake schedule, or WAKE/DELAY (e.g. staggered:8,0.5/unit)");
    run->add_option("--wake", wake, "wake schedule (all-at-zero, single, staggered:K,GAP, random-subset:P)");
    run->add_option("--adversary-seed", adversarySeed, "seed of the adversary's random stream");
    run->add_flag("--unique-ids", uniqueIds, "break rank ties by node index");
    run->add_option("--trace", tracePath, "write a JSON-lines trace here");
    run->add_option("--budget", budget, "event budget");
    run->add_option("--phase-span-limit", phaseSpan, "longest allowed candidate phase, in time units");

    std::string configPath;
    std::string outDir;
    unsigned workers = 0;
    auto* sweep = app.add_subcommand("sweep", "run a sweep from a JSON config and write CSVs");
    sweep->add_option("--config", configPath, "sweep config file")->required();
    sweep->add_option("--out", outDir, "output directory (overrides outputPath)");
    sweep->add_option("--workers", workers, "worker threads (0 = all cores)");

    std::string verifyPath;
    auto* verify = app.add_subcommand("verify", "check a trace file for invariant violations");
    verify->add_option("--trace", verifyPath, "trace file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            TrialSpec spec;
            spec.protocol = *parseProtocol(protocol);
            spec.n = n;
            spec.seed = seed;
            if (!adversary.empty()) applyAdversary(adversary, spec.adversary);
            if (!wake.empty()) spec.adversary.wake = NamedSpec::parse(wake);
            spec.adversary.adversarySeed = adversarySeed;
            spec.uniqueIds = uniqueIds;
            spec.eventBudget = budget;
            spec.tracePath = tracePath;
            spec.phaseSpanLimit = VirtualTime::fromUnits(phaseSpan);
            const TrialReport report = runTrial(spec);
            std::cout << toJson(report).dump(2) << '\n';
            return report.invariantViolations.empty() ? 0 : 1;
        }
        if (*sweep) {
            SweepSpec spec = loadSweepConfig(configPath);
            if (!outDir.empty()) spec.outputPath = outDir;
            if (workers != 0) spec.workers = workers;
            const SweepResult result = runSweep(spec);
            writeSummaryCsv(std::cout, result.summary);
            std::size_t dirty = 0;
            for (const TrialReport& r : result.reports) {
                if (!r.invariantViolations.empty()) ++dirty;
            }
            if (dirty > 0) std::cerr << dirty << " trial(s) reported invariant violations\n";
            return dirty == 0 ? 0 : 1;
        }
        if (*verify) {
            const VerifyResult result = verifyTrace(verifyPath);
            std::cout << result.records << " records, hash " << hashToHex(result.computedHash) << '\n';
            for (const Violation& v : result.violations) std::cout << toString(v) << '\n';
            if (result.violations.empty()) std::cout << "clean\n";
            return result.violations.empty() ? 0 : 1;
        }
    } catch (const TraceParseError& e) {
        std::cerr << verifyPath << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
