#include "lelect/sweep.hpp"

#include "lelect/phase_schedule.hpp"
#include "lelect/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace lelect {

using nlohmann::json;

namespace {

const std::set<std::string> kSweepFields = {"sizes",   "trials",     "protocol",    "adversary", "masterSeed",
                                            "uniqueIds", "outputPath", "eventBudget", "workers"};

template <typename T>
T field(const json& j, const char* name, const char* expected) {
    const json& v = j.at(name);
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("field '") + name + "': expected " + expected + ", got " + v.dump());
    }
}

std::string fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string csvField(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

json toJson(const SweepSpec& spec) {
    json j = {{"sizes", spec.sizes},
              {"trials", spec.trials},
              {"protocol", protocolName(spec.protocol)},
              {"adversary", toJson(spec.adversary)},
              {"masterSeed", spec.masterSeed},
              {"uniqueIds", spec.uniqueIds},
              {"eventBudget", spec.eventBudget},
              {"workers", spec.workers}};
    if (!spec.outputPath.empty()) j["outputPath"] = spec.outputPath;
    return j;
}

SweepSpec sweepFromJson(const json& j) {
    if (!j.is_object()) throw ConfigError("sweep config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!kSweepFields.contains(key)) throw ConfigError("unknown field '" + key + "'");
    }
    SweepSpec spec;
    if (!j.contains("sizes")) throw ConfigError("missing field 'sizes'");
    spec.sizes = field<std::vector<NodeId>>(j, "sizes", "an array of integers");
    if (spec.sizes.empty()) throw ConfigError("field 'sizes': must not be empty");
    for (NodeId n : spec.sizes) {
        if (n < 2 || n >= 65536) throw ConfigError("field 'sizes': " + std::to_string(n) + " outside [2, 65535]");
    }
    if (j.contains("trials")) spec.trials = field<std::int32_t>(j, "trials", "an integer");
    if (spec.trials < 1) throw ConfigError("field 'trials': must be at least 1");
    if (j.contains("protocol")) {
        const auto name = field<std::string>(j, "protocol", "\"async\" or \"sync\"");
        const auto p = parseProtocol(name);
        if (!p) throw ConfigError("field 'protocol': unknown protocol '" + name + "'");
        spec.protocol = *p;
    }
    if (j.contains("adversary")) {
        try {
            spec.adversary = adversaryFromJson(j.at("adversary"));
        } catch (const std::exception& e) {
            throw ConfigError(std::string("field 'adversary': ") + e.what());
        }
    }
    if (j.contains("masterSeed")) spec.masterSeed = field<std::uint64_t>(j, "masterSeed", "an unsigned integer");
    if (j.contains("uniqueIds")) spec.uniqueIds = field<bool>(j, "uniqueIds", "a boolean");
    if (j.contains("outputPath")) spec.outputPath = field<std::string>(j, "outputPath", "a string");
    if (j.contains("eventBudget")) spec.eventBudget = field<std::uint64_t>(j, "eventBudget", "an unsigned integer");
    if (j.contains("workers")) spec.workers = field<unsigned>(j, "workers", "an unsigned integer");
    return spec;
}

SweepSpec loadSweepConfig(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, column = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(column) + ": syntax error");
    }
    try {
        return sweepFromJson(j);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

AttritionResult attritionCheck(std::span<const TrialReport> reports, std::optional<std::int32_t> phaseLimit) {
    AttritionResult out;
    for (const TrialReport& r : reports) {
        if (r.protocol != ProtocolKind::Async) continue;
        const PhaseSchedule schedule(r.n);
        const std::int32_t limit = phaseLimit.value_or(schedule.attritionLimit());
        const auto last = std::min<std::int64_t>(limit, static_cast<std::int64_t>(r.perPhaseCandidateCounts.size()));
        for (std::int32_t i = 1; i <= last; ++i) {
            ++out.pairs;
            const std::uint64_t count = r.perPhaseCandidateCounts[static_cast<std::size_t>(i - 1)];
            if (count <= static_cast<std::uint64_t>(schedule.attritionBound(i))) ++out.satisfied;
        }
    }
    if (out.pairs > 0) out.rate = static_cast<double>(out.satisfied) / static_cast<double>(out.pairs);
    return out;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
    return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

std::vector<SizeSummary> summarize(std::span<const TrialReport> reports) {
    std::map<NodeId, std::vector<const TrialReport*>> groups;
    for (const TrialReport& r : reports) groups[r.n].push_back(&r);

    std::vector<SizeSummary> out;
    for (const auto& [n, group] : groups) {
        SizeSummary s;
        s.n = n;
        s.trials = group.size();
        std::vector<double> perN, perLog;
        std::vector<TrialReport> asyncReports;
        std::size_t successes = 0;
        for (const TrialReport* r : group) {
            s.meanMessages += static_cast<double>(r->totalRemoteMessages);
            s.maxMessages = std::max(s.maxMessages, r->totalRemoteMessages);
            s.meanTime += r->elapsed.asUnits();
            s.maxTime = std::max(s.maxTime, r->elapsed.asUnits());
            perN.push_back(r->messagesPerN());
            perLog.push_back(r->timePerLogSqN());
            if (r->outcome == Outcome::Success) ++successes;
            if (r->protocol == ProtocolKind::Async) asyncReports.push_back(*r);
        }
        const auto count = static_cast<double>(group.size());
        s.meanMessages /= count;
        s.meanTime /= count;
        for (double v : perN) s.meanMessagesPerN += v / count;
        for (double v : perLog) s.meanTimePerLogSqN += v / count;
        s.p95MessagesPerN = percentile(perN, 0.95);
        s.p95TimePerLogSqN = percentile(perLog, 0.95);
        s.successRate = static_cast<double>(successes) / count;
        s.attritionViolationRate = 1.0 - attritionCheck(asyncReports).rate;
        out.push_back(s);
    }
    return out;
}

void writeTrialsCsv(std::ostream& out, std::span<const TrialReport> reports) {
    out << "n,trial,seed,protocol,adversary,msgs_total,msgs_request,msgs_reply,msgs_decide,msgs_leader,time,rounds,"
           "outcome,trace_hash\n";
    for (const TrialReport& r : reports) {
        const auto& c = r.messageCounts;
        std::uint64_t request, reply, decide, leader;
        if (r.protocol == ProtocolKind::Async) {
            request = c[index(MessageType::Request)];
            reply = c[index(MessageType::Approved)] + c[index(MessageType::Declined)];
            decide = c[index(MessageType::Decide)] + c[index(MessageType::DecideReply)];
            leader = c[index(MessageType::Leader)];
        } else {
            request = c[index(MessageType::SyncRequest)];
            reply = c[index(MessageType::SyncReply)];
            decide = 0;
            leader = c[index(MessageType::Winner)];
        }
        out << r.n << ',' << r.trialIndex << ',' << r.seed << ',' << protocolName(r.protocol) << ','
            << csvField(r.adversary) << ',' << r.totalRemoteMessages << ',' << request << ',' << reply << ','
            << decide << ',' << leader << ',' << r.elapsed.toString() << ',' << r.roundCount << ','
            << outcomeName(r.outcome) << ',' << hashToHex(r.traceHash) << '\n';
    }
}

void writeSummaryCsv(std::ostream& out, std::span<const SizeSummary> summary) {
    out << "n,trials,mean_msgs,max_msgs,mean_msgs_per_n,p95_msgs_per_n,mean_time,max_time,mean_time_per_logsq_n,"
           "p95_time_per_logsq_n,success_rate,attrition_violation_rate\n";
    for (const SizeSummary& s : summary) {
        out << s.n << ',' << s.trials << ',' << fixed(s.meanMessages) << ',' << s.maxMessages << ','
            << fixed(s.meanMessagesPerN) << ',' << fixed(s.p95MessagesPerN) << ',' << fixed(s.meanTime) << ','
            << fixed(s.maxTime) << ',' << fixed(s.meanTimePerLogSqN) << ',' << fixed(s.p95TimePerLogSqN) << ','
            << fixed(s.successRate) << ',' << fixed(s.attritionViolationRate) << '\n';
    }
}

SweepResult runSweep(const SweepSpec& spec) {
    struct Job {
        NodeId n;
        std::int32_t trial;
    };
    std::vector<NodeId> sizes = spec.sizes;
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    std::vector<Job> jobs;
    for (NodeId n : sizes) {
        for (std::int32_t i = 0; i < spec.trials; ++i) jobs.push_back({n, i});
    }

    SweepResult result;
    result.reports.resize(jobs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failureMutex;
    auto worker = [&] {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= jobs.size()) return;
            try {
                TrialSpec t;
                t.protocol = spec.protocol;
                t.n = jobs[k].n;
                t.trialIndex = jobs[k].trial;
                t.seed = trialSeed(spec.masterSeed, static_cast<std::uint64_t>(jobs[k].n),
                                   static_cast<std::uint64_t>(jobs[k].trial));
                t.adversary = spec.adversary;
                t.uniqueIds = spec.uniqueIds;
                t.eventBudget = spec.eventBudget;
                result.reports[k] = runTrial(t);
            } catch (...) {
                std::lock_guard lock(failureMutex);
                if (!failure) failure = std::current_exception();
                next = jobs.size();
            }
        }
    };
    unsigned workers = spec.workers != 0 ? spec.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(jobs.size(), 1)));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    result.summary = summarize(result.reports);

    if (!spec.outputPath.empty()) {
        const std::filesystem::path dir(spec.outputPath);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw std::runtime_error(dir.string() + ": " + ec.message());
        const auto write = [](const std::filesystem::path& p, auto&& body) {
            std::ofstream out(p);
            if (!out) throw std::runtime_error(p.string() + ": cannot open for writing");
            body(out);
            out.flush();
            if (!out) throw std::runtime_error(p.string() + ": write failed");
        };
        write(dir / "trials.csv", [&](std::ostream& o) { writeTrialsCsv(o, result.reports); });
        write(dir / "summary.csv", [&](std::ostream& o) { writeSummaryCsv(o, result.summary); });
    }
    return result;
}

}  // namespace lelect
