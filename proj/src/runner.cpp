#include "aerialnav/runner.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "aerialnav/agent.hpp"
#include "aerialnav/errors.hpp"
#include "aerialnav/policies.hpp"

namespace aerialnav {

using json = nlohmann::json;

GatewaySpec GatewaySpec::parse(std::string_view text) {
    GatewaySpec g;
    if (text == "live") {
        g.kind = Kind::live;
        return g;
    }
    const auto colon = text.find(':');
    const std::string_view head = text.substr(0, colon);
    if (colon == std::string_view::npos || colon + 1 == text.size())
        throw Error("gateway must be live, replay:DIR or record:DIR, got '" + std::string(text) + "'");
    g.store = std::filesystem::path(std::string(text.substr(colon + 1)));
    if (head == "replay") g.kind = Kind::replay;
    else if (head == "record") g.kind = Kind::record;
    else throw Error("unknown gateway kind: " + std::string(head));
    return g;
}

std::string GatewaySpec::str() const {
    switch (kind) {
        case Kind::live: return "live";
        case Kind::replay: return "replay:" + store.string();
        case Kind::record: return "record:" + store.string();
    }
    return {};
}

namespace {

std::shared_ptr<Gateway> live_gateway(const std::string& model) {
    LiveGatewayConfig cfg = LiveGatewayConfig::from_env();
    if (!model.empty()) cfg.model = model;
    if (cfg.api_key.empty()) throw Error("AERIALNAV_API_KEY is not set; the live gateway needs it");
    return std::make_shared<ChatCompletionsGateway>(cfg, make_http_transport(cfg.base_url, cfg.timeout));
}

}  // namespace

std::shared_ptr<Gateway> make_gateway(const GatewaySpec& spec, const std::string& model) {
    switch (spec.kind) {
        case GatewaySpec::Kind::live: return live_gateway(model);
        case GatewaySpec::Kind::replay:
            if (!std::filesystem::is_directory(spec.store))
                throw Error("fixture directory not found: " + spec.store.string());
            return std::make_shared<RecordReplayGateway>(ReplayMode::strict_replay, spec.store, nullptr,
                                                         model.empty() ? LiveGatewayConfig::from_env().model : model);
        case GatewaySpec::Kind::record:
            return std::make_shared<RecordReplayGateway>(ReplayMode::record, spec.store, live_gateway(model));
    }
    throw Error("unreachable gateway kind");
}

bool policy_needs_gateway(std::string_view policy) { return policy == "lmm" || policy == "agent"; }

void RunOptions::validate() const {
    static const std::vector<std::string> known = {"random", "sampling", "oracle", "lmm", "agent"};
    if (std::find(known.begin(), known.end(), policy) == known.end()) throw Error("unknown policy: " + policy);
    if (jobs < 1) throw Error("--jobs must be at least 1");
    if (policy_needs_gateway(policy) && !gateway) throw Error("policy " + policy + " needs --gateway");
    if (enhancements.any() && policy != "agent" && policy != "lmm")
        throw Error("enhancements apply to the lmm and agent policies only");
    if (policy == "lmm" && (enhancements.grounding || enhancements.imagination || enhancements.sparse_memory))
        throw Error("the lmm policy supports only the crossview enhancement");
    episode.validate();
}

json RunOptions::to_json() const {
    return json{{"corpus", corpus.string()},
                {"policy", policy},
                {"enhancements", enhancements.names()},
                {"gateway", gateway ? json(gateway->str()) : json(nullptr)},
                {"model", model},
                {"prompts", prompts ? json(prompts->string()) : json(nullptr)},
                {"jobs", jobs},
                {"seed", seed},
                {"max_steps", episode.max_steps},
                {"epsilon", episode.epsilon ? json(*episode.epsilon) : json(nullptr)}};
}

std::uint64_t episode_seed(std::uint64_t run_seed, const std::string& scenario_id) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : scenario_id) h = (h ^ c) * 0x100000001b3ULL;
    std::uint64_t z = run_seed ^ h;
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::unique_ptr<Policy> make_policy(const RunOptions& opts, const Scenario& scenario,
                                    std::shared_ptr<Gateway> gateway, std::uint64_t seed) {
    if (opts.policy == "random") return std::make_unique<RandomPolicy>(seed);
    if (opts.policy == "sampling") return std::make_unique<ActionSamplingPolicy>(seed);
    if (opts.policy == "oracle") {
        return std::make_unique<OraclePolicy>(scenario.world, scenario.goal.position,
                                              opts.episode.epsilon.value_or(scenario.goal.epsilon), opts.episode.motion);
    }
    if (!gateway) throw Error("policy " + opts.policy + " needs a gateway");
    if (opts.policy == "lmm") {
        auto p = std::make_unique<LanguagePolicy>(std::move(gateway), kLanguagePolicyTemplate, opts.model);
        if (opts.enhancements.crossview) {
            const CityWorld* world = &scenario.world;
            const CameraIntrinsics intr = opts.episode.camera;
            p->set_observation_formatter(
                [world, intr](const SemanticObservation& o) { return crossview_text(*world, o.camera_pose, intr); });
        }
        return p;
    }
    if (opts.policy == "agent") {
        AgentConfig cfg;
        cfg.model = opts.model;
        if (opts.prompts) cfg.prompts = AgentPrompts::load(*opts.prompts);
        cfg.enhancements = opts.enhancements;
        cfg.motion = opts.episode.motion;
        cfg.camera = opts.episode.camera;
        if (cfg.enhancements.grounding) {
            if (scenario.meta.landmark.empty())
                throw Error("scenario " + scenario.id + " names no goal landmark for grounding");
            cfg.target_label = scenario.meta.landmark;
        }
        return std::make_unique<Agent>(std::move(gateway), scenario.world, cfg);
    }
    throw Error("unknown policy: " + opts.policy);
}

RunSummary run_corpus(const RunOptions& opts) {
    opts.validate();
    const std::vector<Scenario> scenarios = load_corpus(opts.corpus);
    std::filesystem::create_directories(opts.out);
    {
        std::ofstream cfg(opts.out / "config.json");
        cfg << opts.to_json().dump(2) << "\n";
    }
    std::shared_ptr<Gateway> gateway;
    if (policy_needs_gateway(opts.policy)) gateway = make_gateway(*opts.gateway, opts.model);

    RunSummary summary;
    std::mutex mu;
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    auto worker = [&] {
        for (std::size_t i = next++; i < scenarios.size(); i = next++) {
            const Scenario& s = scenarios[i];
            const auto path = opts.out / (s.id + ".jsonl");
            if (opts.resume && std::filesystem::exists(path)) {
                try {
                    if (load_episode_log(path).complete) {
                        std::lock_guard lock(mu);
                        ++summary.skipped;
                        continue;
                    }
                } catch (const Error&) {
                    // Truncated log from an interrupted run; rerun it.
                }
            }
            try {
                EpisodeConfig cfg = opts.episode;
                cfg.seed = episode_seed(opts.seed, s.id);
                auto policy = make_policy(opts, s, gateway, cfg.seed);
                const EpisodeLog log = run_episode(s, *policy, cfg);
                save_episode_log(log, path);
                std::lock_guard lock(mu);
                ++summary.ran;
                if (log.error) ++summary.errored;
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
                next = scenarios.size();
            }
        }
    };
    const int jobs = std::min<int>(opts.jobs, std::max<int>(1, static_cast<int>(scenarios.size())));
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    json ledger = gateway ? gateway->ledger().to_json() : json{{"total_calls", 0}};
    ledger["episodes_run"] = summary.ran;
    ledger["episodes_skipped"] = summary.skipped;
    ledger["episodes_errored"] = summary.errored;
    std::ofstream(opts.out / "ledger.json") << ledger.dump(2) << "\n";
    if (failure) std::rethrow_exception(failure);
    return summary;
}

std::vector<EpisodeLog> load_run(const std::filesystem::path& run_dir) {
    if (!std::filesystem::is_directory(run_dir)) throw Error("run directory not found: " + run_dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(run_dir))
        if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<EpisodeLog> logs;
    logs.reserve(files.size());
    for (const auto& f : files) logs.push_back(load_episode_log(f));
    return logs;
}

std::vector<std::pair<std::string, CdbResult>> analyze_run(const std::filesystem::path& run_dir,
                                                           const std::filesystem::path& out_dir, double tol) {
    const auto logs = load_run(run_dir);
    std::filesystem::create_directories(out_dir / "progress");
    std::vector<std::pair<std::string, CdbResult>> rows;
    std::ofstream cdb(out_dir / "cdb.csv");
    cdb << "scenario_id,success,steps,cdb_found,t_star,pre_slope,post_slope\n";
    for (const auto& log : logs) {
        const CdbResult r = log.steps.empty() ? CdbResult{} : detect_cdb(log, tol);
        std::ostringstream line;
        line << log.scenario_id << "," << (log.success() ? 1 : 0) << "," << log.steps.size() << ","
             << (r.found ? 1 : 0) << ",";
        if (r.found) line << r.t_star << "," << r.pre_slope << "," << r.post_slope;
        else line << ",,";
        cdb << line.str() << "\n";
        if (log.initial_distance > 1e-9) {
            std::ofstream(out_dir / "progress" / (log.scenario_id + ".csv")) << progress_csv(progress_curve(log));
        }
        rows.emplace_back(log.scenario_id, r);
    }
    return rows;
}

}  // namespace aerialnav
