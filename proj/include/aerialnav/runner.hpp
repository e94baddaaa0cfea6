#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aerialnav/enhancements.hpp"
#include "aerialnav/episode.hpp"
#include "aerialnav/gateway.hpp"
#include "aerialnav/metrics.hpp"

namespace aerialnav {

/// "live", "replay:DIR" (strict, never forwards) or "record:DIR" (live backend, fixtures saved).
struct GatewaySpec {
    enum class Kind { live, replay, record } kind = Kind::replay;
    std::filesystem::path store;

    static GatewaySpec parse(std::string_view text);
    std::string str() const;
};

std::shared_ptr<Gateway> make_gateway(const GatewaySpec& spec, const std::string& model = {});

struct RunOptions {
    std::filesystem::path corpus;
    std::filesystem::path out;
    std::string policy = "oracle";  // random | sampling | oracle | lmm | agent
    EnhancementSet enhancements;
    std::optional<GatewaySpec> gateway;
    std::string model;
    std::optional<std::filesystem::path> prompts;
    int jobs = 1;
    bool resume = false;
    std::uint64_t seed = 0;
    EpisodeConfig episode;

    void validate() const;
    nlohmann::json to_json() const;
};

struct RunSummary {
    int ran = 0;
    int skipped = 0;  // already complete under --resume
    int errored = 0;  // aborted by a policy error; the partial log is kept
};

bool policy_needs_gateway(std::string_view policy);

/// Builds the policy for one scenario. `gateway` may be null for non-language policies.
std::unique_ptr<Policy> make_policy(const RunOptions& opts, const Scenario& scenario,
                                    std::shared_ptr<Gateway> gateway, std::uint64_t episode_seed);

/// Per-episode seed that depends on the run seed and scenario id only.
std::uint64_t episode_seed(std::uint64_t run_seed, const std::string& scenario_id);

/// Runs every scenario in the corpus and writes config.json, <id>.jsonl and ledger.json.
RunSummary run_corpus(const RunOptions& opts);

/// Episode logs of a run directory, sorted by scenario id.
std::vector<EpisodeLog> load_run(const std::filesystem::path& run_dir);

/// Writes cdb.csv and progress/<id>.csv; returns the CDB rows.
std::vector<std::pair<std::string, CdbResult>> analyze_run(const std::filesystem::path& run_dir,
                                                           const std::filesystem::path& out_dir, double tol = 0.0);

}  // namespace aerialnav
