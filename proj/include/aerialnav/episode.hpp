#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aerialnav/camera.hpp"
#include "aerialnav/scenario.hpp"
#include "aerialnav/world.hpp"

namespace aerialnav {

struct PolicyDecision {
    Action action = Action::stop;
    std::string rationale;
};

/// The navigation policy contract. One instance per episode.
class Policy {
public:
    virtual ~Policy() = default;

    virtual std::string name() const = 0;
    virtual void reset(const std::string& instruction, const SemanticObservation& initial) = 0;
    virtual PolicyDecision next_action(const SemanticObservation& observation) = 0;
    virtual bool requires_backend() const { return false; }
};

struct EpisodeConfig {
    int max_steps = 50;
    std::optional<double> epsilon;  // overrides the scenario's success radius
    std::uint64_t seed = 0;
    MotionConfig motion;
    CameraIntrinsics camera;

    void validate() const;
};

enum class Outcome { success, failure_timeout, failure_stopped_far };

std::string_view to_string(Outcome o);
Outcome outcome_from_name(std::string_view s);

struct StepRecord {
    int index = 0;
    Action action = Action::stop;
    AgentPose pose;  // pose after the action
    bool blocked = false;
    double distance_to_goal = 0.0;
    std::string rationale;
    std::vector<std::string> observed;  // labels visible when the action was chosen

    bool operator==(const StepRecord&) const = default;
};

struct EpisodeLog {
    std::string scenario_id;
    std::string policy;
    AgentPose start;
    Vec3 goal;
    double epsilon = 20.0;
    double optimal_length = 0.0;
    double initial_distance = 0.0;
    int max_steps = 50;
    std::uint64_t seed = 0;
    std::vector<StepRecord> steps;
    Outcome outcome = Outcome::failure_timeout;
    double final_distance = 0.0;
    std::optional<std::string> error;
    bool complete = false;

    bool success() const { return outcome == Outcome::success; }
    /// Initial distance followed by one entry per step.
    std::vector<double> distance_series() const;
    std::vector<Vec3> positions() const;
    /// Sum of consecutive pose distances; blocked steps contribute zero.
    double traveled_length() const;

    bool operator==(const EpisodeLog&) const = default;
};

/// Step-by-step episode state shared by the batch runner and the control service.
class EpisodeSession {
public:
    EpisodeSession(const Scenario& scenario, EpisodeConfig cfg, std::string policy_name);

    SemanticObservation observe() const;
    const AgentPose& pose() const { return pose_; }
    int step_count() const { return static_cast<int>(log_.steps.size()); }
    bool done() const { return log_.complete; }
    double distance() const;
    const EpisodeLog& log() const { return log_; }
    const Scenario& scenario() const { return *scenario_; }
    const EpisodeConfig& config() const { return cfg_; }

    /// Applies one action; `stop` terminates. Reaching max_steps finalizes with the
    /// positional success test. Throws aerialnav::Error when already done.
    const StepRecord& step(Action action, std::string rationale = {}, std::vector<std::string> observed = {});

    /// Terminates early after a backend failure, keeping the partial log.
    void abort(const std::string& reason);

private:
    void finish(bool stopped);

    const Scenario* scenario_;
    EpisodeConfig cfg_;
    AgentPose pose_;
    EpisodeLog log_;
};

EpisodeLog run_episode(const Scenario& scenario, Policy& policy, const EpisodeConfig& cfg);

/// JSONL: header object, one object per step, then a summary object.
void write_episode_log(const EpisodeLog& log, std::ostream& out);
void save_episode_log(const EpisodeLog& log, const std::filesystem::path& path);
EpisodeLog read_episode_log(std::istream& in);
EpisodeLog load_episode_log(const std::filesystem::path& path);
nlohmann::json to_json(const EpisodeLog& log);

}  // namespace aerialnav
