#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aerialnav/enhancements.hpp"
#include "aerialnav/episode.hpp"
#include "aerialnav/gateway.hpp"
#include "aerialnav/policies.hpp"
#include "aerialnav/prompts.hpp"

namespace aerialnav {

enum class MemoryAdmission { all, sparse };

struct StoredObservation {
    std::size_t step = 0;
    std::string summary;
    AgentPose pose;
};

/// Observation, plan and action histories. Plans and actions share the step index;
/// observations carry theirs explicitly because sparse admission skips some.
struct AgentMemory {
    MemoryAdmission admission = MemoryAdmission::all;
    SparseMemoryConfig sparse;
    std::vector<StoredObservation> observations;
    std::vector<std::string> plans;
    std::vector<Action> actions;

    std::size_t steps() const { return actions.size(); }
};

void memory_update(AgentMemory& memory, const CityWorld& world, const SemanticObservation& observation,
                   const std::string& plan, Action action, const CameraIntrinsics& intr = {});

struct RoutePlan {
    std::string start = "unspecified";
    std::string flight = "unspecified";
    std::string end = "unspecified";
};

struct PlanState {
    std::vector<std::string> perception_plan;
    RoutePlan route;
    std::string progress_note;
    std::string inference;
    bool perception_fallback = false;
    bool route_missing = false;

    std::string render() const;
};

/// Reads the "Perception plan:", "Route:" (Start/Flight/End) and "Progress:" sections.
PlanState parse_plan(const std::string& text);

struct CandidateOutcome {
    Action action = Action::move_forth;
    std::string predicted_effect;
    std::optional<double> score_hint;
    bool backfilled = false;
};

/// One outcome per motion command in canonical order; commands the text does not
/// cover get "unknown effect".
std::vector<CandidateOutcome> parse_candidates(const std::string& text);
std::string render_candidates(const std::vector<CandidateOutcome>& candidates);

struct Decision {
    Action action = Action::move_forth;
    bool confident = false;
    bool goal_reached = false;
    bool fallback = false;
};

/// GOAL_REACHED means stop. Otherwise the first motion command, with CONFIDENT only
/// when that token appears and UNSURE does not. No command gives (move_forth, unsure).
Decision parse_decision(const std::string& text);

struct AgentPrompts {
    std::string localize = prompts::q_loc;
    std::string plan = prompts::q_plan;
    std::string imagine = prompts::q_imgn;
    std::string decide = prompts::q_dm;
    std::string active = prompts::q_active;
    std::string verify = prompts::q_verify;

    /// Overrides any template for which DIR holds q_loc.txt, q_plan.txt, q_imgn.txt,
    /// q_dm.txt, q_active.txt or q_verify.txt.
    static AgentPrompts load(const std::filesystem::path& dir);
};

struct AgentConfig {
    std::string model;
    AgentPrompts prompts;
    std::size_t window = kMemoryWindowCapacity;
    EnhancementSet enhancements;
    SparseMemoryConfig sparse;
    int imagination_iters = kDefaultImaginationIters;
    std::string target_label;  // grounding target; empty disables grounding
    MotionConfig motion;
    CameraIntrinsics camera;
};

/// The six-module agent. Per step: localize, plan, imagine, decide, and when unsure
/// one active-perception call over six probe views.
class Agent : public Policy {
public:
    Agent(std::shared_ptr<Gateway> gateway, const CityWorld& world, AgentConfig cfg = {});

    std::string name() const override { return "agent"; }
    bool requires_backend() const override { return true; }
    void reset(const std::string& instruction, const SemanticObservation& initial) override;
    PolicyDecision next_action(const SemanticObservation& observation) override;

    std::string localize(const std::string& observation_text);
    PlanState plan(const std::string& localization, const std::string& observation_text, double gimbal);
    std::vector<CandidateOutcome> imagine(const PlanState& plan, const std::string& localization,
                                          const std::string& observation_text);
    Decision decide(const std::vector<CandidateOutcome>& candidates, const PlanState& plan);
    Decision active_perceive(const PlanState& plan, const std::string& localization, const AgentPose& pose);

    const AgentMemory& memory() const { return memory_; }
    const AgentConfig& config() const { return cfg_; }

private:
    std::string ask(RequestTag tag, const std::string& prompt);
    std::string observation_text(const SemanticObservation& observation) const;
    std::string history_text() const;
    Action verify_with_simulator(Action proposed, const PlanState& plan, const AgentPose& pose);

    std::shared_ptr<Gateway> gateway_;
    const CityWorld* world_;
    AgentConfig cfg_;
    std::string instruction_;
    AgentMemory memory_;
    std::optional<GroundedPolicy> grounded_;
};

}  // namespace aerialnav
