#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aerialnav/camera.hpp"
#include "aerialnav/episode.hpp"

namespace aerialnav {

// --- Grounding --------------------------------------------------------------------

struct GroundingResult {
    bool found = false;
    std::array<double, 4> pixel_box{};
    Pixel center;
    std::string label;
    double depth = 0.0;
};

/// Simulator-backed grounding: the image box of the labelled entity if it is visible.
/// Throws UnknownLabelError when nothing in the world carries the label.
GroundingResult ground_target(const CityWorld& world, const AgentPose& pose, const CameraIntrinsics& intr,
                              const std::string& label);

inline constexpr double kDefaultDeadZone = 56.0;

/// Centre horizontally by turning, then vertically with the gimbal, then fly forward.
/// `vertical_dead_zone` defaults to `dead_zone`.
Action grounded_controller_step(const GroundingResult& g, double dead_zone = kDefaultDeadZone,
                                std::optional<double> vertical_dead_zone = std::nullopt,
                                const CameraIntrinsics& intr = {});

/// Half a gimbal step expressed in pixels; a narrower band makes the gimbal hunt.
double gimbal_dead_zone(const CameraIntrinsics& intr, const MotionConfig& cfg);

/// Flies to a named landmark with grounding alone: search by turning (tilting, then
/// climbing, as full turns find nothing), centre, advance, and stop within one
/// translation step of the target. The last sighting is kept as a world-frame fix so
/// a target that slips out of frame up close can be re-aimed at or stopped beside.
class GroundedPolicy : public Policy {
public:
    GroundedPolicy(const CityWorld& world, std::string target_label, MotionConfig cfg = {},
                   CameraIntrinsics intr = {});

    std::string name() const override { return "grounded"; }
    void reset(const std::string& instruction, const SemanticObservation& initial) override;
    PolicyDecision next_action(const SemanticObservation& observation) override;

    /// One decision from a pose; nullopt when the target is not in view.
    std::optional<PolicyDecision> step_towards(const AgentPose& pose) const;

private:
    PolicyDecision approach(const AgentPose& pose, const GroundingResult& g, const Vec3& target) const;
    Vec3 estimate(const AgentPose& pose, const GroundingResult& g) const;
    std::optional<PolicyDecision> reacquire(const AgentPose& pose) const;

    const CityWorld* world_;
    std::string label_;
    MotionConfig cfg_;
    CameraIntrinsics intr_;
    int search_turns_ = 0;
    bool search_down_ = true;
    bool swept_ = false;
    std::optional<Vec3> last_fix_;
};

// --- Cross-view -------------------------------------------------------------------

/// Six-view panorama serialised as tagged sections; replaces the single view.
std::string crossview_text(const CityWorld& world, const AgentPose& pose, const CameraIntrinsics& intr = {});

// --- Imagination loop -------------------------------------------------------------

struct ImaginedOutcome {
    Action action = Action::move_forth;
    AgentPose pose;  // post-action pose, never committed
    bool blocked = false;
    SemanticObservation observation;
};

struct Verdict {
    bool accept = false;
    double score = 0.0;
};

struct ImaginationResult {
    Action action = Action::move_forth;
    int iterations = 0;
    bool accepted = false;
};

inline constexpr int kDefaultImaginationIters = 10;

/// `proposer(i)` yields the i-th candidate or nullopt when it has none left.
using Proposer = std::function<std::optional<Action>(int iteration)>;
using Scorer = std::function<Verdict(const ImaginedOutcome&)>;

ImaginationResult imagination_loop(const CityWorld& world, const AgentPose& pose, const Proposer& proposer,
                                   const Scorer& scorer, int max_iters = kDefaultImaginationIters,
                                   const MotionConfig& cfg = {}, const CameraIntrinsics& intr = {});

/// Cycles through the ten motion commands in canonical order.
Proposer canonical_proposer();

/// Accepts a candidate iff it is unblocked and brings `from` closer to `goal`;
/// the score is the reduction.
Scorer greedy_distance_scorer(const Vec3& goal, const AgentPose& from);

// --- Sparse memory ----------------------------------------------------------------

struct SparseMemoryConfig {
    double threshold = 0.7;
    int lookback = 5;
    int samples = 256;

    void validate() const;
};

/// Admit iff the new view's overlap with each of the last `lookback` stored views is
/// below the threshold. An empty store always admits.
bool sparse_memory_admit(const CityWorld& world, const AgentPose& new_pose, const std::vector<AgentPose>& stored,
                         const SparseMemoryConfig& cfg = {}, const CameraIntrinsics& intr = {});

// --- Toggles ----------------------------------------------------------------------

struct EnhancementSet {
    bool grounding = false;
    bool crossview = false;
    bool imagination = false;
    bool sparse_memory = false;

    bool any() const { return grounding || crossview || imagination || sparse_memory; }
    std::vector<std::string> names() const;
};

/// Parses a comma-separated list such as "grounding,sparse_memory".
EnhancementSet parse_enhancements(std::string_view list);

}  // namespace aerialnav
