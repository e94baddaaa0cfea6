#include "aerialnav/enhancements.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "aerialnav/errors.hpp"

namespace aerialnav {

GroundingResult ground_target(const CityWorld& world, const AgentPose& pose, const CameraIntrinsics& intr,
                              const std::string& label) {
    bool exists = world.find_landmark(label) != nullptr;
    for (const auto& b : world.buildings) exists = exists || b.label == label || label.rfind(b.label + " ", 0) == 0;
    if (!exists) throw UnknownLabelError(label);

    GroundingResult g;
    g.label = label;
    for (const auto& e : render(world, pose, intr).entities) {
        if (e.label != label) continue;
        g.found = true;
        g.pixel_box = e.box;
        g.center = e.box_center();
        g.depth = e.depth;
        break;
    }
    return g;
}

Action grounded_controller_step(const GroundingResult& g, double dead_zone, std::optional<double> vertical_dead_zone,
                                const CameraIntrinsics& intr) {
    if (!g.found) throw Error("grounded controller needs a found target");
    const double du = g.center.u - intr.cx();
    const double dv = g.center.v - intr.cy();
    if (std::abs(du) > dead_zone) return du > 0 ? Action::turn_right : Action::turn_left;
    if (std::abs(dv) > vertical_dead_zone.value_or(dead_zone)) return dv > 0 ? Action::gimbal_down : Action::gimbal_up;
    return Action::move_forth;
}

double gimbal_dead_zone(const CameraIntrinsics& intr, const MotionConfig& cfg) {
    return intr.focal_px() * std::tan(deg2rad(cfg.gimbal_step / 2.0));
}

GroundedPolicy::GroundedPolicy(const CityWorld& world, std::string target_label, MotionConfig cfg,
                               CameraIntrinsics intr)
    : world_(&world), label_(std::move(target_label)), cfg_(cfg), intr_(intr) {}

void GroundedPolicy::reset(const std::string&, const SemanticObservation&) {
    search_turns_ = 0;
    search_down_ = true;
    swept_ = false;
    last_fix_.reset();
    // Surfaces a bad label before the first step.
    ground_target(*world_, AgentPose{}, intr_, label_);
}

namespace {

// A rotation must improve the aim by this much; smaller gains are within the noise of
// the box-centre estimate and lead to back-and-forth tilting.
constexpr double kAimHysteresisDeg = 2.0;

// Bearing and elevation of `target` relative to where the camera points, in degrees.
std::pair<double, double> angular_error(const AgentPose& pose, const Vec3& target) {
    const Vec3 d = target - pose.position;
    const double bearing = rad2deg(std::atan2(d.y, d.x));
    const double elevation = rad2deg(std::atan2(d.z, std::hypot(d.x, d.y)));
    return {std::abs(angle_difference(bearing, pose.yaw)), std::abs(elevation - pose.gimbal)};
}

}  // namespace

Vec3 GroundedPolicy::estimate(const AgentPose& pose, const GroundingResult& g) const {
    const CameraFrame frame(CameraPose::from(pose));
    const Vec3 ray = normalized(unproject(frame, intr_, g.center, 1.0) - frame.origin);
    return pose.position + ray * g.depth;
}

std::optional<PolicyDecision> GroundedPolicy::step_towards(const AgentPose& pose) const {
    const GroundingResult g = ground_target(*world_, pose, intr_, label_);
    if (!g.found) return std::nullopt;
    return approach(pose, g, estimate(pose, g));
}

PolicyDecision GroundedPolicy::approach(const AgentPose& pose, const GroundingResult& g, const Vec3& target) const {
    if (g.depth <= cfg_.translation_step) return PolicyDecision{Action::stop, "target within one step"};

    // A box clipped by the top or bottom edge hides how far off-axis the target is.
    if (g.pixel_box[1] <= 0.0 && pose.gimbal < 0.0) return PolicyDecision{Action::gimbal_up, "target at top edge"};
    if (g.pixel_box[3] >= intr_.height && pose.gimbal > -90.0)
        return PolicyDecision{Action::gimbal_down, "target at bottom edge"};

    const double margin = 0.05 * intr_.width;
    auto keeps_in_frame = [&](const AgentPose& after) {
        const auto px = project(CameraFrame(CameraPose::from(after)), intr_, target);
        return px && px->u >= margin && px->u <= intr_.width - margin && px->v >= margin &&
               px->v <= intr_.height - margin;
    };

    const Action a = grounded_controller_step(g, kDefaultDeadZone, gimbal_dead_zone(intr_, cfg_), intr_);
    if (a != Action::move_forth) {
        // The pixel offset of a pitched camera overstates the bearing error, and the gimbal
        // cannot tilt past its clamps, so only rotate when the rotation helps.
        const AgentPose after = apply_action(pose, a, *world_, cfg_).pose;
        const auto [bearing0, elevation0] = angular_error(pose, target);
        const auto [bearing1, elevation1] = angular_error(after, target);
        const bool turn = a == Action::turn_left || a == Action::turn_right;
        const bool helps = turn ? bearing1 < bearing0 - kAimHysteresisDeg : elevation1 < elevation0 - kAimHysteresisDeg;
        // Up close a turn or tilt can push the target out of frame; advance instead.
        if (helps && keeps_in_frame(after)) return PolicyDecision{a, "centring target"};
    }

    // Advance along whichever translation best closes on the estimate, preferring moves
    // that keep the target in frame; forward wins whenever the target is centred and level.
    Action best = Action::move_forth, best_any = Action::move_forth;
    const double start_d = distance(pose.position, target);
    double best_d = start_d, best_any_d = start_d;
    for (Action cand : kMotionActions) {
        if (cand > Action::move_down) break;
        const StepResult r = apply_action(pose, cand, *world_, cfg_);
        if (r.blocked) continue;
        const double d = distance(r.pose.position, target);
        if (d < best_any_d - 1e-9) {
            best_any_d = d;
            best_any = cand;
        }
        // Ending within stop range is fine even out of frame: the last fix covers it.
        if (d < best_d - 1e-9 && (d <= cfg_.translation_step || keeps_in_frame(r.pose))) {
            best_d = d;
            best = cand;
        }
    }
    if (best_d < start_d) return PolicyDecision{best, "target centred, advancing"};
    return PolicyDecision{best_any, "advancing; the target may leave the frame"};
}

std::optional<PolicyDecision> GroundedPolicy::reacquire(const AgentPose& pose) const {
    if (!last_fix_) return std::nullopt;
    if (distance(pose.position, *last_fix_) <= cfg_.translation_step)
        return PolicyDecision{Action::stop, "within one step of the last fix"};
    const auto [bearing, elevation] = angular_error(pose, *last_fix_);
    for (Action a : {Action::turn_left, Action::turn_right, Action::gimbal_up, Action::gimbal_down}) {
        const auto [b, e] = angular_error(apply_action(pose, a, *world_, cfg_).pose, *last_fix_);
        const bool turn = a == Action::turn_left || a == Action::turn_right;
        if (turn ? b < bearing - 1e-9 : (b <= bearing + 1e-9 && e < elevation - 1e-9))
            return PolicyDecision{a, "re-aiming at the last fix"};
    }
    return std::nullopt;
}

PolicyDecision GroundedPolicy::next_action(const SemanticObservation& observation) {
    const AgentPose& pose = observation.camera_pose;
    const GroundingResult g = ground_target(*world_, pose, intr_, label_);
    if (g.found) {
        search_turns_ = 0;
        last_fix_ = estimate(pose, g);
        return approach(pose, g, *last_fix_);
    }
    if (auto d = reacquire(pose)) return *d;
    // The fix is stale once aiming at it no longer brings the target back.
    last_fix_.reset();
    const int full_turn = static_cast<int>(std::lround(360.0 / cfg_.turn_step));
    if (search_turns_ < full_turn) {
        ++search_turns_;
        return {Action::turn_left, "searching for target"};
    }
    // After each full turn, sweep the gimbal down to -90 and back up to level. A target
    // still unseen after that sits above the frame, so keep the camera level and climb
    // a step per full turn.
    search_turns_ = 0;
    if (!swept_) {
        if (search_down_ && pose.gimbal <= -90.0) search_down_ = false;
        if (search_down_) return {Action::gimbal_down, "target not found; tilting down"};
        if (pose.gimbal < 0.0) return {Action::gimbal_up, "target not found; tilting up"};
        swept_ = true;
    }
    if (apply_action(pose, Action::move_up, *world_, cfg_).blocked) {
        swept_ = false;
        search_down_ = true;
        return {Action::gimbal_down, "target not found and cannot climb; sweeping again"};
    }
    return {Action::move_up, "target not found with a level camera; climbing"};
}

std::string crossview_text(const CityWorld& world, const AgentPose& pose, const CameraIntrinsics& intr) {
    std::ostringstream os;
    for (const auto& v : panorama(world, pose, intr).views) {
        os << "[view " << v.tag << "]\n" << describe(v.observation);
    }
    return os.str();
}

ImaginationResult imagination_loop(const CityWorld& world, const AgentPose& pose, const Proposer& proposer,
                                   const Scorer& scorer, int max_iters, const MotionConfig& cfg,
                                   const CameraIntrinsics& intr) {
    ImaginationResult result;
    std::optional<Action> best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < max_iters; ++i) {
        const std::optional<Action> cand = proposer(i);
        if (!cand) break;
        result.iterations = i + 1;
        ImaginedOutcome probe;
        probe.action = *cand;
        if (*cand == Action::stop) {
            probe.pose = pose;
        } else {
            const StepResult r = apply_action(pose, *cand, world, cfg);
            probe.pose = r.pose;
            probe.blocked = r.blocked;
        }
        probe.observation = render(world, probe.pose, intr);
        const Verdict v = scorer(probe);
        if (v.accept) {
            result.action = *cand;
            result.accepted = true;
            return result;
        }
        if (!best || v.score > best_score) {
            best = cand;
            best_score = v.score;
        }
    }
    if (best) result.action = *best;
    return result;
}

Proposer canonical_proposer() {
    return [](int i) -> std::optional<Action> { return kMotionActions[static_cast<std::size_t>(i) % kMotionActions.size()]; };
}

Scorer greedy_distance_scorer(const Vec3& goal, const AgentPose& from) {
    const double before = distance(from.position, goal);
    return [goal, before](const ImaginedOutcome& o) -> Verdict {
        const double gain = before - distance(o.pose.position, goal);
        return {!o.blocked && gain > 1e-9, gain};
    };
}

void SparseMemoryConfig::validate() const {
    if (!(threshold > 0.0 && threshold <= 1.0)) throw Error("sparse memory threshold must lie in (0, 1]");
    if (lookback < 1 || samples < 1) throw Error("sparse memory lookback and samples must be positive");
}

bool sparse_memory_admit(const CityWorld& world, const AgentPose& new_pose, const std::vector<AgentPose>& stored,
                         const SparseMemoryConfig& cfg, const CameraIntrinsics& intr) {
    if (stored.empty()) return true;
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(cfg.lookback), stored.size());
    double worst = 0.0;
    for (std::size_t i = stored.size() - n; i < stored.size(); ++i)
        worst = std::max(worst, fov_overlap(world, new_pose, stored[i], intr, cfg.samples));
    return worst < cfg.threshold;
}

std::vector<std::string> EnhancementSet::names() const {
    std::vector<std::string> out;
    if (grounding) out.emplace_back("grounding");
    if (crossview) out.emplace_back("crossview");
    if (imagination) out.emplace_back("imagination");
    if (sparse_memory) out.emplace_back("sparse_memory");
    return out;
}

EnhancementSet parse_enhancements(std::string_view list) {
    EnhancementSet s;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        const std::size_t end = std::min(list.find(',', pos), list.size());
        std::string item(list.substr(pos, end - pos));
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (item == "grounding") s.grounding = true;
        else if (item == "crossview") s.crossview = true;
        else if (item == "imagination") s.imagination = true;
        else if (item == "sparse_memory") s.sparse_memory = true;
        else if (!item.empty() && item != "none") throw Error("unknown enhancement: " + item);
        pos = end + 1;
    }
    return s;
}

}  // namespace aerialnav
