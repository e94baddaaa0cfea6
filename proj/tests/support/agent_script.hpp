#pragma once
// A gateway script that answers the agent's prompts with the oracle's choice.

#include <functional>
#include <memory>
#include <string>

#include "aerialnav/agent.hpp"
#include "aerialnav/policies.hpp"

namespace script {

/// Holds the pose the agent is about to act from; the driver updates it before
/// every step so the decide reply can name the oracle's action.
struct OracleScript {
    const aerialnav::OraclePolicy* oracle = nullptr;
    aerialnav::AgentPose pose;
    int step = 0;
    std::function<bool(int)> unsure = [](int) { return false; };

    std::string oracle_reply() const {
        const auto d = oracle->decide(pose, step == 0);
        return d.action == aerialnav::Action::stop ? "GOAL_REACHED" : "Action: " + std::string(to_string(d.action));
    }

    std::string respond(const aerialnav::GatewayRequest& r) const {
        using aerialnav::RequestTag;
        switch (r.tag) {
            case RequestTag::localize:
                return "The drone has flown " + std::to_string(step) + " steps from the start.";
            case RequestTag::plan:
                return "Inference: the goal sits near the named building.\n"
                       "Perception plan:\n1. find the anchor building\n2. find the landmark\n"
                       "Route:\nStart: current position\nFlight: toward the anchor\nEnd: beside the landmark\n"
                       "Progress: step " + std::to_string(step);
            case RequestTag::imagine: {
                std::string out;
                for (auto a : aerialnav::kMotionActions) out += std::string(to_string(a)) + ": the view shifts\n";
                return out;
            }
            case RequestTag::decide:
                if (unsure(step)) return "Action: gimbal_down\nConfidence: UNSURE";
                return oracle_reply() + "\nConfidence: CONFIDENT";
            case RequestTag::active_perception:
                return oracle_reply();
            case RequestTag::plain:
                break;
        }
        return "";
    }
};

/// Wraps the agent and keeps the script's pose and step counter in sync.
class DrivenAgent : public aerialnav::Policy {
public:
    DrivenAgent(std::unique_ptr<aerialnav::Agent> agent, OracleScript* s) : agent_(std::move(agent)), script_(s) {}

    std::string name() const override { return agent_->name(); }
    void reset(const std::string& instruction, const aerialnav::SemanticObservation& initial) override {
        script_->step = 0;
        agent_->reset(instruction, initial);
    }
    aerialnav::PolicyDecision next_action(const aerialnav::SemanticObservation& obs) override {
        script_->pose = obs.camera_pose;
        auto d = agent_->next_action(obs);
        ++script_->step;
        return d;
    }

private:
    std::unique_ptr<aerialnav::Agent> agent_;
    OracleScript* script_;
};

}  // namespace script
