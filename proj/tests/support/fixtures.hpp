#pragma once
// Hand-built episode logs for metric tests.

#include <string>
#include <vector>

#include "aerialnav/episode.hpp"

namespace fixture {

/// An episode that flies straight along +x through the given x positions (the
/// first is the start) toward a goal on the x axis.
inline aerialnav::EpisodeLog straight_log(const std::string& id, const std::vector<double>& xs, double goal_x,
                                          double optimal, bool success) {
    using namespace aerialnav;
    EpisodeLog log;
    log.scenario_id = id;
    log.policy = "fixture";
    log.start = make_pose({xs.front(), 0, 50}, 0);
    log.goal = {goal_x, 0, 50};
    log.optimal_length = optimal;
    log.initial_distance = std::abs(goal_x - xs.front());
    for (std::size_t i = 1; i < xs.size(); ++i) {
        StepRecord s;
        s.index = static_cast<int>(i - 1);
        s.action = Action::move_forth;
        s.pose = make_pose({xs[i], 0, 50}, 0);
        s.distance_to_goal = std::abs(goal_x - xs[i]);
        log.steps.push_back(s);
    }
    log.final_distance = std::abs(goal_x - xs.back());
    log.outcome = success ? Outcome::success : Outcome::failure_timeout;
    log.complete = true;
    return log;
}

}  // namespace fixture
