#include <doctest.h>

#include <sstream>

#include "aerialnav/episode.hpp"
#include "aerialnav/errors.hpp"
#include "aerialnav/generator.hpp"
#include "aerialnav/policies.hpp"

using namespace aerialnav;

namespace {

Scenario open_scenario(Vec3 goal, double yaw = 0.0) {
    Scenario s;
    s.id = "open";
    s.world.bounds = {{-500, -500, 0}, {500, 500, 200}};
    s.world.landmarks.push_back({goal, "target", std::nullopt});
    s.start = make_pose({0, 0, 50}, yaw);
    s.goal = {goal, 20.0, "Fly to the target."};
    s.ground_truth.length = distance(s.start.position, goal);
    return s;
}

class Scripted : public Policy {
public:
    explicit Scripted(std::vector<Action> a) : actions_(std::move(a)) {}
    std::string name() const override { return "scripted"; }
    void reset(const std::string&, const SemanticObservation&) override { i_ = 0; }
    PolicyDecision next_action(const SemanticObservation&) override {
        if (i_ >= actions_.size()) throw PolicyError("script exhausted");
        return {actions_[i_++], "scripted"};
    }

private:
    std::vector<Action> actions_;
    std::size_t i_ = 0;
};

}  // namespace

TEST_CASE("oracle reaches a goal 100 m ahead") {
    const Scenario s = open_scenario({100, 0, 50});
    OraclePolicy oracle(s.world, s.goal.position, s.goal.epsilon);
    const EpisodeLog log = run_episode(s, oracle, {});
    CHECK(log.outcome == Outcome::success);
    CHECK(log.steps.size() <= 12);
    REQUIRE(log.steps.size() == 11);
    for (int i = 0; i < 10; ++i) CHECK(log.steps[i].action == Action::move_forth);
    CHECK(log.steps.back().action == Action::stop);
    CHECK(log.final_distance == 0.0);
}

TEST_CASE("oracle turns toward a goal behind it first") {
    const Scenario s = open_scenario({-100, 0, 50});
    OraclePolicy oracle(s.world, s.goal.position, s.goal.epsilon);
    const EpisodeLog log = run_episode(s, oracle, {});
    CHECK(log.success());
    std::size_t turns = 0;
    while (turns < log.steps.size() &&
           (log.steps[turns].action == Action::turn_left || log.steps[turns].action == Action::turn_right))
        ++turns;
    CHECK(turns == 8);
    const double heading_error = std::abs(angle_difference(log.steps[turns - 1].pose.yaw, 180.0));
    CHECK(heading_error < 22.5 / 2);
}

TEST_CASE("oracle stops at once inside the success radius") {
    const Scenario s = open_scenario({10, 0, 50});
    OraclePolicy oracle(s.world, s.goal.position, s.goal.epsilon);
    const EpisodeLog log = run_episode(s, oracle, {});
    REQUIRE(log.steps.size() == 1);
    CHECK(log.steps[0].action == Action::stop);
    CHECK(log.success());
}

TEST_CASE("stopping far away and timing out") {
    Scenario s = open_scenario({100, 0, 50});
    Scripted stopper({Action::stop});
    const EpisodeLog far = run_episode(s, stopper, {});
    CHECK(far.outcome == Outcome::failure_stopped_far);
    CHECK(far.final_distance == doctest::Approx(100.0));

    s = open_scenario({300, 0, 50});
    RandomPolicy random(3);
    EpisodeConfig cfg;
    cfg.max_steps = 1;
    const EpisodeLog timeout = run_episode(s, random, cfg);
    CHECK(timeout.outcome == Outcome::failure_timeout);
    CHECK(timeout.steps.size() == 1);
}

TEST_CASE("timeout inside the radius counts as success") {
    const Scenario s = open_scenario({25, 0, 50});
    Scripted fwd({Action::move_forth, Action::move_forth});
    EpisodeConfig cfg;
    cfg.max_steps = 1;
    CHECK(run_episode(s, fwd, cfg).outcome == Outcome::success);
}

TEST_CASE("policy failure aborts with a partial log") {
    const Scenario s = open_scenario({200, 0, 50});
    Scripted two({Action::move_forth, Action::move_forth});
    const EpisodeLog log = run_episode(s, two, {});
    CHECK(log.outcome == Outcome::failure_timeout);
    CHECK(log.steps.size() == 2);
    REQUIRE(log.error);
    CHECK(log.error->find("script exhausted") != std::string::npos);
}

TEST_CASE("episodes are deterministic and distances recompute") {
    GeneratorParams p;
    p.group = LengthGroup::middle_range;
    const Scenario s = generate_scenario(8, p);
    EpisodeConfig cfg;
    cfg.seed = 4;
    RandomPolicy a(cfg.seed), b(cfg.seed);
    const EpisodeLog la = run_episode(s, a, cfg);
    const EpisodeLog lb = run_episode(s, b, cfg);
    CHECK(la == lb);
    CHECK(la.distance_series().size() == la.steps.size() + 1);
    CHECK(static_cast<int>(la.steps.size()) <= cfg.max_steps);
    for (const auto& st : la.steps) CHECK(st.distance_to_goal == distance_to_goal(st.pose, s.goal.position));
}

TEST_CASE("session rejects steps after the end") {
    const Scenario s = open_scenario({100, 0, 50});
    EpisodeSession session(s, {}, "manual");
    session.step(Action::stop);
    CHECK(session.done());
    CHECK_THROWS_AS(session.step(Action::move_forth), Error);
}

TEST_CASE("JSONL log round trip") {
    const Scenario s = open_scenario({-60, 40, 70}, 45);
    OraclePolicy oracle(s.world, s.goal.position, s.goal.epsilon);
    const EpisodeLog log = run_episode(s, oracle, {});
    std::stringstream ss;
    write_episode_log(log, ss);
    const std::string text = ss.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(log.steps.size()) + 2);
    std::stringstream in(text);
    CHECK(read_episode_log(in) == log);

    const auto path = std::filesystem::temp_directory_path() / "aerialnav_log_rt.jsonl";
    save_episode_log(log, path);
    CHECK(load_episode_log(path) == log);
    std::filesystem::remove(path);
}
