#include <doctest.h>

#include <map>

#include "aerialnav/errors.hpp"
#include "aerialnav/policies.hpp"

using namespace aerialnav;

TEST_CASE("select_window examples") {
    CHECK(select_window(5, 3) == std::vector<std::size_t>{0, 2, 4});
    std::vector<std::size_t> all(30);
    for (std::size_t i = 0; i < 30; ++i) all[i] = i;
    CHECK(select_window(30, 30) == all);

    const auto w = select_window(100, 30);
    REQUIRE(w.size() == 30);
    CHECK(w.front() == 0);
    CHECK(w.back() == 99);
    for (std::size_t i = 1; i < w.size(); ++i) {
        const auto gap = w[i] - w[i - 1];
        CHECK((gap == 3 || gap == 4));
    }
}

TEST_CASE("select_window properties") {
    auto check = [](std::size_t h, std::size_t c) {
        const auto w = select_window(h, c);
        REQUIRE(w.size() <= std::max(c, std::size_t{0}));
        REQUIRE(w.size() == std::min(h, c));
        for (std::size_t i = 1; i < w.size(); ++i) REQUIRE(w[i] > w[i - 1]);
        if (h > 0) {
            REQUIRE(w.front() == 0);
            REQUIRE(w.back() == h - 1);
        }
    };
    for (std::size_t c = 2; c <= 64; ++c)
        for (std::size_t h = 0; h <= 600; ++h) check(h, c);
    for (std::size_t h = 0; h <= 10000; ++h) check(h, 30);
    for (std::size_t c = 2; c <= 10000; c += 97) check(10000, c);
}

TEST_CASE("parse_action handles surface variants") {
    const std::map<Action, std::pair<std::string, std::string>> words = {
        {Action::move_forth, {"move", "forth"}},  {Action::move_back, {"move", "back"}},
        {Action::move_left, {"move", "left"}},    {Action::move_right, {"move", "right"}},
        {Action::move_up, {"move", "up"}},        {Action::move_down, {"move", "down"}},
        {Action::turn_left, {"turn", "left"}},    {Action::turn_right, {"turn", "right"}},
        {Action::gimbal_up, {"gimbal", "up"}},    {Action::gimbal_down, {"gimbal", "down"}},
    };
    auto upper = [](std::string s) {
        for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        return s;
    };
    auto cap = [](std::string s) {
        s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
        return s;
    };
    for (const auto& [action, w] : words) {
        const auto& [v, d] = w;
        const std::vector<std::string> variants = {
            v + "_" + d, v + " " + d, v + "-" + d, v + d, upper(v + "_" + d), upper(v + " " + d), cap(v) + " " + d,
            cap(v) + "_" + cap(d), v + "  " + d, v + "__" + d, v + "\t" + d, "I will " + v + "_" + d + " now.",
            "Action: " + v + "_" + d, "Action: " + upper(v) + " " + upper(d) + " because it helps",
            "**Action**: " + v + "-" + d, "  action = " + v + " " + d, "(" + v + "_" + d + ")",
            "\"" + v + "_" + d + "\"", v + "_" + d + ".", "Next: " + cap(v) + "-" + cap(d) + "!"};
        REQUIRE(variants.size() == 20);
        for (const auto& text : variants) {
            INFO(text);
            REQUIRE(parse_action(text) == action);
        }
    }
    CHECK(parse_action("stop") == Action::stop);
    CHECK(parse_action("MOVE FORTH because the goal is ahead") == Action::move_forth);
    CHECK(parse_action("angle_down to look at the roof") == Action::gimbal_down);
    CHECK(parse_action("move forward") == Action::move_forth);
    CHECK(parse_action("I considered turn_left.\nAction: move_up") == Action::move_up);
    CHECK_FALSE(parse_action("hover in place"));
    CHECK_FALSE(parse_action("unstoppable"));
    CHECK_FALSE(parse_action("stop", false));
}

TEST_CASE("random policy is uniform and seeded") {
    RandomPolicy a(11), b(11);
    std::map<Action, int> freq;
    const SemanticObservation obs;
    for (int i = 0; i < 10000; ++i) {
        const Action x = a.next_action(obs).action;
        CHECK(x == b.next_action(obs).action);
        REQUIRE(x != Action::stop);
        ++freq[x];
    }
    REQUIRE(freq.size() == 10);
    for (const auto& [act, n] : freq) CHECK(std::abs(n / 10000.0 - 0.1) <= 0.01);
}

TEST_CASE("action sampling follows the category prior") {
    CHECK(ActionSamplingPolicy::members(ActionCategory::horizontal).size() == 4);
    CHECK(ActionSamplingPolicy::members(ActionCategory::vertical).size() == 2);
    CHECK(ActionSamplingPolicy::members(ActionCategory::rotation).size() == 4);
    ActionSamplingPolicy p(3), q(3);
    int counts[3] = {0, 0, 0};
    const SemanticObservation obs;
    for (int i = 0; i < 10000; ++i) {
        const Action a = p.next_action(obs).action;
        CHECK(a == q.next_action(obs).action);
        ++counts[static_cast<int>(category_of(a))];
    }
    CHECK(std::abs(counts[0] / 10000.0 - 0.450) <= 0.02);
    CHECK(std::abs(counts[1] / 10000.0 - 0.282) <= 0.02);
    CHECK(std::abs(counts[2] / 10000.0 - 0.268) <= 0.02);
}

TEST_CASE("oracle never picks a blocked move") {
    CityWorld w;
    w.bounds = {{-200, -200, 0}, {200, 200, 120}};
    w.buildings.push_back({{{30, -40, 0}, {50, 40, 100}}, "wall"});
    w.buildings.push_back({{{-60, 30, 0}, {-20, 60, 60}}, "tower"});
    const Vec3 goal{120, 10, 30};
    OraclePolicy oracle(w, goal, 20.0);
    AgentPose pose = make_pose({-50, 0, 40}, 200);
    SemanticObservation obs;
    obs.camera_pose = pose;
    oracle.reset("", obs);
    for (int t = 0; t < 60; ++t) {
        const Action a = oracle.decide(pose, t == 0).action;
        if (a == Action::stop) break;
        const StepResult r = apply_action(pose, a, w, MotionConfig{});
        REQUIRE_FALSE(r.blocked);
        pose = r.pose;
    }
    CHECK(distance_to_goal(pose, goal) <= 20.0);
}

TEST_CASE("oracle reset reports unreachable goals") {
    CityWorld w;
    w.bounds = {{-200, -200, 0}, {200, 200, 120}};
    w.buildings.push_back({{{30, -40, 0}, {50, 40, 100}}, "block"});
    OraclePolicy oracle(w, {40, 0, 50}, 20.0);
    SemanticObservation obs;
    obs.camera_pose = make_pose({0, 0, 50}, 0);
    CHECK_THROWS_AS(oracle.reset("", obs), NoPathError);
}

TEST_CASE("language policy parses, reprompts and falls back") {
    SemanticObservation obs;
    obs.camera_pose = make_pose({0, 0, 50}, 0, -45);

    SUBCASE("plain answer") {
        auto gw = std::make_shared<ScriptedGateway>([](const GatewayRequest&) { return "move_forth"; });
        LanguagePolicy p(gw);
        p.reset("Fly to the red kiosk.", obs);
        CHECK(p.next_action(obs).action == Action::move_forth);
        const auto reqs = gw->requests();
        REQUIRE(reqs.size() == 1);
        const std::string prompt = reqs[0].messages[0].text();
        CHECK(prompt.find("Fly to the red kiosk.") != std::string::npos);
        CHECK(prompt.find("-45") != std::string::npos);
        CHECK(prompt.find("(no actions taken yet)") != std::string::npos);
        CHECK(prompt.find('{') == std::string::npos);
    }
    SUBCASE("free text") {
        auto gw = std::make_shared<ScriptedGateway>([](const GatewayRequest&) { return "MOVE FORTH because..."; });
        LanguagePolicy p(gw);
        p.reset("x", obs);
        CHECK(p.next_action(obs).action == Action::move_forth);
    }
    SUBCASE("garbage twice") {
        auto gw = std::make_shared<ScriptedGateway>([](const GatewayRequest&) { return "I like turtles"; });
        LanguagePolicy p(gw);
        p.reset("x", obs);
        const auto d = p.next_action(obs);
        CHECK(d.action == Action::move_forth);
        CHECK(d.rationale == "parse-failure fallback");
        CHECK(gw->requests().size() == 2);
    }
    SUBCASE("memory accumulates") {
        auto gw = std::make_shared<ScriptedGateway>([](const GatewayRequest&) { return "Action: turn_left"; });
        LanguagePolicy p(gw);
        p.reset("x", obs);
        p.next_action(obs);
        p.next_action(obs);
        CHECK(gw->requests().back().messages[0].text().find("t=0: action turn_left") != std::string::npos);
    }
    SUBCASE("backend failure becomes a policy error") {
        auto gw = std::make_shared<ScriptedGateway>([](const GatewayRequest&) -> std::string {
            throw GatewayError(GatewayError::Kind::exhausted, "down");
        });
        LanguagePolicy p(gw);
        p.reset("x", obs);
        CHECK_THROWS_AS(p.next_action(obs), PolicyError);
    }
}
