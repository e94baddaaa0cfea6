#include <doctest.h>

#include <filesystem>

#include "aerialnav/errors.hpp"
#include "aerialnav/generator.hpp"
#include "aerialnav/metrics.hpp"
#include "aerialnav/policies.hpp"

using namespace aerialnav;

TEST_CASE("relation predicates") {
    const Aabb b{{0, 0, 0}, {20, 10, 30}};
    CHECK(relation_holds("on top of", {10, 5, 33}, b));
    CHECK_FALSE(relation_holds("on top of", {25, 5, 33}, b));
    CHECK(relation_holds("at the entrance of", {10, -4, 5}, b));
    CHECK_FALSE(relation_holds("at the entrance of", {10, 14, 5}, b));
    CHECK(relation_holds("behind", {10, 14, 5}, b));
    CHECK(relation_holds("left of", {-4, 5, 5}, b));
    CHECK(relation_holds("right of", {24, 5, 5}, b));
    CHECK(relation_holds("near", {-4, -4, 5}, b));
    CHECK_FALSE(relation_holds("near", {-40, -4, 5}, b));
    CHECK_THROWS_AS(relation_holds("beside", {0, 0, 0}, b), Error);
}

TEST_CASE("templates fill every slot") {
    for (const auto& t : instruction_templates()) {
        const std::string s = render_instruction(t, "red kiosk", "behind", "block B2");
        CHECK(s.find('{') == std::string::npos);
        CHECK(s.find("red kiosk") != std::string::npos);
    }
}

TEST_CASE("generated scenarios honour their contract") {
    GeneratorParams p;
    for (LengthGroup g : {LengthGroup::short_range, LengthGroup::middle_range, LengthGroup::long_range}) {
        p.group = g;
        for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
            const Scenario s = generate_scenario(seed, p);
            INFO(s.id);
            const double len = s.ground_truth.length;
            if (g == LengthGroup::short_range) CHECK(len < 118.2);
            if (g == LengthGroup::middle_range) CHECK((len >= 118.2 && len <= 223.6));
            if (g == LengthGroup::long_range) CHECK(len > 223.6);
            CHECK(len >= distance(s.start.position, s.goal.position) - 1e-9);
            CHECK_FALSE(s.goal.instruction.empty());
            CHECK(s.goal.epsilon == 20.0);
            CHECK(position_free(s.world, s.start.position, p.motion.safety_radius));
            CHECK(static_cast<int>(s.ground_truth.actions.size()) <= p.max_steps);
            CHECK(s.ground_truth.actions.back() == Action::stop);

            const Building* anchor = s.world.find_building(s.meta.anchor);
            REQUIRE(anchor);
            const Landmark* lm = s.world.find_landmark(s.meta.landmark);
            REQUIRE(lm);
            CHECK(lm->position == s.goal.position);
            CHECK(relation_holds(s.meta.relation, lm->position, anchor->box));

            // Solvable: the oracle replays to success within the episode budget.
            OraclePolicy oracle(s.world, s.goal.position, s.goal.epsilon);
            EpisodeConfig cfg;
            const EpisodeLog log = run_episode(s, oracle, cfg);
            CHECK(log.success());
            CHECK(log.traveled_length() + log.final_distance == doctest::Approx(len));
            CHECK(s.ground_truth.polyline.back() == s.goal.position);
        }
    }
}

TEST_CASE("generation is deterministic") {
    GeneratorParams p;
    p.group = LengthGroup::short_range;
    CHECK(dump_scenario(generate_scenario(42, p)) == dump_scenario(generate_scenario(42, p)));
    CHECK(dump_scenario(generate_scenario(42, p)) != dump_scenario(generate_scenario(43, p)));
}

TEST_CASE("impossible requests fail after the attempt budget") {
    GeneratorParams p;
    p.group = LengthGroup::long_range;
    // A 120 x 120 x 60 m city cannot host a 224 m route.
    p.grid = 1;
    p.ceiling = 60;
    p.max_height = 40;
    p.min_start_height = 10;
    p.max_start_height = 50;
    p.max_goal_height = 40;
    CHECK_THROWS_AS(generate_scenario(5, p), GenerationFailure);
}

TEST_CASE("corpus files, manifest and statistics") {
    const auto dir = std::filesystem::temp_directory_path() / "aerialnav_corpus_test";
    std::filesystem::remove_all(dir);
    const auto m = generate_corpus(dir, 9, 4);
    REQUIRE(m.entries.size() == 12);
    const auto loaded = load_corpus(dir);
    REQUIRE(loaded.size() == 12);
    for (std::size_t i = 0; i < loaded.size(); ++i) CHECK(loaded[i].id == m.entries[i].id);

    const auto stats = dataset_stats(loaded);
    MESSAGE("shares h/v/r = " << stats.horizontal_share << " / " << stats.vertical_share << " / "
                              << stats.rotation_share << ", mean length " << stats.mean_length);
    CHECK(stats.horizontal_share + stats.vertical_share + stats.rotation_share == doctest::Approx(1.0));
    std::filesystem::remove_all(dir);
}
