#include <doctest.h>

#include <random>

#include "aerialnav/errors.hpp"
#include "aerialnav/metrics.hpp"
#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"

using namespace aerialnav;
using fixture::straight_log;

TEST_CASE("success rate, SPL and DTG examples") {
    const auto ok = straight_log("a", {0, 100}, 100, 100, true);
    const auto bad = straight_log("b", {0, 10}, 100, 100, false);
    CHECK(success_rate({ok, bad, bad, ok}) == 0.5);
    CHECK(success_rate({ok, ok}) == 1.0);

    CHECK(spl({straight_log("c", {0, 50, 100, 125}, 125, 100, true)}) == doctest::Approx(0.8));
    CHECK(spl({straight_log("d", {0, 90}, 95, 100, true)}) == 1.0);
    CHECK(spl({ok, bad}) == 0.5);

    CHECK(dtg({straight_log("e", {0, 90}, 100, 100, false), straight_log("f", {0, 70}, 100, 100, false)}) ==
          doctest::Approx(20.0));
    CHECK(dtg({straight_log("g", {0, 42.9}, 100, 100, false)}) == doctest::Approx(57.1));

    CHECK_THROWS_AS(success_rate({}), EmptySetError);
    CHECK_THROWS_AS(spl(std::vector<EpisodeLog>{}), EmptySetError);
    CHECK_THROWS_AS(dtg({}), EmptySetError);
}

TEST_CASE("SPL never exceeds SR on random log sets") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> len(10, 300), step(1, 40);
    std::bernoulli_distribution win(0.5);
    for (int set = 0; set < 200; ++set) {
        std::vector<EpisodeLog> logs;
        const int n = 1 + set % 9;
        for (int i = 0; i < n; ++i) {
            std::vector<double> xs{0};
            for (int k = 0; k < 5; ++k) xs.push_back(xs.back() + step(rng));
            logs.push_back(straight_log("r", xs, 400, len(rng), win(rng)));
        }
        CHECK(spl(logs) <= success_rate(logs) + 1e-12);
    }
}

TEST_CASE("grouping") {
    const auto g = group_episodes({100, 200, 300}, GroupingMode::trisect);
    CHECK(g.members[0] == std::vector<std::size_t>{0});
    CHECK(g.members[1] == std::vector<std::size_t>{1});
    CHECK(g.members[2] == std::vector<std::size_t>{2});

    const auto fixed = group_episodes({118.2, 100, 223.6, 223.7}, GroupingMode::paper_fixed);
    CHECK(fixed.members[0] == std::vector<std::size_t>{1});
    CHECK(fixed.members[1] == std::vector<std::size_t>{0, 2});
    CHECK(fixed.members[2] == std::vector<std::size_t>{3});

    const auto empty = group_episodes({}, GroupingMode::trisect);
    for (const auto& m : empty.members) CHECK(m.empty());

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> len(20, 400);
    std::vector<double> lengths(97);
    for (auto& x : lengths) x = len(rng);
    const auto t = group_episodes(lengths, GroupingMode::trisect);
    std::vector<int> seen(lengths.size(), 0);
    for (const auto& m : t.members)
        for (auto i : m) ++seen[i];
    for (int s : seen) CHECK(s == 1);
}

TEST_CASE("evaluate and CSV") {
    const std::vector<EpisodeLog> logs = {straight_log("s", {0, 100}, 100, 100, true),
                                          straight_log("m", {0, 10}, 150, 150, false),
                                          straight_log("l", {0, 250}, 250, 250, true)};
    const auto r = evaluate(logs, GroupingMode::paper_fixed);
    REQUIRE(r.rows.size() == 4);
    CHECK(r.rows[1].n == 1);
    CHECK(*r.rows[1].sr == 0.0);
    CHECK(*r.rows[3].dtg == doctest::Approx(140.0 / 3.0));
    const std::string csv = to_csv(r);
    CHECK(csv.rfind("group,n,SR,SPL,DTG\n", 0) == 0);
    CHECK(csv.find("short,1,100.00,100.00,0.00\n") != std::string::npos);
    CHECK(csv.find("average,3,66.67,66.67,46.67\n") != std::string::npos);

    const auto sparse = evaluate({logs[0]}, GroupingMode::paper_fixed);
    CHECK(to_csv(sparse).find("long,0,,,\n") != std::string::npos);
}

TEST_CASE("progress curve") {
    CHECK(progress_curve(std::vector<double>{100, 50, 0}) == std::vector<double>{1.0, 0.5, 0.0});
    CHECK(progress_curve(std::vector<double>{100, 150}) == std::vector<double>{1.0, 1.5});
    CHECK(progress_curve(std::vector<double>{40, 40, 40}) == std::vector<double>{1.0, 1.0, 1.0});
    CHECK_THROWS_AS(progress_curve(std::vector<double>{0, 10}), DegenerateStartError);
    const std::string csv = progress_csv({1.0, 1.5});
    CHECK(csv == "step,r_t,completion_pct\n0,1.000000,0.0000\n1,1.500000,-50.0000\n");
}

TEST_CASE("CDB detection") {
    SUBCASE("examples") {
        const auto r = detect_cdb({50, 40, 30, 40, 50, 60}, true);
        CHECK(r.found);
        CHECK(r.t_star == 2);
        CHECK(r.pre_slope == doctest::Approx(-10.0));
        CHECK(r.post_slope == doctest::Approx(10.0));
        CHECK_FALSE(detect_cdb({50, 40, 30, 20, 10}, false).found);
        CHECK(detect_cdb({50, 60, 55, 70, 80}, true).t_star == 2);
        CHECK_FALSE(detect_cdb({50, 40, 40, 40}, true).found);
    }
    SUBCASE("matches the exhaustive suffix scan") {
        std::mt19937_64 rng(77);
        std::uniform_int_distribution<int> length(2, 40), delta(-3, 3);
        std::bernoulli_distribution failed(0.8);
        for (int n = 0; n < 1000; ++n) {
            std::vector<double> d{100};
            const int T = length(rng);
            for (int i = 1; i < T; ++i) d.push_back(d.back() + 5.0 * delta(rng));
            const bool f = failed(rng);
            const double tol = (n % 3) * 2.5;
            const long expected = oracle::cdb_suffix_scan(d, f, tol);
            const auto got = detect_cdb(d, f, tol);
            REQUIRE(got.found == (expected >= 0));
            if (got.found) REQUIRE(static_cast<long>(got.t_star) == expected);
        }
    }
}

TEST_CASE("dataset statistics") {
    Scenario a, b;
    a.start = make_pose({0, 0, 50}, 90);
    a.goal.position = {0, 100, 50};
    a.ground_truth.length = 100;
    a.ground_truth.actions = {Action::move_forth, Action::move_forth, Action::stop};
    b.start = make_pose({0, 0, 50}, 0);
    b.goal.position = {0, 0, 80};
    b.ground_truth.length = 300;
    b.ground_truth.actions = {Action::move_up, Action::turn_left, Action::move_left, Action::move_up};
    const auto s = dataset_stats({a, b});
    CHECK(s.mean_length == 200.0);
    CHECK(s.horizontal_share == doctest::Approx(0.5));
    CHECK(s.vertical_share == doctest::Approx(1.0 / 3.0));
    CHECK(s.rotation_share == doctest::Approx(1.0 / 6.0));
    CHECK(s.displacements[0].x == doctest::Approx(100.0));
    CHECK(s.displacements[0].y == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(dataset_stats({a}).horizontal_share == 1.0);
}
