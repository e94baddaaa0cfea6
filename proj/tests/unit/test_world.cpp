#include <doctest.h>

#include <cmath>
#include <queue>
#include <random>

#include "aerialnav/errors.hpp"
#include "aerialnav/world.hpp"

using namespace aerialnav;

namespace {

CityWorld empty_world() {
    CityWorld w;
    w.bounds = {{-500, -500, 0}, {500, 500, 200}};
    return w;
}

// Dijkstra on a fine 2-D grid with 16-connectivity; the wall spans the whole height
// so the problem is planar.
double fine_grid_length(const CityWorld& w, Vec3 s, Vec3 g, double safety, double res) {
    const double x0 = -20, x1 = 120, y0 = -80, y1 = 80;
    const int nx = static_cast<int>((x1 - x0) / res) + 1;
    const int ny = static_cast<int>((y1 - y0) / res) + 1;
    auto blocked = [&](double x, double y) {
        for (const auto& b : w.buildings) {
            const Aabb box = b.box.inflated(safety);
            if (x > box.lo.x && x < box.hi.x && y > box.lo.y && y < box.hi.y) return true;
        }
        return false;
    };
    auto id = [&](int i, int j) { return j * nx + i; };
    std::vector<double> dist(static_cast<std::size_t>(nx) * ny, 1e300);
    auto cell_of = [&](Vec3 p) {
        return std::pair<int, int>{static_cast<int>(std::lround((p.x - x0) / res)),
                                   static_cast<int>(std::lround((p.y - y0) / res))};
    };
    const auto [si, sj] = cell_of(s);
    const auto [gi, gj] = cell_of(g);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
    dist[id(si, sj)] = 0;
    q.emplace(0, id(si, sj));
    const int moves[16][2] = {{1, 0},  {-1, 0}, {0, 1},  {0, -1}, {1, 1},  {1, -1}, {-1, 1}, {-1, -1},
                              {2, 1},  {2, -1}, {-2, 1}, {-2, -1}, {1, 2}, {1, -2}, {-1, 2}, {-1, -2}};
    while (!q.empty()) {
        auto [d, c] = q.top();
        q.pop();
        if (d > dist[c]) continue;
        const int i = c % nx, j = c / nx;
        if (i == gi && j == gj) return d;
        for (const auto& m : moves) {
            const int ni = i + m[0], nj = j + m[1];
            if (ni < 0 || nj < 0 || ni >= nx || nj >= ny) continue;
            const double mx = x0 + (i + 0.5 * m[0]) * res, my = y0 + (j + 0.5 * m[1]) * res;
            if (blocked(x0 + ni * res, y0 + nj * res) || blocked(mx, my)) continue;
            const double nd = d + res * std::hypot(m[0], m[1]);
            if (nd < dist[id(ni, nj)]) {
                dist[id(ni, nj)] = nd;
                q.emplace(nd, id(ni, nj));
            }
        }
    }
    return 1e300;
}

}  // namespace

TEST_CASE("apply_action examples") {
    const CityWorld w = empty_world();
    const MotionConfig cfg;

    SUBCASE("move_forth at yaw 0 moves 10 m along +x") {
        const auto r = apply_action(make_pose({0, 0, 50}, 0), Action::move_forth, w, cfg);
        CHECK_FALSE(r.blocked);
        CHECK(r.pose.position == Vec3{10, 0, 50});
    }
    SUBCASE("turn_left adds 22.5 degrees") {
        const auto r = apply_action(make_pose({0, 0, 50}, 0), Action::turn_left, w, cfg);
        CHECK(r.pose.yaw == doctest::Approx(22.5));
        CHECK(apply_action(make_pose({0, 0, 50}, 0), Action::turn_right, w, cfg).pose.yaw == doctest::Approx(337.5));
    }
    SUBCASE("gimbal_up at 0 clamps without blocking") {
        const auto r = apply_action(make_pose({0, 0, 50}, 0, 0), Action::gimbal_up, w, cfg);
        CHECK_FALSE(r.blocked);
        CHECK(r.pose.gimbal == 0.0);
        CHECK(apply_action(make_pose({0, 0, 50}, 0, -90), Action::gimbal_down, w, cfg).pose.gimbal == -90.0);
    }
    SUBCASE("building face at x=5 blocks move_forth and leaves the pose unchanged") {
        CityWorld b = w;
        b.buildings.push_back({{{5, -20, 0}, {30, 20, 100}}, "block"});
        const AgentPose p = make_pose({0, 0, 50}, 0);
        const auto r = apply_action(p, Action::move_forth, b, cfg);
        CHECK(r.blocked);
        CHECK(r.pose == p);
    }
    SUBCASE("left is heading + 90 degrees") {
        const auto r = apply_action(make_pose({0, 0, 50}, 0), Action::move_left, w, cfg);
        CHECK(r.pose.position.x == doctest::Approx(0.0));
        CHECK(r.pose.position.y == doctest::Approx(10.0));
    }
    SUBCASE("descending below z_min is blocked") {
        const AgentPose p = make_pose({0, 0, 5}, 0);
        const auto r = apply_action(p, Action::move_down, w, cfg);
        CHECK(r.blocked);
        CHECK(r.pose == p);
    }
    SUBCASE("leaving the bounds is blocked") {
        const AgentPose p = make_pose({495, 0, 50}, 0);
        CHECK(apply_action(p, Action::move_forth, w, cfg).blocked);
    }
}

TEST_CASE("distance_to_goal examples") {
    CHECK(distance_to_goal(make_pose({0, 0, 0}, 0), {3, 4, 0}) == doctest::Approx(5.0));
    CHECK(distance_to_goal(make_pose({7, 8, 9}, 0), {7, 8, 9}) == 0.0);
    CHECK(distance_to_goal(make_pose({1, 1, 1}, 0), {1, 1, 11}) == doctest::Approx(10.0));
}

TEST_CASE("inverse actions and yaw closure over random poses") {
    const CityWorld w = empty_world();
    MotionConfig cfg;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> xy(-400, 400), z(20, 180), yaw(0, 360);
    const std::pair<Action, Action> pairs[] = {{Action::move_forth, Action::move_back},
                                               {Action::move_left, Action::move_right},
                                               {Action::move_up, Action::move_down},
                                               {Action::turn_left, Action::turn_right}};
    for (int n = 0; n < 2000; ++n) {
        const AgentPose p = make_pose({xy(rng), xy(rng), z(rng)}, yaw(rng), -45.0);
        for (auto [a, b] : pairs) {
            const auto q = apply_action(apply_action(p, a, w, cfg).pose, b, w, cfg).pose;
            REQUIRE(q.position == p.position);
            REQUIRE(std::abs(angle_difference(q.yaw, p.yaw)) < 1e-9);
            const auto r = apply_action(apply_action(p, b, w, cfg).pose, a, w, cfg).pose;
            REQUIRE(r.position == p.position);
        }
        const auto g = apply_action(apply_action(p, Action::gimbal_up, w, cfg).pose, Action::gimbal_down, w, cfg).pose;
        REQUIRE(g.gimbal == p.gimbal);
    }
    cfg.turn_step = 90.0;
    for (int n = 0; n < 500; ++n) {
        AgentPose p = make_pose({xy(rng), xy(rng), z(rng)}, yaw(rng));
        AgentPose q = p;
        for (int i = 0; i < 4; ++i) q = apply_action(q, Action::turn_left, w, cfg).pose;
        REQUIRE(std::abs(angle_difference(q.yaw, p.yaw)) < 1e-9);
    }
}

TEST_CASE("unblocked translations move exactly one step") {
    const CityWorld w = empty_world();
    const MotionConfig cfg;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> xy(-300, 300), yaw(0, 360);
    for (int n = 0; n < 500; ++n) {
        const AgentPose p = make_pose({xy(rng), xy(rng), 60}, yaw(rng));
        for (Action a : {Action::move_forth, Action::move_back, Action::move_left, Action::move_right}) {
            const auto r = apply_action(p, a, w, cfg);
            REQUIRE_FALSE(r.blocked);
            REQUIRE(distance(r.pose.position, p.position) == doctest::Approx(10.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("shortest_path") {
    const MotionConfig cfg;
    SUBCASE("open space is a straight line") {
        const auto r = shortest_path(empty_world(), {0, 0, 50}, {100, 0, 50}, cfg);
        CHECK(r.length == doctest::Approx(100.0).epsilon(0.05));
        CHECK(r.path.front() == Vec3{0, 0, 50});
        CHECK(r.path.back() == Vec3{100, 0, 50});
    }
    SUBCASE("full-height wall forces a detour matching the fine-grid oracle") {
        CityWorld w = empty_world();
        w.bounds = {{-100, -150, 0}, {200, 150, 120}};
        w.buildings.push_back({{{45, -30, 0}, {55, 30, 120}}, "wall"});
        const Vec3 s{0, 0, 50}, g{100, 0, 50};
        const auto r = shortest_path(w, s, g, cfg);
        const double oracle = fine_grid_length(w, s, g, cfg.safety_radius, 0.5);
        // Taut string around the inflated corners (44, +-31) and (56, +-31).
        const double taut = 2 * std::hypot(44.0, 31.0) + 12.0;
        CHECK(oracle == doctest::Approx(taut).epsilon(0.03));
        CHECK(r.length == doctest::Approx(oracle).epsilon(0.05));
        CHECK(r.length >= distance(s, g));
        for (std::size_t i = 0; i + 1 < r.path.size(); ++i) CHECK(segment_free(w, r.path[i], r.path[i + 1], 1.0));
    }
    SUBCASE("goal inside a building has no path") {
        CityWorld w = empty_world();
        w.buildings.push_back({{{40, -10, 0}, {60, 10, 80}}, "tower"});
        CHECK_THROWS_AS(shortest_path(w, {0, 0, 50}, {50, 0, 40}, cfg), NoPathError);
    }
    SUBCASE("adding a building never shortens the path") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> cx(20, 80), cy(-40, 40), half(3, 15), h(20, 110);
        CityWorld w = empty_world();
        w.bounds = {{-60, -120, 0}, {160, 120, 120}};
        const Vec3 s{0, 0, 30}, g{100, 0, 30};
        double prev = shortest_path(w, s, g, cfg).length;
        int inserted = 0;
        for (int tries = 0; tries < 40 && inserted < 8; ++tries) {
            const double x = cx(rng), y = cy(rng), hx = half(rng), hy = half(rng);
            CityWorld next = w;
            next.buildings.push_back({{{x - hx, y - hy, 0}, {x + hx, y + hy, h(rng)}}, "b" + std::to_string(tries)});
            if (!position_free(next, s, 1.0) || !position_free(next, g, 1.0)) continue;
            double len;
            try {
                len = shortest_path(next, s, g, cfg).length;
            } catch (const NoPathError&) {
                continue;
            }
            CHECK(len >= prev - 1e-6);
            prev = len;
            w = next;
            ++inserted;
        }
        CHECK(inserted >= 4);
    }
}

TEST_CASE("world validation rejects duplicate labels and landmarks outside bounds") {
    CityWorld w = empty_world();
    w.buildings.push_back({{{0, 0, 0}, {10, 10, 10}}, "a"});
    w.landmarks.push_back({{0, 0, 20}, "a", std::nullopt});
    CHECK_THROWS_AS(w.validate(), Error);
    w.landmarks[0].label = "b";
    w.validate();
    w.landmarks[0].position = {0, 0, 900};
    CHECK_THROWS_AS(w.validate(), Error);
}
