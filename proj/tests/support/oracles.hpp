#pragma once
// Independent reference implementations used as test oracles. Nothing here calls the
// library's geometry kernels (clip_segment, occluded, CameraFrame, project).

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "aerialnav/camera.hpp"
#include "aerialnav/world.hpp"

namespace oracle {

using aerialnav::Aabb;
using aerialnav::CityWorld;
using aerialnav::Vec3;

constexpr double kPi = 3.14159265358979323846;

struct Basis {
    Vec3 f, r, u;
};

inline Basis camera_basis(double yaw_deg, double pitch_deg) {
    const double y = yaw_deg * kPi / 180.0, p = pitch_deg * kPi / 180.0;
    Basis b;
    b.f = {std::cos(p) * std::cos(y), std::cos(p) * std::sin(y), std::sin(p)};
    b.r = {std::sin(y), -std::cos(y), 0.0};
    b.u = {b.r.y * b.f.z - b.r.z * b.f.y, b.r.z * b.f.x - b.r.x * b.f.z, b.r.x * b.f.y - b.r.y * b.f.x};
    return b;
}

inline double dot3(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

/// Square 90-degree frustum: |x| <= z and |y| <= z in camera coordinates.
inline bool in_view(const Vec3& eye, const Basis& b, const Vec3& p, double half_fov_deg = 45.0) {
    const Vec3 d{p.x - eye.x, p.y - eye.y, p.z - eye.z};
    const double z = dot3(d, b.f);
    if (z <= 1e-9) return false;
    const double t = std::tan(half_fov_deg * kPi / 180.0);
    return std::abs(dot3(d, b.r)) <= t * z && std::abs(dot3(d, b.u)) <= t * z;
}

inline bool strictly_inside(const Aabb& box, const Vec3& p, double margin = 1e-7) {
    return p.x > box.lo.x + margin && p.x < box.hi.x - margin && p.y > box.lo.y + margin &&
           p.y < box.hi.y - margin && p.z > box.lo.z + margin && p.z < box.hi.z - margin;
}

/// Walks the segment in fixed steps and reports whether any step lands inside a
/// building before the target.
inline bool ray_march_blocked(const CityWorld& w, const Vec3& eye, const Vec3& target, double step = 0.05) {
    const Vec3 d{target.x - eye.x, target.y - eye.y, target.z - eye.z};
    const double len = std::sqrt(dot3(d, d));
    const int n = static_cast<int>(len / step);
    for (int i = 1; i < n; ++i) {
        const double t = i * step / len;
        const Vec3 p{eye.x + d.x * t, eye.y + d.y * t, eye.z + d.z * t};
        for (const auto& b : w.buildings)
            if (strictly_inside(b.box, p)) return true;
    }
    return false;
}

struct OracleEntity {
    std::string label;
    Vec3 center;
    std::vector<Vec3> samples;
    Vec3 outward;  // zero for landmarks
};

/// Landmark cubes (centre + 8 corners) and the five exposed faces of each building
/// (3x3 sample grid), enumerated from scratch.
inline std::vector<OracleEntity> entities(const CityWorld& w) {
    std::vector<OracleEntity> out;
    for (const auto& lm : w.landmarks) {
        OracleEntity e{lm.label, lm.position, {lm.position}, {0, 0, 0}};
        for (double dx : {-1.0, 1.0})
            for (double dy : {-1.0, 1.0})
                for (double dz : {-1.0, 1.0})
                    e.samples.push_back({lm.position.x + dx, lm.position.y + dy, lm.position.z + dz});
        out.push_back(e);
    }
    for (const auto& b : w.buildings) {
        const Vec3 lo = b.box.lo, hi = b.box.hi;
        auto lerp = [](double a, double c, double s) { return a + (c - a) * s; };
        struct Face {
            const char* name;
            Vec3 normal;
        };
        const Face faces[] = {{"east face", {1, 0, 0}}, {"west face", {-1, 0, 0}}, {"north face", {0, 1, 0}},
                              {"south face", {0, -1, 0}}, {"roof", {0, 0, 1}}};
        for (const auto& f : faces) {
            OracleEntity e;
            e.label = b.label + " " + f.name;
            e.outward = f.normal;
            for (double s : {0.0, 0.5, 1.0}) {
                for (double t : {0.0, 0.5, 1.0}) {
                    Vec3 p;
                    if (f.normal.x != 0) p = {f.normal.x > 0 ? hi.x : lo.x, lerp(lo.y, hi.y, s), lerp(lo.z, hi.z, t)};
                    else if (f.normal.y != 0) p = {lerp(lo.x, hi.x, s), f.normal.y > 0 ? hi.y : lo.y, lerp(lo.z, hi.z, t)};
                    else p = {lerp(lo.x, hi.x, s), lerp(lo.y, hi.y, t), hi.z};
                    e.samples.push_back(p);
                }
            }
            e.center = e.samples[4];
            out.push_back(e);
        }
    }
    return out;
}

/// Labels an ideal observer at (eye, yaw, pitch) would report.
inline std::set<std::string> visible_labels(const CityWorld& w, const Vec3& eye, double yaw, double pitch) {
    const Basis b = camera_basis(yaw, pitch);
    std::set<std::string> out;
    for (const auto& e : entities(w)) {
        if (!in_view(eye, b, e.center)) continue;
        const Vec3 to_eye{eye.x - e.center.x, eye.y - e.center.y, eye.z - e.center.z};
        if (dot3(e.outward, e.outward) > 0 && dot3(to_eye, e.outward) <= 0) continue;
        for (const auto& s : e.samples) {
            if (!ray_march_blocked(w, eye, s)) {
                out.insert(e.label);
                break;
            }
        }
    }
    return out;
}

struct RandomScene {
    CityWorld world;
    Vec3 eye;
    double yaw = 0.0;
    double pitch = 0.0;
};

/// A few boxes around the origin, free-floating landmarks and a camera in free space.
inline RandomScene random_scene(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> pos(-60, 60), half(3, 12), height(10, 50), yaw(0, 360), pitch(-90, 0),
        lz(3, 60);
    RandomScene s;
    s.world.bounds = {{-100, -100, 0}, {100, 100, 100}};
    const int nb = std::uniform_int_distribution<int>(2, 5)(rng);
    for (int i = 0; i < nb; ++i) {
        const double x = pos(rng), y = pos(rng), hx = half(rng), hy = half(rng);
        Aabb box{{x - hx, y - hy, 0}, {x + hx, y + hy, height(rng)}};
        bool clash = false;
        for (const auto& b : s.world.buildings) clash = clash || box.overlaps(b.box);
        if (!clash) s.world.buildings.push_back({box, "b" + std::to_string(i)});
    }
    auto free_point = [&](double margin) {
        for (;;) {
            const Vec3 p{pos(rng), pos(rng), lz(rng)};
            bool ok = true;
            for (const auto& b : s.world.buildings) ok = ok && !b.box.inflated(margin).contains(p);
            if (ok) return p;
        }
    };
    const int nl = std::uniform_int_distribution<int>(3, 8)(rng);
    for (int i = 0; i < nl; ++i) s.world.landmarks.push_back({free_point(1.5), "lm" + std::to_string(i), std::nullopt});
    s.eye = free_point(2.0);
    s.yaw = yaw(rng);
    s.pitch = pitch(rng);
    return s;
}

/// Dense estimate of the overlap between two camera orientations at the same
/// position in an empty world: fraction of pixel-uniform rays of A whose 200 m
/// anchor falls inside B's frustum.
inline double dense_overlap(double yaw_a, double pitch_a, double yaw_b, double pitch_b, int grid = 600) {
    const Basis a = camera_basis(yaw_a, pitch_a), b = camera_basis(yaw_b, pitch_b);
    const Vec3 eye{0, 0, 0};
    int seen = 0;
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            const double x = -1.0 + 2.0 * (i + 0.5) / grid, y = 1.0 - 2.0 * (j + 0.5) / grid;
            Vec3 d{a.f.x + x * a.r.x + y * a.u.x, a.f.y + x * a.r.y + y * a.u.y, a.f.z + x * a.r.z + y * a.u.z};
            const double n = std::sqrt(dot3(d, d));
            const Vec3 p{d.x / n * 200, d.y / n * 200, d.z / n * 200};
            if (in_view(eye, b, p)) ++seen;
        }
    }
    return static_cast<double>(seen) / (grid * grid);
}

}  // namespace oracle

namespace oracle {

/// Exhaustive suffix scan: tries every start index and checks the three CDB
/// conditions directly. Returns -1 when no index qualifies.
inline long cdb_suffix_scan(const std::vector<double>& d, bool failed, double tol = 0.0) {
    if (!failed) return -1;
    const std::size_t T = d.size() - 1;
    for (std::size_t t = 0; t < T; ++t) {
        bool monotone = true;
        for (std::size_t j = t; j < T; ++j) monotone = monotone && d[j + 1] >= d[j] - tol;
        if (monotone && d[T] > d[t] + tol) return static_cast<long>(t);
    }
    return -1;
}

}  // namespace oracle
