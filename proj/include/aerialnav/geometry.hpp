#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>

namespace aerialnav {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr bool operator==(const Vec3&) const = default;

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

inline Vec3 normalized(const Vec3& v) {
    const double n = norm(v);
    return n > 0.0 ? v * (1.0 / n) : v;
}

constexpr double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
constexpr double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

/// Wraps an angle in degrees to [0, 360).
inline double wrap_degrees(double deg) {
    double w = std::fmod(deg, 360.0);
    if (w < 0.0) w += 360.0;
    if (w >= 360.0) w = 0.0;  // fmod of tiny negatives can round up to 360
    return w;
}

/// Signed smallest difference a - b in degrees, in (-180, 180].
inline double angle_difference(double a, double b) {
    double d = wrap_degrees(a - b);
    return d > 180.0 ? d - 360.0 : d;
}

/// Axis-aligned box, closed set [lo, hi].
struct Aabb {
    Vec3 lo;
    Vec3 hi;

    Vec3 center() const { return (lo + hi) * 0.5; }
    Vec3 extent() const { return hi - lo; }
    bool contains(const Vec3& p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
    }
    /// Strict interior test; points on the surface are outside.
    bool contains_strict(const Vec3& p) const {
        return p.x > lo.x && p.x < hi.x && p.y > lo.y && p.y < hi.y && p.z > lo.z && p.z < hi.z;
    }
    Aabb inflated(double r) const { return {lo - Vec3{r, r, r}, hi + Vec3{r, r, r}}; }
    bool overlaps(const Aabb& o) const {
        return lo.x <= o.hi.x && hi.x >= o.lo.x && lo.y <= o.hi.y && hi.y >= o.lo.y && lo.z <= o.hi.z &&
               hi.z >= o.lo.z;
    }
    bool operator==(const Aabb&) const = default;
};

/// Parametric entry/exit of the segment a + t (b - a), t in [0, 1], through the box.
/// Empty when the segment misses the box.
struct SegmentHit {
    double t_enter;
    double t_exit;
};

inline std::optional<SegmentHit> clip_segment(const Aabb& box, const Vec3& a, const Vec3& b) {
    const Vec3 d = b - a;
    double t0 = 0.0;
    double t1 = 1.0;
    for (int axis = 0; axis < 3; ++axis) {
        const double da = d[axis];
        const double lo = box.lo[axis];
        const double hi = box.hi[axis];
        if (da == 0.0) {
            if (a[axis] < lo || a[axis] > hi) return std::nullopt;
            continue;
        }
        double ta = (lo - a[axis]) / da;
        double tb = (hi - a[axis]) / da;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) return std::nullopt;
    }
    return SegmentHit{t0, t1};
}

/// True when the open segment passes through the box interior (grazing contact with
/// the surface does not count).
inline bool segment_enters_interior(const Aabb& box, const Vec3& a, const Vec3& b) {
    auto hit = clip_segment(box, a, b);
    if (!hit) return false;
    if (hit->t_exit - hit->t_enter <= 1e-12) {
        // Single-point contact; inside only if that point is strictly interior.
        return box.contains_strict(a + (b - a) * hit->t_enter);
    }
    const Vec3 mid = a + (b - a) * (0.5 * (hit->t_enter + hit->t_exit));
    return box.contains_strict(mid);
}

}  // namespace aerialnav
