#include "aerialnav/camera.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace aerialnav {

namespace {

constexpr double kNearPlane = 0.05;
constexpr double kSurfaceEps = 1e-7;

std::string fmt_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string s = buf;
    if (s == "-0" || s.rfind("-0.", 0) == 0) {
        bool all_zero = s.find_first_not_of("-0.") == std::string::npos;
        if (all_zero) s.erase(0, 1);
    }
    return s;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct FaceSpec {
    const char* name;
    int axis;
    bool positive;
};

constexpr std::array<FaceSpec, 5> kFaces = {{
    {"east face", 0, true},
    {"west face", 0, false},
    {"north face", 1, true},
    {"south face", 1, false},
    {"roof", 2, true},
}};

}  // namespace

double CameraIntrinsics::focal_px() const { return (width / 2.0) / std::tan(deg2rad(horizontal_fov / 2.0)); }

CameraFrame::CameraFrame(const CameraPose& pose) : origin(pose.position) {
    const double yaw = deg2rad(pose.yaw);
    const double pitch = deg2rad(pose.pitch);
    forward = {std::cos(pitch) * std::cos(yaw), std::cos(pitch) * std::sin(yaw), std::sin(pitch)};
    right = {std::sin(yaw), -std::cos(yaw), 0.0};
    up = cross(right, forward);
}

Vec3 CameraFrame::to_camera(const Vec3& p) const {
    const Vec3 d = p - origin;
    return {dot(d, right), dot(d, up), dot(d, forward)};
}

Vec3 CameraFrame::to_world(const Vec3& c) const { return origin + right * c.x + up * c.y + forward * c.z; }

std::optional<Pixel> project(const CameraFrame& frame, const CameraIntrinsics& intr, const Vec3& p) {
    const Vec3 c = frame.to_camera(p);
    if (c.z <= 0.0) return std::nullopt;
    const double f = intr.focal_px();
    return Pixel{intr.cx() + f * c.x / c.z, intr.cy() - f * c.y / c.z};
}

Vec3 unproject(const CameraFrame& frame, const CameraIntrinsics& intr, Pixel px, double forward_depth) {
    const double f = intr.focal_px();
    const double x = (px.u - intr.cx()) * forward_depth / f;
    const double y = (intr.cy() - px.v) * forward_depth / f;
    return frame.to_world({x, y, forward_depth});
}

bool in_frustum(const CameraFrame& frame, const CameraIntrinsics& intr, const Vec3& p) {
    const Vec3 c = frame.to_camera(p);
    if (c.z <= 0.0) return false;
    const double f = intr.focal_px();
    const double u = intr.cx() + f * c.x / c.z;
    const double v = intr.cy() - f * c.y / c.z;
    return u >= 0.0 && u <= intr.width && v >= 0.0 && v <= intr.height;
}

std::vector<EntityGeometry> world_entities(const CityWorld& world) {
    std::vector<EntityGeometry> out;
    out.reserve(world.landmarks.size() + 5 * world.buildings.size());

    const double h = kLandmarkHalfSize;
    for (const auto& lm : world.landmarks) {
        EntityGeometry g;
        g.label = lm.label;
        g.kind = EntityKind::landmark;
        if (lm.parent) g.owner = world.buildings[*lm.parent].label;
        g.center = lm.position;
        g.samples[0] = lm.position;
        std::array<Vec3, 8> corners;
        for (int c = 0; c < 8; ++c) {
            corners[c] = lm.position + Vec3{(c & 1) ? h : -h, (c & 2) ? h : -h, (c & 4) ? h : -h};
            g.samples[c + 1] = corners[c];
        }
        for (int a = 0; a < 8; ++a)
            for (int bit : {1, 2, 4})
                if (!(a & bit)) g.edges.push_back({corners[a], corners[a | bit]});
        out.push_back(std::move(g));
    }

    for (std::size_t bi = 0; bi < world.buildings.size(); ++bi) {
        const auto& b = world.buildings[bi];
        for (const auto& face : kFaces) {
            EntityGeometry g;
            g.label = b.label + " " + face.name;
            g.kind = EntityKind::facade;
            g.owner = b.label;
            g.building = bi;
            const int ax = face.axis;
            const int a1 = (ax + 1) % 3;
            const int a2 = (ax + 2) % 3;
            const double plane = face.positive ? b.box.hi[ax] : b.box.lo[ax];
            Vec3 outward{};
            outward[ax] = face.positive ? 1.0 : -1.0;
            g.outward = outward;
            auto at = [&](double s, double t) {
                Vec3 p{};
                p[ax] = plane;
                p[a1] = b.box.lo[a1] + s * (b.box.hi[a1] - b.box.lo[a1]);
                p[a2] = b.box.lo[a2] + t * (b.box.hi[a2] - b.box.lo[a2]);
                return p;
            };
            g.center = at(0.5, 0.5);
            int n = 0;
            for (double s : {0.0, 0.5, 1.0})
                for (double t : {0.0, 0.5, 1.0}) g.samples[n++] = at(s, t);
            const std::array<Vec3, 4> quad = {at(0, 0), at(1, 0), at(1, 1), at(0, 1)};
            for (int e = 0; e < 4; ++e) g.edges.push_back({quad[e], quad[(e + 1) % 4]});
            out.push_back(std::move(g));
        }
    }
    return out;
}

bool occluded(const CityWorld& world, const Vec3& eye, const Vec3& target) {
    for (const auto& b : world.buildings) {
        auto hit = clip_segment(b.box, eye, target);
        if (!hit || hit->t_exit - hit->t_enter <= 1e-12) continue;
        // Entering strictly before reaching the target means something is in front;
        // a target on the box surface is reached at t_enter == 1.
        const double len = norm(target - eye);
        if (hit->t_enter * len < len - kSurfaceEps * std::max(1.0, len)) {
            // A segment that only runs inside the surface plane of the target's own face
            // is not an occluder; require real penetration of the interior.
            const Vec3 mid = eye + (target - eye) * (0.5 * (hit->t_enter + std::min(hit->t_exit, 1.0)));
            if (b.box.contains_strict(mid)) return true;
        }
    }
    return false;
}

namespace {

/// Bounding box of the visible (near-plane clipped) footprint of an entity.
std::optional<std::array<double, 4>> footprint(const CameraFrame& frame, const CameraIntrinsics& intr,
                                               const EntityGeometry& g) {
    const double f = intr.focal_px();
    double u0 = 1e300, v0 = 1e300, u1 = -1e300, v1 = -1e300;
    bool any = false;
    auto add = [&](const Vec3& c) {
        const double u = intr.cx() + f * c.x / c.z;
        const double v = intr.cy() - f * c.y / c.z;
        u0 = std::min(u0, u);
        v0 = std::min(v0, v);
        u1 = std::max(u1, u);
        v1 = std::max(v1, v);
        any = true;
    };
    for (const auto& e : g.edges) {
        const Vec3 a = frame.to_camera(e[0]);
        const Vec3 b = frame.to_camera(e[1]);
        const bool ina = a.z >= kNearPlane;
        const bool inb = b.z >= kNearPlane;
        if (ina) add(a);
        if (inb) add(b);
        if (ina != inb) {
            const double t = (kNearPlane - a.z) / (b.z - a.z);
            add(a + (b - a) * t);
        }
    }
    if (!any) return std::nullopt;
    const double W = intr.width, H = intr.height;
    return std::array<double, 4>{std::clamp(u0, 0.0, W), std::clamp(v0, 0.0, H), std::clamp(u1, 0.0, W),
                                 std::clamp(v1, 0.0, H)};
}

}  // namespace

SemanticObservation render(const CityWorld& world, const CameraPose& camera, const AgentPose& agent,
                           const CameraIntrinsics& intr) {
    SemanticObservation obs;
    obs.camera_pose = agent;
    obs.camera_pitch = camera.pitch;
    const CameraFrame frame(camera);

    for (auto& g : world_entities(world)) {
        if (!in_frustum(frame, intr, g.center)) continue;
        if (g.kind == EntityKind::facade && dot(camera.position - g.center, g.outward) <= 0.0) continue;
        int hidden = 0;
        for (const auto& s : g.samples) {
            if (occluded(world, camera.position, s)) ++hidden;
        }
        if (hidden == 9) continue;
        auto box = footprint(frame, intr, g);
        if (!box) continue;
        ObservedEntity e;
        e.label = std::move(g.label);
        e.kind = g.kind;
        e.owner = std::move(g.owner);
        e.box = *box;
        e.depth = distance(camera.position, g.center);
        e.occluded_fraction = hidden / 9.0;
        e.center = g.center;
        obs.entities.push_back(std::move(e));
    }
    std::sort(obs.entities.begin(), obs.entities.end(), [](const ObservedEntity& a, const ObservedEntity& b) {
        return a.depth != b.depth ? a.depth < b.depth : a.label < b.label;
    });
    return obs;
}

SemanticObservation render(const CityWorld& world, const AgentPose& pose, const CameraIntrinsics& intr) {
    return render(world, CameraPose::from(pose), pose, intr);
}

const SemanticObservation* ViewSet::find(std::string_view tag) const {
    for (const auto& v : views)
        if (v.tag == tag) return &v.observation;
    return nullptr;
}

ViewSet probe_views(const CityWorld& world, const AgentPose& pose, const CameraIntrinsics& intr) {
    struct Dir {
        const char* tag;
        double yaw_offset;
        double pitch;
    };
    constexpr std::array<Dir, 6> dirs = {{
        {"front", 0.0, 0.0},
        {"left", 90.0, 0.0},
        {"back", 180.0, 0.0},
        {"right", 270.0, 0.0},
        {"up", 0.0, 90.0},
        {"down", 0.0, -90.0},
    }};
    ViewSet set;
    for (const auto& d : dirs) {
        const CameraPose cam{pose.position, wrap_degrees(pose.yaw + d.yaw_offset), d.pitch};
        set.views.push_back({d.tag, render(world, cam, pose, intr)});
    }
    return set;
}

ViewSet panorama(const CityWorld& world, const AgentPose& pose, const CameraIntrinsics& intr) {
    ViewSet set;
    for (int i = 0; i < 6; ++i) {
        const double offset = 60.0 * i;
        const CameraPose cam{pose.position, wrap_degrees(pose.yaw + offset), pose.gimbal};
        set.views.push_back({"yaw+" + std::to_string(static_cast<int>(offset)), render(world, cam, pose, intr)});
    }
    return set;
}

double fov_overlap(const CityWorld& world, const AgentPose& pose_a, const AgentPose& pose_b,
                   const CameraIntrinsics& intr, int samples) {
    samples = std::max(1, samples);
    const CameraFrame fa(CameraPose::from(pose_a));
    const CameraFrame fb(CameraPose::from(pose_b));
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(samples))));
    const int rows = (samples + cols - 1) / cols;

    int seen = 0;
    int n = 0;
    for (int r = 0; r < rows && n < samples; ++r) {
        for (int c = 0; c < cols && n < samples; ++c, ++n) {
            const Pixel px{(c + 0.5) * intr.width / cols, (r + 0.5) * intr.height / rows};
            const Vec3 dir = normalized(unproject(fa, intr, px, 1.0) - fa.origin);
            const Vec3 far = fa.origin + dir * kOverlapMaxRange;
            Vec3 anchor = far;
            if (auto t = world.first_hit(fa.origin, far)) anchor = fa.origin + (far - fa.origin) * *t;
            if (in_frustum(fb, intr, anchor) && !occluded(world, fb.origin, anchor)) ++seen;
        }
    }
    return static_cast<double>(seen) / samples;
}

std::string describe(const SemanticObservation& obs) {
    if (obs.entities.empty()) return "(nothing recognisable in view)\n";
    const CameraFrame frame(CameraPose{obs.camera_pose.position, obs.camera_pose.yaw, obs.camera_pitch});
    std::ostringstream os;
    for (const auto& e : obs.entities) {
        const Vec3 c = frame.to_camera(e.center);
        const double bearing = rad2deg(std::atan2(c.x, c.z));
        const double elevation = rad2deg(std::atan2(c.y, std::hypot(c.x, c.z)));
        os << e.label << " @ bearing " << fmt_fixed(bearing, 1) << "°, elevation " << fmt_fixed(elevation, 1)
           << "°, distance " << fmt_fixed(e.depth, 1) << " m, box [" << fmt_fixed(e.box[0], 0) << ","
           << fmt_fixed(e.box[1], 0) << "," << fmt_fixed(e.box[2], 0) << "," << fmt_fixed(e.box[3], 0) << "]\n";
    }
    return os.str();
}

std::string schematic_svg(const SemanticObservation& obs, const CameraIntrinsics& intr) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << intr.width << "\" height=\"" << intr.height
       << "\" viewBox=\"0 0 " << intr.width << " " << intr.height << "\">";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"#dfe9f3\"/>";
    // Painter's order: far entities first.
    for (auto it = obs.entities.rbegin(); it != obs.entities.rend(); ++it) {
        const auto& e = *it;
        const char* fill = e.kind == EntityKind::landmark ? "#e4572e" : "#8d99ae";
        os << "<rect x=\"" << fmt_fixed(e.box[0], 1) << "\" y=\"" << fmt_fixed(e.box[1], 1) << "\" width=\""
           << fmt_fixed(e.box[2] - e.box[0], 1) << "\" height=\"" << fmt_fixed(e.box[3] - e.box[1], 1)
           << "\" fill=\"" << fill << "\" fill-opacity=\"" << fmt_fixed(1.0 - 0.6 * e.occluded_fraction, 2)
           << "\" stroke=\"#2b2d42\"/>";
        if (e.kind == EntityKind::landmark) {
            os << "<text x=\"" << fmt_fixed(e.box[0], 1) << "\" y=\"" << fmt_fixed(std::max(12.0, e.box[1] - 3), 1)
               << "\" font-size=\"12\">" << xml_escape(e.label) << "</text>";
        }
    }
    const double cx = intr.cx(), cy = intr.cy();
    os << "<line x1=\"" << cx - 10 << "\" y1=\"" << cy << "\" x2=\"" << cx + 10 << "\" y2=\"" << cy
       << "\" stroke=\"#000\"/><line x1=\"" << cx << "\" y1=\"" << cy - 10 << "\" x2=\"" << cx << "\" y2=\""
       << cy + 10 << "\" stroke=\"#000\"/>";
    os << "</svg>";
    return os.str();
}

}  // namespace aerialnav
