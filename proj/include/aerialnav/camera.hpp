#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "aerialnav/world.hpp"

namespace aerialnav {

struct CameraIntrinsics {
    int width = 560;
    int height = 560;
    double horizontal_fov = 90.0;

    double focal_px() const;
    double cx() const { return width / 2.0; }
    double cy() const { return height / 2.0; }
};

/// Orientation used for rendering. Unlike AgentPose, pitch may reach +90 for the
/// transient "up" probe view.
struct CameraPose {
    Vec3 position;
    double yaw = 0.0;
    double pitch = 0.0;

    static CameraPose from(const AgentPose& p) { return {p.position, p.yaw, p.gimbal}; }
};

/// Right-handed camera basis: forward along the optical axis, right matching +u,
/// up matching -v.
struct CameraFrame {
    Vec3 origin;
    Vec3 forward;
    Vec3 right;
    Vec3 up;

    explicit CameraFrame(const CameraPose& pose);

    Vec3 to_camera(const Vec3& world_point) const;  // (x right, y up, z forward)
    Vec3 to_world(const Vec3& camera_point) const;
};

struct Pixel {
    double u = 0.0;
    double v = 0.0;
};

/// Projects a world point; empty when it lies behind the image plane.
std::optional<Pixel> project(const CameraFrame& frame, const CameraIntrinsics& intr, const Vec3& world_point);

/// Inverse of project for a point at the given forward depth (camera z).
Vec3 unproject(const CameraFrame& frame, const CameraIntrinsics& intr, Pixel px, double forward_depth);

/// Point lies in front of the camera and its projection falls within the image.
bool in_frustum(const CameraFrame& frame, const CameraIntrinsics& intr, const Vec3& world_point);

enum class EntityKind { landmark, facade };

struct ObservedEntity {
    std::string label;
    EntityKind kind = EntityKind::landmark;
    std::string owner;                  // building label for facades and parented landmarks
    std::array<double, 4> box{};        // u_min, v_min, u_max, v_max
    double depth = 0.0;                 // euclidean range to the entity centre
    double occluded_fraction = 0.0;
    Vec3 center;

    Pixel box_center() const { return {(box[0] + box[2]) / 2.0, (box[1] + box[3]) / 2.0}; }
};

struct SemanticObservation {
    AgentPose camera_pose;
    double camera_pitch = 0.0;  // equals camera_pose.gimbal except for probe views
    std::vector<ObservedEntity> entities;
    int timestamp = 0;
};

/// A renderable thing in the world: its centre, nine occlusion samples and image
/// footprint geometry.
struct EntityGeometry {
    std::string label;
    EntityKind kind = EntityKind::landmark;
    std::string owner;
    Vec3 center;
    std::array<Vec3, 9> samples;
    std::vector<std::array<Vec3, 2>> edges;
    std::optional<std::size_t> building;  // owning building index for facades
    Vec3 outward{};                       // facade normal (zero for landmarks)
};

/// Every landmark cube and every building face except the ground-level bottom face.
std::vector<EntityGeometry> world_entities(const CityWorld& world);

/// True when the point at parameter 1 of segment (eye -> target) is hidden by a
/// building in front of it.
bool occluded(const CityWorld& world, const Vec3& eye, const Vec3& target);

SemanticObservation render(const CityWorld& world, const AgentPose& pose, const CameraIntrinsics& intr = {});
SemanticObservation render(const CityWorld& world, const CameraPose& camera, const AgentPose& agent,
                           const CameraIntrinsics& intr = {});

struct TaggedView {
    std::string tag;
    SemanticObservation observation;
};

struct ViewSet {
    std::vector<TaggedView> views;

    const SemanticObservation* find(std::string_view tag) const;
};

/// Six sensor sweeps (front, left, back, right at pitch 0; up at +90; down at -90).
/// The agent pose is untouched.
ViewSet probe_views(const CityWorld& world, const AgentPose& pose, const CameraIntrinsics& intr = {});

/// Six views at 60 degree yaw spacing with the current gimbal.
ViewSet panorama(const CityWorld& world, const AgentPose& pose, const CameraIntrinsics& intr = {});

inline constexpr double kOverlapMaxRange = 200.0;

/// Fraction of pose_a's sampled view anchors that pose_b also sees.
double fov_overlap(const CityWorld& world, const AgentPose& pose_a, const AgentPose& pose_b,
                   const CameraIntrinsics& intr = {}, int samples = 256);

/// One line per entity: "label @ bearing X°, elevation Y°, distance Z m, box [u0,v0,u1,v1]".
/// Bearing is positive to the right of the optical axis, elevation positive upward.
std::string describe(const SemanticObservation& obs);

/// Schematic first-person drawing of the entity boxes for the UI.
std::string schematic_svg(const SemanticObservation& obs, const CameraIntrinsics& intr = {});

}  // namespace aerialnav
