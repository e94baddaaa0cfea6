#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aerialnav/geometry.hpp"

namespace aerialnav {

/// Discrete commands. Order is canonical: translations, rotations, gimbal, then the
/// terminal `stop`.
enum class Action : std::uint8_t {
    move_forth,
    move_back,
    move_left,
    move_right,
    move_up,
    move_down,
    turn_left,
    turn_right,
    gimbal_up,
    gimbal_down,
    stop,
};

inline constexpr std::array<Action, 10> kMotionActions = {
    Action::move_forth, Action::move_back, Action::move_left,  Action::move_right, Action::move_up,
    Action::move_down,  Action::turn_left, Action::turn_right, Action::gimbal_up,  Action::gimbal_down,
};

enum class ActionCategory { horizontal, vertical, rotation };

std::string_view to_string(Action a);
std::optional<Action> action_from_name(std::string_view canonical);
ActionCategory category_of(Action a);

/// Position (x east, y north, z up; meters), yaw in [0, 360) counterclockwise from +x,
/// gimbal pitch in [-90, 0].
struct AgentPose {
    Vec3 position;
    double yaw = 0.0;
    double gimbal = 0.0;

    bool operator==(const AgentPose&) const = default;
};

/// Positions live on a dyadic lattice so that a translation followed by its inverse
/// is bit-exact.
inline constexpr double kPositionQuantum = 1.0 / 1048576.0;  // 2^-20 m

double snap_coordinate(double v);
Vec3 snap_position(const Vec3& p);

/// Canonical pose: snapped position, wrapped yaw, clamped gimbal.
AgentPose make_pose(const Vec3& position, double yaw_deg, double gimbal_deg = 0.0);

struct Building {
    Aabb box;
    std::string label;

    bool operator==(const Building&) const = default;
};

struct Landmark {
    Vec3 position;
    std::string label;
    std::optional<std::size_t> parent;  // index into CityWorld::buildings

    bool operator==(const Landmark&) const = default;
};

/// Half-size of the cube used to give point landmarks an image footprint.
inline constexpr double kLandmarkHalfSize = 1.0;

struct CityWorld {
    std::vector<Building> buildings;
    std::vector<Landmark> landmarks;
    Aabb bounds{{-500.0, -500.0, 0.0}, {500.0, 500.0, 200.0}};
    double z_min = 2.0;

    bool operator==(const CityWorld&) const = default;

    /// Throws aerialnav::Error when an invariant is violated.
    void validate() const;

    const Landmark* find_landmark(std::string_view label) const;
    const Building* find_building(std::string_view label) const;

    /// First building interior hit along the segment, as parametric t in [0, 1].
    std::optional<double> first_hit(const Vec3& a, const Vec3& b) const;
};

struct MotionConfig {
    double translation_step = 10.0;
    double vertical_step = 10.0;
    double turn_step = 22.5;
    double gimbal_step = 45.0;
    double safety_radius = 1.0;

    void validate() const;
};

struct StepResult {
    AgentPose pose;
    bool blocked = false;
};

/// Heading unit vector for a yaw in degrees (horizontal plane).
Vec3 heading_vector(double yaw_deg);

/// True when a point is a legal agent position: inside bounds, above z_min and
/// clear of every building inflated by the safety radius.
bool position_free(const CityWorld& world, const Vec3& p, double safety_radius);

/// True when the straight segment is a legal flight: both ends free and no inflated
/// building interior crossed.
bool segment_free(const CityWorld& world, const Vec3& a, const Vec3& b, double safety_radius);

/// The discrete dynamics. Precondition: action != stop.
StepResult apply_action(const AgentPose& pose, Action action, const CityWorld& world, const MotionConfig& cfg);

double distance_to_goal(const AgentPose& pose, const Vec3& goal);

struct PathResult {
    std::vector<Vec3> path;
    double length = 0.0;
};

/// Shortest collision-free polyline on a 26-connected voxel grid of resolution
/// translation_step / 2, string-pulled by line of sight. Throws NoPathError.
PathResult shortest_path(const CityWorld& world, const Vec3& start, const Vec3& goal, const MotionConfig& cfg);

/// Occupancy grid over the world bounds used by the path oracle.
class VoxelGrid {
public:
    VoxelGrid(const CityWorld& world, double resolution, double safety_radius);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nz() const { return nz_; }
    double resolution() const { return res_; }
    std::size_t size() const { return free_.size(); }

    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * ny_ + j) * nx_ + i;
    }
    std::array<int, 3> cell(std::size_t idx) const;
    Vec3 center(std::size_t idx) const;
    std::optional<std::size_t> cell_containing(const Vec3& p) const;
    bool free(std::size_t idx) const { return free_[idx] != 0; }

    /// Free cells near p (within `radius_cells` on every axis) connected to p by a
    /// legal segment, nearest first.
    std::vector<std::size_t> visible_cells_near(const Vec3& p, int radius_cells) const;

    struct Seed {
        std::size_t cell;
        double cost;
    };

    /// Multi-source Dijkstra over free cells with Euclidean edge costs; infinity where
    /// unreachable.
    std::vector<double> distances_from(const std::vector<Seed>& seeds) const;

    const CityWorld& world() const { return *world_; }
    double safety_radius() const { return safety_; }

private:
    const CityWorld* world_;
    double res_;
    double safety_;
    Vec3 origin_;
    int nx_ = 0;
    int ny_ = 0;
    int nz_ = 0;
    std::vector<std::uint8_t> free_;
};

/// Geodesic distance-to-goal field: exact Euclidean distance where the goal is in line
/// of sight, otherwise grid-geodesic through nearby free cells.
class PathField {
public:
    PathField(const CityWorld& world, const Vec3& goal, const MotionConfig& cfg);

    /// Remaining path distance from p; infinity when p cannot reach the goal.
    double remaining(const Vec3& p) const;

    /// Polyline from p to the goal by steepest descent over the field, not yet
    /// smoothed. Throws NoPathError when p cannot reach the goal.
    std::vector<Vec3> descend(const Vec3& p) const;

    const Vec3& goal() const { return goal_; }
    const VoxelGrid& grid() const { return grid_; }

private:
    VoxelGrid grid_;
    Vec3 goal_;
    double safety_;
    std::vector<double> dist_;
};

}  // namespace aerialnav
