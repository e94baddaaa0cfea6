#include "aerialnav/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "aerialnav/errors.hpp"

namespace aerialnav {

namespace {

constexpr std::array<std::string_view, 11> kActionNames = {
    "move_forth", "move_back", "move_left",  "move_right", "move_up",     "move_down",
    "turn_left",  "turn_right", "gimbal_up", "gimbal_down", "stop",
};

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::string_view to_string(Action a) { return kActionNames[static_cast<std::size_t>(a)]; }

std::optional<Action> action_from_name(std::string_view canonical) {
    for (std::size_t i = 0; i < kActionNames.size(); ++i) {
        if (kActionNames[i] == canonical) return static_cast<Action>(i);
    }
    return std::nullopt;
}

ActionCategory category_of(Action a) {
    switch (a) {
        case Action::move_forth:
        case Action::move_back:
        case Action::move_left:
        case Action::move_right:
            return ActionCategory::horizontal;
        case Action::move_up:
        case Action::move_down:
            return ActionCategory::vertical;
        default:
            return ActionCategory::rotation;
    }
}

double snap_coordinate(double v) { return std::round(v / kPositionQuantum) * kPositionQuantum; }

Vec3 snap_position(const Vec3& p) { return {snap_coordinate(p.x), snap_coordinate(p.y), snap_coordinate(p.z)}; }

AgentPose make_pose(const Vec3& position, double yaw_deg, double gimbal_deg) {
    return {snap_position(position), wrap_degrees(yaw_deg), std::clamp(gimbal_deg, -90.0, 0.0)};
}

void CityWorld::validate() const {
    const Vec3 ext = bounds.extent();
    if (!(ext.x > 0 && ext.y > 0 && ext.z > 0)) throw Error("world bounds must have positive volume");
    for (const auto& b : buildings) {
        const Vec3 e = b.box.extent();
        if (!(e.x > 0 && e.y > 0 && e.z > 0)) throw Error("building '" + b.label + "' has non-positive volume");
    }
    std::vector<std::string_view> labels;
    for (const auto& b : buildings) labels.push_back(b.label);
    for (const auto& l : landmarks) {
        if (!bounds.contains(l.position)) throw Error("landmark '" + l.label + "' lies outside world bounds");
        if (l.parent && *l.parent >= buildings.size()) throw Error("landmark '" + l.label + "' has a dangling parent");
        labels.push_back(l.label);
    }
    std::sort(labels.begin(), labels.end());
    if (auto it = std::adjacent_find(labels.begin(), labels.end()); it != labels.end()) {
        throw Error("duplicate label '" + std::string(*it) + "'");
    }
}

const Landmark* CityWorld::find_landmark(std::string_view label) const {
    for (const auto& l : landmarks)
        if (l.label == label) return &l;
    return nullptr;
}

const Building* CityWorld::find_building(std::string_view label) const {
    for (const auto& b : buildings)
        if (b.label == label) return &b;
    return nullptr;
}

std::optional<double> CityWorld::first_hit(const Vec3& a, const Vec3& b) const {
    std::optional<double> best;
    for (const auto& bld : buildings) {
        auto hit = clip_segment(bld.box, a, b);
        if (!hit || hit->t_exit - hit->t_enter <= 1e-12) continue;
        if (!best || hit->t_enter < *best) best = hit->t_enter;
    }
    return best;
}

void MotionConfig::validate() const {
    if (!(translation_step > 0 && vertical_step > 0 && turn_step > 0 && gimbal_step > 0 && safety_radius > 0)) {
        throw Error("motion magnitudes must be strictly positive");
    }
    const double ratio = 90.0 / gimbal_step;
    if (std::abs(ratio - std::round(ratio)) > 1e-9) throw Error("gimbal_step must divide 90");
}

Vec3 heading_vector(double yaw_deg) {
    const double r = deg2rad(yaw_deg);
    return {std::cos(r), std::sin(r), 0.0};
}

bool position_free(const CityWorld& world, const Vec3& p, double safety_radius) {
    if (!world.bounds.contains(p) || p.z < world.z_min) return false;
    for (const auto& b : world.buildings) {
        if (b.box.inflated(safety_radius).contains_strict(p)) return false;
    }
    return true;
}

bool segment_free(const CityWorld& world, const Vec3& a, const Vec3& b, double safety_radius) {
    if (!position_free(world, a, safety_radius) || !position_free(world, b, safety_radius)) return false;
    for (const auto& bld : world.buildings) {
        if (segment_enters_interior(bld.box.inflated(safety_radius), a, b)) return false;
    }
    return true;
}

StepResult apply_action(const AgentPose& pose, Action action, const CityWorld& world, const MotionConfig& cfg) {
    AgentPose next = pose;
    Vec3 displacement{};
    switch (action) {
        case Action::move_forth:
            displacement = snap_position(heading_vector(pose.yaw) * cfg.translation_step);
            break;
        case Action::move_back:
            displacement = -snap_position(heading_vector(pose.yaw) * cfg.translation_step);
            break;
        case Action::move_left:
            displacement = snap_position(heading_vector(pose.yaw + 90.0) * cfg.translation_step);
            break;
        case Action::move_right:
            displacement = -snap_position(heading_vector(pose.yaw + 90.0) * cfg.translation_step);
            break;
        case Action::move_up:
            displacement = {0.0, 0.0, snap_coordinate(cfg.vertical_step)};
            break;
        case Action::move_down:
            displacement = {0.0, 0.0, -snap_coordinate(cfg.vertical_step)};
            break;
        case Action::turn_left:
            next.yaw = wrap_degrees(pose.yaw + cfg.turn_step);
            return {next, false};
        case Action::turn_right:
            next.yaw = wrap_degrees(pose.yaw - cfg.turn_step);
            return {next, false};
        case Action::gimbal_up:
            next.gimbal = std::min(0.0, pose.gimbal + cfg.gimbal_step);
            return {next, false};
        case Action::gimbal_down:
            next.gimbal = std::max(-90.0, pose.gimbal - cfg.gimbal_step);
            return {next, false};
        case Action::stop:
            return {pose, false};
    }
    next.position = pose.position + displacement;
    if (!segment_free(world, pose.position, next.position, cfg.safety_radius)) return {pose, true};
    return {next, false};
}

double distance_to_goal(const AgentPose& pose, const Vec3& goal) { return distance(pose.position, goal); }

// ---------------------------------------------------------------------------
// Voxel grid

VoxelGrid::VoxelGrid(const CityWorld& world, double resolution, double safety_radius)
    : world_(&world), res_(resolution), safety_(safety_radius), origin_(world.bounds.lo) {
    const Vec3 ext = world.bounds.extent();
    nx_ = std::max(1, static_cast<int>(std::floor(ext.x / res_)));
    ny_ = std::max(1, static_cast<int>(std::floor(ext.y / res_)));
    nz_ = std::max(1, static_cast<int>(std::floor(ext.z / res_)));
    free_.assign(static_cast<std::size_t>(nx_) * ny_ * nz_, 1);

    for (int k = 0; k < nz_; ++k) {
        if (origin_.z + (k + 0.5) * res_ < world.z_min) {
            for (int j = 0; j < ny_; ++j)
                for (int i = 0; i < nx_; ++i) free_[index(i, j, k)] = 0;
        }
    }
    const double h = 0.5 * res_;
    for (const auto& b : world.buildings) {
        // Cells whose closed cube touches the inflated closed box are blocked.
        const Aabb box = b.box.inflated(safety_radius + h);
        auto lo_idx = [&](double v, double o, int n) {
            return std::clamp(static_cast<int>(std::ceil((v - o) / res_ - 0.5)), 0, n - 1);
        };
        auto hi_idx = [&](double v, double o, int n) {
            return std::clamp(static_cast<int>(std::floor((v - o) / res_ - 0.5)), -1, n - 1);
        };
        const int i0 = lo_idx(box.lo.x, origin_.x, nx_), i1 = hi_idx(box.hi.x, origin_.x, nx_);
        const int j0 = lo_idx(box.lo.y, origin_.y, ny_), j1 = hi_idx(box.hi.y, origin_.y, ny_);
        const int k0 = lo_idx(box.lo.z, origin_.z, nz_), k1 = hi_idx(box.hi.z, origin_.z, nz_);
        for (int k = k0; k <= k1; ++k)
            for (int j = j0; j <= j1; ++j)
                for (int i = i0; i <= i1; ++i) free_[index(i, j, k)] = 0;
    }
}

std::array<int, 3> VoxelGrid::cell(std::size_t idx) const {
    const int i = static_cast<int>(idx % nx_);
    const int j = static_cast<int>((idx / nx_) % ny_);
    const int k = static_cast<int>(idx / (static_cast<std::size_t>(nx_) * ny_));
    return {i, j, k};
}

Vec3 VoxelGrid::center(std::size_t idx) const {
    const auto [i, j, k] = cell(idx);
    return origin_ + Vec3{(i + 0.5) * res_, (j + 0.5) * res_, (k + 0.5) * res_};
}

std::optional<std::size_t> VoxelGrid::cell_containing(const Vec3& p) const {
    const int i = static_cast<int>(std::floor((p.x - origin_.x) / res_));
    const int j = static_cast<int>(std::floor((p.y - origin_.y) / res_));
    const int k = static_cast<int>(std::floor((p.z - origin_.z) / res_));
    if (i < 0 || j < 0 || k < 0 || i >= nx_ || j >= ny_ || k >= nz_) return std::nullopt;
    return index(i, j, k);
}

std::vector<std::size_t> VoxelGrid::visible_cells_near(const Vec3& p, int radius_cells) const {
    const int ci = static_cast<int>(std::floor((p.x - origin_.x) / res_));
    const int cj = static_cast<int>(std::floor((p.y - origin_.y) / res_));
    const int ck = static_cast<int>(std::floor((p.z - origin_.z) / res_));
    std::vector<std::pair<double, std::size_t>> found;
    for (int k = ck - radius_cells; k <= ck + radius_cells; ++k) {
        if (k < 0 || k >= nz_) continue;
        for (int j = cj - radius_cells; j <= cj + radius_cells; ++j) {
            if (j < 0 || j >= ny_) continue;
            for (int i = ci - radius_cells; i <= ci + radius_cells; ++i) {
                if (i < 0 || i >= nx_) continue;
                const std::size_t idx = index(i, j, k);
                if (!free_[idx]) continue;
                const Vec3 c = center(idx);
                if (!segment_free(*world_, p, c, safety_)) continue;
                found.emplace_back(distance(p, c), idx);
            }
        }
    }
    std::sort(found.begin(), found.end());
    std::vector<std::size_t> out;
    out.reserve(found.size());
    for (const auto& f : found) out.push_back(f.second);
    return out;
}

std::vector<double> VoxelGrid::distances_from(const std::vector<Seed>& seeds) const {
    struct Offset {
        int di, dj, dk;
        double cost;
    };
    std::vector<Offset> offsets;
    for (int dk = -1; dk <= 1; ++dk)
        for (int dj = -1; dj <= 1; ++dj)
            for (int di = -1; di <= 1; ++di) {
                if (di == 0 && dj == 0 && dk == 0) continue;
                offsets.push_back({di, dj, dk, res_ * std::sqrt(double(di * di + dj * dj + dk * dk))});
            }

    std::vector<double> dist(free_.size(), kInf);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    for (const auto& s : seeds) {
        if (!free_[s.cell]) continue;
        if (s.cost < dist[s.cell]) {
            dist[s.cell] = s.cost;
            open.emplace(s.cost, s.cell);
        }
    }
    while (!open.empty()) {
        const auto [d, idx] = open.top();
        open.pop();
        if (d > dist[idx]) continue;
        const auto [i, j, k] = cell(idx);
        for (const auto& o : offsets) {
            const int ni = i + o.di, nj = j + o.dj, nk = k + o.dk;
            if (ni < 0 || nj < 0 || nk < 0 || ni >= nx_ || nj >= ny_ || nk >= nz_) continue;
            const std::size_t n = index(ni, nj, nk);
            if (!free_[n]) continue;
            const double nd = d + o.cost;
            if (nd < dist[n]) {
                dist[n] = nd;
                open.emplace(nd, n);
            }
        }
    }
    return dist;
}

// ---------------------------------------------------------------------------
// Path field and shortest path

namespace {
constexpr int kSeedRadius = 2;
}

PathField::PathField(const CityWorld& world, const Vec3& goal, const MotionConfig& cfg)
    : grid_(world, cfg.translation_step / 2.0, cfg.safety_radius), goal_(goal), safety_(cfg.safety_radius) {
    if (!position_free(world, goal, safety_)) {
        dist_.assign(grid_.size(), kInf);
        return;
    }
    std::vector<VoxelGrid::Seed> seeds;
    for (std::size_t c : grid_.visible_cells_near(goal, kSeedRadius)) seeds.push_back({c, distance(goal, grid_.center(c))});
    dist_ = grid_.distances_from(seeds);
}

double PathField::remaining(const Vec3& p) const {
    const CityWorld& world = grid_.world();
    if (!position_free(world, p, safety_)) return kInf;
    if (segment_free(world, p, goal_, safety_)) return distance(p, goal_);
    double best = kInf;
    for (std::size_t c : grid_.visible_cells_near(p, kSeedRadius)) {
        best = std::min(best, distance(p, grid_.center(c)) + dist_[c]);
    }
    return best;
}

std::vector<Vec3> PathField::descend(const Vec3& p) const {
    const CityWorld& world = grid_.world();
    std::vector<Vec3> path{p};
    if (segment_free(world, p, goal_, safety_)) {
        path.push_back(goal_);
        return path;
    }
    std::optional<std::size_t> cur;
    double best = kInf;
    for (std::size_t c : grid_.visible_cells_near(p, kSeedRadius)) {
        const double v = distance(p, grid_.center(c)) + dist_[c];
        if (v < best) {
            best = v;
            cur = c;
        }
    }
    if (!cur || !std::isfinite(best)) throw NoPathError("no path to goal");

    const double res = grid_.resolution();
    for (std::size_t guard = 0; guard < grid_.size(); ++guard) {
        const Vec3 c = grid_.center(*cur);
        path.push_back(c);
        if (segment_free(world, c, goal_, safety_) && distance(c, goal_) <= dist_[*cur] + 1e-9) break;
        const auto [i, j, k] = grid_.cell(*cur);
        std::size_t next = *cur;
        double next_val = dist_[*cur];
        for (int dk = -1; dk <= 1; ++dk)
            for (int dj = -1; dj <= 1; ++dj)
                for (int di = -1; di <= 1; ++di) {
                    const int ni = i + di, nj = j + dj, nk = k + dk;
                    if (ni < 0 || nj < 0 || nk < 0 || ni >= grid_.nx() || nj >= grid_.ny() || nk >= grid_.nz())
                        continue;
                    const std::size_t n = grid_.index(ni, nj, nk);
                    if (!grid_.free(n) || dist_[n] >= next_val) continue;
                    const double edge = res * std::sqrt(double(di * di + dj * dj + dk * dk));
                    if (std::abs(dist_[n] + edge - dist_[*cur]) < 1e-6) {
                        next = n;
                        next_val = dist_[n];
                    }
                }
        if (next == *cur) break;  // reached a seed cell
        cur = next;
    }
    path.push_back(goal_);
    return path;
}

PathResult shortest_path(const CityWorld& world, const Vec3& start, const Vec3& goal, const MotionConfig& cfg) {
    if (!position_free(world, start, cfg.safety_radius)) throw NoPathError("start is not collision-free");
    if (!position_free(world, goal, cfg.safety_radius)) throw NoPathError("goal is not collision-free");

    PathResult out;
    if (segment_free(world, start, goal, cfg.safety_radius)) {
        out.path = {start, goal};
        out.length = distance(start, goal);
        return out;
    }
    const PathField field(world, goal, cfg);
    const std::vector<Vec3> raw = field.descend(start);

    // String pulling: from each anchor jump to the farthest vertex in line of sight.
    std::size_t i = 0;
    out.path.push_back(raw.front());
    while (i + 1 < raw.size()) {
        std::size_t j = raw.size() - 1;
        while (j > i + 1 && !segment_free(world, raw[i], raw[j], cfg.safety_radius)) --j;
        out.path.push_back(raw[j]);
        out.length += distance(raw[i], raw[j]);
        i = j;
    }
    return out;
}

}  // namespace aerialnav
