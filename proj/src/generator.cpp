#include "aerialnav/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <random>

#include "aerialnav/errors.hpp"
#include "aerialnav/policies.hpp"

namespace aerialnav {

namespace {

constexpr double kFaceOffset = 4.0;
constexpr double kSideReach = 10.0;
constexpr double kNearReach = 15.0;

const std::array<const char*, 8> kColours = {"red", "blue", "yellow", "green", "white", "orange", "purple", "black"};
const std::array<const char*, 8> kObjects = {"kiosk", "billboard", "water tank", "antenna",
                                             "statue", "umbrella",  "sign",       "flag"};

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int pick(std::mt19937_64& rng, int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

CityWorld build_city(const GeneratorParams& p, std::mt19937_64& rng) {
    CityWorld w;
    const double half = p.grid * p.block_pitch / 2.0 + 25.0;
    w.bounds = {{-half, -half, 0.0}, {half, half, p.ceiling}};
    for (int i = 0; i < p.grid; ++i) {
        for (int j = 0; j < p.grid; ++j) {
            if (uniform(rng, 0, 1) >= p.occupancy) continue;
            const double hx = uniform(rng, p.min_half_size, p.max_half_size);
            const double hy = uniform(rng, p.min_half_size, p.max_half_size);
            const double slack_x = std::max(0.0, p.block_pitch / 2.0 - hx - 6.0);
            const double slack_y = std::max(0.0, p.block_pitch / 2.0 - hy - 6.0);
            const double cx = -p.grid * p.block_pitch / 2.0 + (i + 0.5) * p.block_pitch + uniform(rng, -slack_x, slack_x);
            const double cy = -p.grid * p.block_pitch / 2.0 + (j + 0.5) * p.block_pitch + uniform(rng, -slack_y, slack_y);
            const double h = uniform(rng, p.min_height, p.max_height);
            std::string label = "block ";
            label += static_cast<char>('A' + i);
            label += std::to_string(j + 1);
            w.buildings.push_back({{{cx - hx, cy - hy, 0.0}, {cx + hx, cy + hy, h}}, label});
        }
    }
    return w;
}

/// A landmark position satisfying `relation` with respect to `box`.
Vec3 place_relative(const std::string& relation, const Aabb& box, double max_goal_height, std::mt19937_64& rng) {
    const double top = box.hi.z;
    const double z = uniform(rng, 3.0, std::max(3.5, std::min(top, max_goal_height)));
    const double mx = uniform(rng, box.lo.x + 1.0, box.hi.x - 1.0);
    const double my = uniform(rng, box.lo.y + 1.0, box.hi.y - 1.0);
    if (relation == "on top of") return {mx, my, top + 3.0};
    if (relation == "at the entrance of") return {mx, box.lo.y - kFaceOffset, z};
    if (relation == "behind") return {mx, box.hi.y + kFaceOffset, z};
    if (relation == "left of") return {box.lo.x - kFaceOffset, my, z};
    if (relation == "right of") return {box.hi.x + kFaceOffset, my, z};
    const double sx = pick(rng, 2) ? 1.0 : -1.0, sy = pick(rng, 2) ? 1.0 : -1.0;
    return {sx > 0 ? box.hi.x + kFaceOffset : box.lo.x - kFaceOffset,
            sy > 0 ? box.hi.y + kFaceOffset : box.lo.y - kFaceOffset, z};
}

struct Rollout {
    bool success = false;
    std::vector<Vec3> polyline;
    std::vector<Action> actions;
    double length = 0.0;
};

Rollout roll_out(const CityWorld& world, const std::shared_ptr<const PathField>& field, const AgentPose& start,
                 double epsilon, const MotionConfig& cfg, int max_steps) {
    OraclePolicy oracle(world, field, epsilon, cfg);
    Rollout r;
    r.polyline.push_back(start.position);
    AgentPose pose = start;
    for (int t = 0; t < max_steps; ++t) {
        const Action a = oracle.decide(pose, t == 0).action;
        r.actions.push_back(a);
        if (a == Action::stop) {
            r.success = distance_to_goal(pose, field->goal()) <= epsilon;
            return r;
        }
        const StepResult s = apply_action(pose, a, world, cfg);
        if (s.blocked) return r;
        r.length += distance(pose.position, s.pose.position);
        pose = s.pose;
        if (a <= Action::move_down) r.polyline.push_back(pose.position);
    }
    return r;
}

}  // namespace

bool relation_holds(const std::string& relation, const Vec3& p, const Aabb& b) {
    const bool within_x = p.x >= b.lo.x && p.x <= b.hi.x;
    const bool within_y = p.y >= b.lo.y && p.y <= b.hi.y;
    const bool below_top = p.z <= b.hi.z;
    if (relation == "on top of") return within_x && within_y && p.z >= b.hi.z - 1.0;
    if (relation == "at the entrance of") return within_x && p.y < b.lo.y && b.lo.y - p.y <= kSideReach && below_top;
    if (relation == "behind") return within_x && p.y > b.hi.y && p.y - b.hi.y <= kSideReach && below_top;
    if (relation == "left of") return within_y && p.x < b.lo.x && b.lo.x - p.x <= kSideReach && below_top;
    if (relation == "right of") return within_y && p.x > b.hi.x && p.x - b.hi.x <= kSideReach && below_top;
    if (relation == "near") {
        const double dx = std::max({b.lo.x - p.x, 0.0, p.x - b.hi.x});
        const double dy = std::max({b.lo.y - p.y, 0.0, p.y - b.hi.y});
        const double dz = std::max({b.lo.z - p.z, 0.0, p.z - b.hi.z});
        const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
        return d > 0.0 && d <= kNearReach;
    }
    throw Error("unknown relation: " + relation);
}

const std::vector<InstructionTemplate>& instruction_templates() {
    static const std::vector<InstructionTemplate> t = {
        {"t0", "Fly to the {landmark} {relation} the {anchor}."},
        {"t1", "Your destination is the {landmark}, {relation} the {anchor}."},
        {"t2", "Find the {landmark} {relation} the {anchor} and stop next to it."},
        {"t3", "Head for the {anchor}; the goal is the {landmark} {relation} it."},
    };
    return t;
}

std::string render_instruction(const InstructionTemplate& t, const std::string& landmark,
                               const std::string& relation, const std::string& anchor) {
    return fill_template(t.pattern, {{"landmark", landmark}, {"relation", relation}, {"anchor", anchor}});
}

void GeneratorParams::validate() const {
    motion.validate();
    if (grid < 1 || block_pitch <= 0 || occupancy < 0 || occupancy > 1) throw Error("generator: bad grid");
    if (min_half_size <= 1.0 || max_half_size < min_half_size || 2 * max_half_size + 12.0 > block_pitch)
        throw Error("generator: building footprint must leave streets between blocks");
    if (min_height <= 0 || max_height < min_height || max_height + 10.0 > ceiling)
        throw Error("generator: heights must leave room under the ceiling");
    if (epsilon <= 0 || max_steps < 2 || max_attempts < 1) throw Error("generator: bad episode limits");
    if (min_start_height < 3.0 || max_start_height < min_start_height || max_start_height >= ceiling)
        throw Error("generator: bad start heights");
    if (short_min <= epsilon || long_max <= 223.6) throw Error("generator: bad group bounds");
}

std::pair<double, double> group_range(const GeneratorParams& p, LengthGroup g) {
    switch (g) {
        case LengthGroup::short_range: return {p.short_min, 118.2};
        case LengthGroup::middle_range: return {118.2, 223.6};
        case LengthGroup::long_range: return {223.6, p.long_max};
    }
    return {0, 0};
}

Scenario generate_scenario(std::uint64_t seed, const GeneratorParams& params) {
    params.validate();
    std::mt19937_64 rng(seed);
    const auto [lo, hi] = group_range(params, params.group);
    auto in_group = [&, lo = lo, hi = hi](double len) {
        switch (params.group) {
            case LengthGroup::short_range: return len >= lo && len < hi;
            case LengthGroup::middle_range: return len >= lo && len <= hi;
            case LengthGroup::long_range: return len > lo && len <= hi;
        }
        return false;
    };

    constexpr int kStartsPerCity = 20;
    CityWorld world;
    std::shared_ptr<const PathField> field;
    std::string relation, anchor, landmark;
    Vec3 goal;
    for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
        if (attempt % kStartsPerCity == 0) {
            field.reset();
            world = build_city(params, rng);
            if (world.buildings.empty()) continue;

            // Landmark labels are distinct colour/object pairs.
            std::vector<int> label_ids(kColours.size() * kObjects.size());
            for (std::size_t i = 0; i < label_ids.size(); ++i) label_ids[i] = static_cast<int>(i);
            std::shuffle(label_ids.begin(), label_ids.end(), rng);
            auto label_of = [&](int k) {
                const int id = label_ids[k];
                return std::string(kColours[id / kObjects.size()]) + " " + kObjects[id % kObjects.size()];
            };

            bool placed = false;
            for (int n = 0, k = 0; n <= params.distractor_landmarks && k < 50; ++k) {
                const auto bi = static_cast<std::size_t>(pick(rng, static_cast<int>(world.buildings.size())));
                const std::string rel = kRelations[pick(rng, static_cast<int>(kRelations.size()))];
                const Vec3 p = place_relative(rel, world.buildings[bi].box, params.max_goal_height, rng);
                if (!position_free(world, p, params.motion.safety_radius + 0.5)) continue;
                std::optional<std::size_t> parent;
                if (rel == "on top of") parent = bi;
                world.landmarks.push_back({p, label_of(n), parent});
                if (n == 0) {
                    relation = rel;
                    anchor = world.buildings[bi].label;
                    landmark = world.landmarks.back().label;
                    goal = p;
                    placed = true;
                }
                ++n;
            }
            if (!placed) continue;
            field = std::make_shared<const PathField>(world, goal, params.motion);
        }
        if (!field) continue;

        const Vec3 pos{uniform(rng, world.bounds.lo.x + 10, world.bounds.hi.x - 10),
                       uniform(rng, world.bounds.lo.y + 10, world.bounds.hi.y - 10),
                       uniform(rng, params.min_start_height, params.max_start_height)};
        const AgentPose start = make_pose(pos, uniform(rng, 0.0, 360.0), 0.0);
        if (!position_free(world, start.position, params.motion.safety_radius)) continue;
        const double straight = distance(start.position, goal);
        if (straight <= params.epsilon || straight > hi) continue;
        const double remaining = field->remaining(start.position);
        if (!std::isfinite(remaining) || remaining > hi + params.epsilon) continue;

        const Rollout r = roll_out(world, field, start, params.epsilon, params.motion, params.max_steps);
        if (!r.success) continue;
        const double gt_length = r.length + distance(r.polyline.back(), goal);
        if (!in_group(gt_length)) continue;

        const auto& templates = instruction_templates();
        const auto& tpl = templates[pick(rng, static_cast<int>(templates.size()))];

        Scenario s;
        char id[64];
        std::snprintf(id, sizeof id, "%s-%016llx", std::string(to_string(params.group)).c_str(),
                      static_cast<unsigned long long>(seed));
        s.id = id;
        s.world = world;
        s.start = start;
        s.goal = {goal, params.epsilon, render_instruction(tpl, landmark, relation, anchor)};
        // The reference trajectory ends at the goal itself; the oracle's discrete rollout
        // stops inside the success radius, so the residual closes the polyline.
        std::vector<Vec3> polyline = r.polyline;
        const double residual = distance(polyline.back(), goal);
        if (residual > 0.0) polyline.push_back(goal);
        s.ground_truth = {polyline, r.actions, r.length + residual};
        s.meta = {seed, tpl.id, std::string(to_string(params.group)), landmark, relation, anchor};
        s.world.validate();
        return s;
    }
    throw GenerationFailure("no valid scenario after " + std::to_string(params.max_attempts) +
                            " placement attempts (seed " + std::to_string(seed) + ")");
}

std::vector<Scenario> generate_scenarios(std::uint64_t seed, const std::vector<LengthGroup>& groups, int count,
                                         GeneratorParams params) {
    if (groups.empty()) throw Error("at least one length group is required");
    if (count < 0) throw Error("scenario count must be non-negative");
    std::vector<Scenario> out;
    const int n = static_cast<int>(groups.size());
    for (int gi = 0; gi < n; ++gi) {
        const LengthGroup g = groups[static_cast<std::size_t>(gi)];
        params.group = g;
        const int share = count / n + (gi < count % n ? 1 : 0);
        for (int i = 0; i < share; ++i) {
            std::uint64_t s = splitmix(seed * 0x100000001b3ULL + static_cast<std::uint64_t>(g) * 1000003ULL + i);
            // A city that cannot host the group is skipped for the next seed in sequence.
            for (int retry = 0;; ++retry) {
                try {
                    out.push_back(generate_scenario(s, params));
                    break;
                } catch (const GenerationFailure&) {
                    if (retry == 9) throw;
                    s = splitmix(s);
                }
            }
        }
    }
    return out;
}

std::vector<Scenario> generate_scenarios(std::uint64_t seed, int per_group, GeneratorParams params) {
    return generate_scenarios(seed, {LengthGroup::short_range, LengthGroup::middle_range, LengthGroup::long_range},
                              3 * per_group, std::move(params));
}

CorpusManifest write_corpus(const std::filesystem::path& dir, std::uint64_t seed,
                            const std::vector<Scenario>& scenarios) {
    std::filesystem::create_directories(dir);
    CorpusManifest m;
    m.seed = seed;
    for (const auto& s : scenarios) {
        const std::string file = s.id + ".json";
        save_scenario(s, dir / file);
        m.entries.push_back({s.id, s.meta.group, s.ground_truth.length, file});
    }
    save_manifest(m, dir);
    return m;
}

CorpusManifest generate_corpus(const std::filesystem::path& dir, std::uint64_t seed, int per_group,
                               GeneratorParams params) {
    return write_corpus(dir, seed, generate_scenarios(seed, per_group, std::move(params)));
}

}  // namespace aerialnav
