#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aerialnav/scenario.hpp"

namespace aerialnav {

/// Spatial relations used in instructions. "Entrance" is the building's south (-y)
/// face; left and right are as seen by someone facing that entrance from outside.
inline const std::array<std::string, 6> kRelations = {"on top of", "at the entrance of", "behind",
                                                      "left of",   "right of",           "near"};

/// True when `p` stands in `relation` to the box.
bool relation_holds(const std::string& relation, const Vec3& p, const Aabb& anchor);

struct InstructionTemplate {
    std::string id;
    std::string pattern;  // slots {landmark} {relation} {anchor}
};

const std::vector<InstructionTemplate>& instruction_templates();

std::string render_instruction(const InstructionTemplate& t, const std::string& landmark,
                               const std::string& relation, const std::string& anchor);

struct GeneratorParams {
    int grid = 5;                   // blocks per side
    double block_pitch = 70.0;      // metres between block centres
    double occupancy = 0.8;         // probability a block holds a building
    double min_half_size = 8.0;
    double max_half_size = 22.0;
    double min_height = 15.0;
    double max_height = 150.0;
    double ceiling = 200.0;
    int distractor_landmarks = 4;
    double min_start_height = 80.0;
    double max_start_height = 190.0;
    double max_goal_height = 150.0;
    double epsilon = 20.0;
    int max_steps = 50;             // ground truth must fit the episode budget
    LengthGroup group = LengthGroup::middle_range;
    double short_min = 40.0;        // lower bound of the short group
    double long_max = 400.0;        // upper bound of the long group
    int max_attempts = 100;
    MotionConfig motion;

    void validate() const;
};

/// Ground-truth length bounds [lo, hi] for a group (short excludes its upper bound).
std::pair<double, double> group_range(const GeneratorParams& p, LengthGroup g);

/// Deterministic in (seed, params). Throws GenerationFailure after max_attempts.
Scenario generate_scenario(std::uint64_t seed, const GeneratorParams& params);

/// Writes `per_group` scenarios of each group plus manifest.json into `dir`.
CorpusManifest generate_corpus(const std::filesystem::path& dir, std::uint64_t seed, int per_group,
                               GeneratorParams params = {});

/// Same corpus, in memory.
std::vector<Scenario> generate_scenarios(std::uint64_t seed, int per_group, GeneratorParams params = {});

/// `count` scenarios spread over `groups` in order; earlier groups take the remainder.
std::vector<Scenario> generate_scenarios(std::uint64_t seed, const std::vector<LengthGroup>& groups, int count,
                                         GeneratorParams params = {});

/// Saves scenarios and their manifest into `dir`.
CorpusManifest write_corpus(const std::filesystem::path& dir, std::uint64_t seed, const std::vector<Scenario>& scenarios);

}  // namespace aerialnav
