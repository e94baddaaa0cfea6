#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aerialnav/world.hpp"

namespace aerialnav {

inline constexpr int kScenarioSchemaVersion = 1;

enum class LengthGroup { short_range, middle_range, long_range };

std::string_view to_string(LengthGroup g);
LengthGroup length_group_from_name(std::string_view name);

struct Goal {
    Vec3 position;
    double epsilon = 20.0;
    std::string instruction;

    bool operator==(const Goal&) const = default;
};

struct GroundTruth {
    std::vector<Vec3> polyline;
    std::vector<Action> actions;
    double length = 0.0;

    bool operator==(const GroundTruth&) const = default;
};

struct ScenarioMeta {
    std::uint64_t seed = 0;
    std::string template_id;
    std::string group;           // short | middle | long, empty for hand-built scenarios
    std::string landmark;        // goal landmark label
    std::string relation;        // spatial relation used in the instruction
    std::string anchor;          // anchor building label

    bool operator==(const ScenarioMeta&) const = default;
};

struct Scenario {
    std::string id;
    CityWorld world;
    AgentPose start;
    Goal goal;
    GroundTruth ground_truth;
    ScenarioMeta meta;

    bool operator==(const Scenario&) const = default;
};

nlohmann::json to_json(const Scenario& s);
/// Strict schema-v1 parse; throws SchemaError naming the offending field path.
Scenario scenario_from_json(const nlohmann::json& j);

std::string dump_scenario(const Scenario& s);
void save_scenario(const Scenario& s, const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

/// Pose and world helpers shared by the other JSON formats.
nlohmann::json to_json(const Vec3& v);
nlohmann::json to_json(const AgentPose& p);
nlohmann::json to_json(const CityWorld& w);
Vec3 vec3_from_json(const nlohmann::json& j, const std::string& path);
AgentPose pose_from_json(const nlohmann::json& j, const std::string& path);
CityWorld world_from_json(const nlohmann::json& j, const std::string& path);

struct ManifestEntry {
    std::string id;
    std::string group;
    double ground_truth_length = 0.0;
    std::string file;
};

struct CorpusManifest {
    std::uint64_t seed = 0;
    std::vector<ManifestEntry> entries;
};

nlohmann::json to_json(const CorpusManifest& m);
CorpusManifest manifest_from_json(const nlohmann::json& j);
void save_manifest(const CorpusManifest& m, const std::filesystem::path& dir);
CorpusManifest load_manifest(const std::filesystem::path& dir);

/// Loads every scenario listed in a corpus directory's manifest, in manifest order.
std::vector<Scenario> load_corpus(const std::filesystem::path& dir);

}  // namespace aerialnav
