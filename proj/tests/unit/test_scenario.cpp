#include <doctest.h>

#include <filesystem>

#include "aerialnav/errors.hpp"
#include "aerialnav/generator.hpp"
#include "aerialnav/scenario.hpp"

using namespace aerialnav;
using nlohmann::json;

namespace {

Scenario sample() {
    GeneratorParams p;
    p.group = LengthGroup::short_range;
    return generate_scenario(31, p);
}

std::string schema_error_path(const json& j) {
    try {
        scenario_from_json(j);
    } catch (const SchemaError& e) {
        return e.field_path();
    }
    return "<no error>";
}

}  // namespace

TEST_CASE("scenario JSON round trip") {
    const Scenario s = sample();
    CHECK(scenario_from_json(to_json(s)) == s);
    CHECK(dump_scenario(scenario_from_json(json::parse(dump_scenario(s)))) == dump_scenario(s));

    const auto path = std::filesystem::temp_directory_path() / "aerialnav_scenario_rt.json";
    save_scenario(s, path);
    CHECK(load_scenario(path) == s);
    std::filesystem::remove(path);
}

TEST_CASE("schema errors name the offending field") {
    const json good = to_json(sample());

    json j = good;
    j.erase("schema_version");
    CHECK(schema_error_path(j) == "schema_version");

    j = good;
    j["schema_version"] = 2;
    CHECK(schema_error_path(j) == "schema_version");

    j = good;
    j["goal"]["epsilon"] = "twenty";
    CHECK(schema_error_path(j) == "goal.epsilon");

    j = good;
    j["world"]["buildings"][0]["max"] = json::array({1, 2});
    CHECK(schema_error_path(j) == "world.buildings[0].max");

    j = good;
    j["start"]["gimbal"] = 10;
    CHECK(schema_error_path(j) == "start.gimbal");

    j = good;
    j["ground_truth"]["actions"][0] = "barrel_roll";
    CHECK(schema_error_path(j) == "ground_truth.actions[0]");

    j = good;
    j["goal"]["color"] = "red";
    CHECK(schema_error_path(j) == "goal.color");

    j = good;
    j["extra"] = 1;
    CHECK(schema_error_path(j) == "extra");
}

TEST_CASE("landmark parents are stored by building label") {
    Scenario s = sample();
    s.world.landmarks.push_back({s.world.buildings[0].box.center() + Vec3{0, 0, 200}, "roof beacon", 0});
    s.world.bounds.hi.z = 1000;
    const json j = to_json(s);
    CHECK(j["world"]["landmarks"].back()["parent"] == s.world.buildings[0].label);
    CHECK(scenario_from_json(j).world.landmarks.back().parent == std::optional<std::size_t>(0));
}

TEST_CASE("manifest round trip and missing corpus") {
    CorpusManifest m;
    m.seed = 4;
    m.entries.push_back({"short-1", "short", 80.5, "short-1.json"});
    CHECK(manifest_from_json(to_json(m)).entries.size() == 1);
    CHECK_THROWS_AS(load_manifest("/nonexistent/corpus"), Error);
}
