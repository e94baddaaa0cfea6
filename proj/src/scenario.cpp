#include "aerialnav/scenario.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "aerialnav/errors.hpp"

namespace aerialnav {

using nlohmann::json;

namespace {

/// Checks that `j` is an object holding exactly the allowed keys (required ones present).
void expect_object(const json& j, const std::string& path, std::initializer_list<const char*> required,
                   std::initializer_list<const char*> optional = {}) {
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    std::set<std::string> allowed;
    for (const char* k : required) {
        allowed.insert(k);
        if (!j.contains(k)) throw SchemaError(path.empty() ? k : path + "." + k, "missing field");
    }
    for (const char* k : optional) allowed.insert(k);
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) {
            throw SchemaError(path.empty() ? key : path + "." + key,
                              "unknown field for schema v" + std::to_string(kScenarioSchemaVersion));
        }
    }
}

std::string child(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw SchemaError(path, "expected a number");
    return j.get<double>();
}

std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw SchemaError(path, "expected a string");
    return j.get<std::string>();
}

std::uint64_t get_uint(const json& j, const std::string& path) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
        throw SchemaError(path, "expected a non-negative integer");
    }
    return j.get<std::uint64_t>();
}

const json& get_array(const json& j, const std::string& path) {
    if (!j.is_array()) throw SchemaError(path, "expected an array");
    return j;
}

}  // namespace

std::string_view to_string(LengthGroup g) {
    switch (g) {
        case LengthGroup::short_range: return "short";
        case LengthGroup::middle_range: return "middle";
        case LengthGroup::long_range: return "long";
    }
    return "short";
}

LengthGroup length_group_from_name(std::string_view name) {
    if (name == "short") return LengthGroup::short_range;
    if (name == "middle") return LengthGroup::middle_range;
    if (name == "long") return LengthGroup::long_range;
    throw Error("unknown length group '" + std::string(name) + "'");
}

json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

json to_json(const AgentPose& p) {
    return json{{"position", to_json(p.position)}, {"yaw", p.yaw}, {"gimbal", p.gimbal}};
}

json to_json(const CityWorld& w) {
    json buildings = json::array();
    for (const auto& b : w.buildings) {
        buildings.push_back({{"label", b.label}, {"min", to_json(b.box.lo)}, {"max", to_json(b.box.hi)}});
    }
    json landmarks = json::array();
    for (const auto& l : w.landmarks) {
        json lj{{"label", l.label}, {"position", to_json(l.position)}};
        lj["parent"] = l.parent ? json(w.buildings[*l.parent].label) : json(nullptr);
        landmarks.push_back(std::move(lj));
    }
    return json{{"bounds", {{"min", to_json(w.bounds.lo)}, {"max", to_json(w.bounds.hi)}}},
                {"z_min", w.z_min},
                {"buildings", std::move(buildings)},
                {"landmarks", std::move(landmarks)}};
}

Vec3 vec3_from_json(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) throw SchemaError(path, "expected a 3-element array");
    return {get_number(j[0], path + "[0]"), get_number(j[1], path + "[1]"), get_number(j[2], path + "[2]")};
}

AgentPose pose_from_json(const json& j, const std::string& path) {
    expect_object(j, path, {"position", "yaw", "gimbal"});
    AgentPose p;
    p.position = vec3_from_json(j["position"], child(path, "position"));
    p.yaw = get_number(j["yaw"], child(path, "yaw"));
    p.gimbal = get_number(j["gimbal"], child(path, "gimbal"));
    if (p.yaw < 0.0 || p.yaw >= 360.0) throw SchemaError(child(path, "yaw"), "yaw must lie in [0, 360)");
    if (p.gimbal < -90.0 || p.gimbal > 0.0) throw SchemaError(child(path, "gimbal"), "gimbal must lie in [-90, 0]");
    return p;
}

CityWorld world_from_json(const json& j, const std::string& path) {
    expect_object(j, path, {"bounds", "z_min", "buildings", "landmarks"});
    CityWorld w;
    const std::string bp = child(path, "bounds");
    expect_object(j["bounds"], bp, {"min", "max"});
    w.bounds = {vec3_from_json(j["bounds"]["min"], child(bp, "min")),
                vec3_from_json(j["bounds"]["max"], child(bp, "max"))};
    w.z_min = get_number(j["z_min"], child(path, "z_min"));

    const std::string bsp = child(path, "buildings");
    const auto& bs = get_array(j["buildings"], bsp);
    for (std::size_t i = 0; i < bs.size(); ++i) {
        const std::string ip = bsp + "[" + std::to_string(i) + "]";
        expect_object(bs[i], ip, {"label", "min", "max"});
        w.buildings.push_back({{vec3_from_json(bs[i]["min"], child(ip, "min")),
                                vec3_from_json(bs[i]["max"], child(ip, "max"))},
                               get_string(bs[i]["label"], child(ip, "label"))});
    }
    const std::string lsp = child(path, "landmarks");
    const auto& ls = get_array(j["landmarks"], lsp);
    for (std::size_t i = 0; i < ls.size(); ++i) {
        const std::string ip = lsp + "[" + std::to_string(i) + "]";
        expect_object(ls[i], ip, {"label", "position"}, {"parent"});
        Landmark l;
        l.label = get_string(ls[i]["label"], child(ip, "label"));
        l.position = vec3_from_json(ls[i]["position"], child(ip, "position"));
        if (ls[i].contains("parent") && !ls[i]["parent"].is_null()) {
            const std::string parent = get_string(ls[i]["parent"], child(ip, "parent"));
            bool found = false;
            for (std::size_t b = 0; b < w.buildings.size(); ++b) {
                if (w.buildings[b].label == parent) {
                    l.parent = b;
                    found = true;
                    break;
                }
            }
            if (!found) throw SchemaError(child(ip, "parent"), "no building labelled '" + parent + "'");
        }
        w.landmarks.push_back(std::move(l));
    }
    try {
        w.validate();
    } catch (const SchemaError&) {
        throw;
    } catch (const Error& e) {
        throw SchemaError(path, e.what());
    }
    return w;
}

json to_json(const Scenario& s) {
    json polyline = json::array();
    for (const auto& p : s.ground_truth.polyline) polyline.push_back(to_json(p));
    json actions = json::array();
    for (Action a : s.ground_truth.actions) actions.push_back(std::string(to_string(a)));
    return json{
        {"schema_version", kScenarioSchemaVersion},
        {"id", s.id},
        {"world", to_json(s.world)},
        {"start", to_json(s.start)},
        {"goal", {{"position", to_json(s.goal.position)}, {"epsilon", s.goal.epsilon}, {"instruction", s.goal.instruction}}},
        {"ground_truth", {{"polyline", std::move(polyline)}, {"actions", std::move(actions)}, {"length", s.ground_truth.length}}},
        {"meta",
         {{"seed", s.meta.seed},
          {"template_id", s.meta.template_id},
          {"group", s.meta.group},
          {"landmark", s.meta.landmark},
          {"relation", s.meta.relation},
          {"anchor", s.meta.anchor}}},
    };
}

Scenario scenario_from_json(const json& j) {
    if (!j.is_object()) throw SchemaError("", "scenario document must be a JSON object");
    if (!j.contains("schema_version")) throw SchemaError("schema_version", "missing field");
    if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != kScenarioSchemaVersion) {
        throw SchemaError("schema_version", "unsupported version (expected " + std::to_string(kScenarioSchemaVersion) + ")");
    }
    expect_object(j, "", {"schema_version", "id", "world", "start", "goal", "ground_truth", "meta"});

    Scenario s;
    s.id = get_string(j["id"], "id");
    if (s.id.empty()) throw SchemaError("id", "must be non-empty");
    s.world = world_from_json(j["world"], "world");
    s.start = pose_from_json(j["start"], "start");

    expect_object(j["goal"], "goal", {"position", "epsilon", "instruction"});
    s.goal.position = vec3_from_json(j["goal"]["position"], "goal.position");
    s.goal.epsilon = get_number(j["goal"]["epsilon"], "goal.epsilon");
    if (!(s.goal.epsilon > 0.0)) throw SchemaError("goal.epsilon", "must be positive");
    s.goal.instruction = get_string(j["goal"]["instruction"], "goal.instruction");
    if (s.goal.instruction.empty()) throw SchemaError("goal.instruction", "must be non-empty");

    const auto& gt = j["ground_truth"];
    expect_object(gt, "ground_truth", {"polyline", "actions", "length"});
    const auto& poly = get_array(gt["polyline"], "ground_truth.polyline");
    for (std::size_t i = 0; i < poly.size(); ++i) {
        s.ground_truth.polyline.push_back(vec3_from_json(poly[i], "ground_truth.polyline[" + std::to_string(i) + "]"));
    }
    const auto& acts = get_array(gt["actions"], "ground_truth.actions");
    for (std::size_t i = 0; i < acts.size(); ++i) {
        const std::string ap = "ground_truth.actions[" + std::to_string(i) + "]";
        auto a = action_from_name(get_string(acts[i], ap));
        if (!a) throw SchemaError(ap, "unknown action '" + acts[i].get<std::string>() + "'");
        s.ground_truth.actions.push_back(*a);
    }
    s.ground_truth.length = get_number(gt["length"], "ground_truth.length");
    if (s.ground_truth.length < 0.0) throw SchemaError("ground_truth.length", "must be non-negative");

    const auto& m = j["meta"];
    expect_object(m, "meta", {"seed", "template_id"}, {"group", "landmark", "relation", "anchor"});
    s.meta.seed = get_uint(m["seed"], "meta.seed");
    s.meta.template_id = get_string(m["template_id"], "meta.template_id");
    if (m.contains("group")) s.meta.group = get_string(m["group"], "meta.group");
    if (m.contains("landmark")) s.meta.landmark = get_string(m["landmark"], "meta.landmark");
    if (m.contains("relation")) s.meta.relation = get_string(m["relation"], "meta.relation");
    if (m.contains("anchor")) s.meta.anchor = get_string(m["anchor"], "meta.anchor");
    return s;
}

std::string dump_scenario(const Scenario& s) { return to_json(s).dump(2) + "\n"; }

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << dump_scenario(s);
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError("", std::string("malformed JSON: ") + e.what());
    }
    return scenario_from_json(j);
}

json to_json(const CorpusManifest& m) {
    json entries = json::array();
    for (const auto& e : m.entries) {
        entries.push_back({{"id", e.id}, {"group", e.group}, {"ground_truth_length", e.ground_truth_length}, {"file", e.file}});
    }
    return json{{"schema_version", kScenarioSchemaVersion}, {"seed", m.seed}, {"scenarios", std::move(entries)}};
}

CorpusManifest manifest_from_json(const json& j) {
    expect_object(j, "", {"schema_version", "seed", "scenarios"});
    CorpusManifest m;
    m.seed = get_uint(j["seed"], "seed");
    const auto& arr = get_array(j["scenarios"], "scenarios");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string ip = "scenarios[" + std::to_string(i) + "]";
        expect_object(arr[i], ip, {"id", "group", "ground_truth_length", "file"});
        m.entries.push_back({get_string(arr[i]["id"], ip + ".id"), get_string(arr[i]["group"], ip + ".group"),
                             get_number(arr[i]["ground_truth_length"], ip + ".ground_truth_length"),
                             get_string(arr[i]["file"], ip + ".file")});
    }
    return m;
}

void save_manifest(const CorpusManifest& m, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw Error("cannot write manifest in " + dir.string());
    out << to_json(m).dump(2) << "\n";
}

CorpusManifest load_manifest(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json", std::ios::binary);
    if (!in) throw Error("no manifest.json in " + dir.string());
    try {
        return manifest_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw SchemaError("", std::string("malformed manifest: ") + e.what());
    }
}

std::vector<Scenario> load_corpus(const std::filesystem::path& dir) {
    std::vector<Scenario> out;
    for (const auto& e : load_manifest(dir).entries) out.push_back(load_scenario(dir / e.file));
    return out;
}

}  // namespace aerialnav
