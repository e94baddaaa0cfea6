#include "aerialnav/service.hpp"

#include <cstdio>
#include <regex>

#include <httplib.h>

#include "aerialnav/errors.hpp"

namespace aerialnav {

using json = nlohmann::json;

namespace {

ServiceResponse error(int status, const std::string& message) { return {status, json{{"error", message}}}; }

std::string session_status(const EpisodeSession& s) { return s.done() ? "done" : "active"; }

}  // namespace

json observation_json(const SemanticObservation& obs, const CameraIntrinsics& intr) {
    json entities = json::array();
    for (const auto& e : obs.entities) {
        entities.push_back({{"label", e.label},
                            {"kind", e.kind == EntityKind::landmark ? "landmark" : "facade"},
                            {"box", e.box},
                            {"depth", e.depth},
                            {"occluded_fraction", e.occluded_fraction}});
    }
    json pose = to_json(obs.camera_pose);
    pose["pitch"] = obs.camera_pitch;
    return json{{"entities", entities},
                {"camera_pose", pose},
                {"schematic_svg", schematic_svg(obs, intr)},
                {"timestamp", obs.timestamp}};
}

ControlService::ControlService(std::vector<Scenario> scenarios, ServiceConfig cfg)
    : scenarios_(std::move(scenarios)), cfg_(std::move(cfg)) {
    cfg_.episode.validate();
    for (const auto& s : scenarios_)
        manifest_.entries.push_back({s.id, s.meta.group, s.ground_truth.length, s.id + ".json"});
}

ControlService::~ControlService() { stop(); }

std::shared_ptr<ControlService::Session> ControlService::find(const std::string& id) const {
    std::lock_guard lock(sessions_mu_);
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

ServiceResponse ControlService::create_session(const std::string& body) const {
    json req;
    try {
        req = body.empty() ? json::object() : json::parse(body);
    } catch (const json::exception&) {
        return error(400, "request body is not valid JSON");
    }
    if (!req.is_object() || !req.contains("scenario_id") || !req["scenario_id"].is_string())
        return error(422, "scenario_id (string) is required");
    const std::string scenario_id = req["scenario_id"];
    const std::string mode_name = req.value("mode", "human");
    if (mode_name != "human" && mode_name != "policy") return error(422, "mode must be human or policy");
    const SessionMode mode = mode_name == "human" ? SessionMode::human : SessionMode::policy;

    const Scenario* scenario = nullptr;
    for (const auto& s : scenarios_)
        if (s.id == scenario_id) scenario = &s;
    if (!scenario) return error(404, "unknown scenario: " + scenario_id);

    char buf[32];
    std::snprintf(buf, sizeof buf, "s%06llu", static_cast<unsigned long long>(next_id_++));
    const std::string policy = mode == SessionMode::human ? "human" : req.value("policy", std::string("external"));
    auto session = std::make_shared<Session>(buf, mode, *scenario, cfg_.episode, policy);
    {
        std::lock_guard lock(sessions_mu_);
        sessions_[session->id] = session;
    }
    const EpisodeLog& log = session->episode.log();
    return {201, json{{"session_id", session->id},
                      {"scenario_id", scenario->id},
                      {"instruction", scenario->goal.instruction},
                      {"epsilon", log.epsilon},
                      {"max_steps", log.max_steps},
                      {"mode", mode_name}}};
}

ServiceResponse ControlService::observation(const std::string& id) const {
    const auto s = find(id);
    if (!s) return error(404, "unknown session: " + id);
    std::lock_guard lock(s->mu);
    json body = observation_json(s->episode.observe(), cfg_.episode.camera);
    body["step"] = s->episode.step_count();
    body["status"] = session_status(s->episode);
    return {200, body};
}

ServiceResponse ControlService::action(const std::string& id, const std::string& body) const {
    const auto s = find(id);
    if (!s) return error(404, "unknown session: " + id);
    json req;
    try {
        req = json::parse(body);
    } catch (const json::exception&) {
        return error(400, "request body is not valid JSON");
    }
    if (!req.is_object() || !req.contains("kind") || !req["kind"].is_string())
        return error(422, "kind (string) is required");
    const auto action = action_from_name(req["kind"].get<std::string>());
    if (!action) return error(422, "unknown action kind: " + req["kind"].get<std::string>());

    std::lock_guard lock(s->mu);
    EpisodeSession& ep = s->episode;
    if (ep.done()) return {409, json{{"error", "session is done"}, {"step", ep.step_count()}}};
    if (req.contains("step") && (!req["step"].is_number_integer() || req["step"].get<int>() != ep.step_count()))
        return {409, json{{"error", "stale step"}, {"step", ep.step_count()}}};

    std::vector<std::string> seen;
    for (const auto& e : ep.observe().entities)
        if (e.kind == EntityKind::landmark) seen.push_back(e.label);
    const StepRecord rec = ep.step(*action, req.value("rationale", std::string()), std::move(seen));

    json out{{"pose", to_json(rec.pose)},
             {"blocked", rec.blocked},
             {"distance_to_goal", rec.distance_to_goal},
             {"status", session_status(ep)},
             {"step", ep.step_count()}};
    if (ep.done()) {
        out["outcome"] = std::string(to_string(ep.log().outcome));
        if (cfg_.log_dir) save_episode_log(ep.log(), *cfg_.log_dir / (s->id + ".jsonl"));
    }
    return {200, out};
}

ServiceResponse ControlService::log(const std::string& id) const {
    const auto s = find(id);
    if (!s) return error(404, "unknown session: " + id);
    std::lock_guard lock(s->mu);
    return {200, to_json(s->episode.log())};
}

ServiceResponse ControlService::handle(const std::string& method, const std::string& path,
                                       const std::string& body) const {
    static const std::regex session_re(R"(^/sessions/([^/]+)/(observation|action|log)$)");
    try {
        if (path == "/scenarios") {
            if (method != "GET") return error(405, "method not allowed");
            return {200, to_json(manifest_)};
        }
        if (path == "/sessions") {
            if (method != "POST") return error(405, "method not allowed");
            return create_session(body);
        }
        std::smatch m;
        if (std::regex_match(path, m, session_re)) {
            const std::string id = m[1].str();
            const std::string what = m[2].str();
            const std::string expected = what == "action" ? "POST" : "GET";
            if (method != expected) return error(405, "method not allowed");
            if (what == "observation") return observation(id);
            if (what == "action") return action(id, body);
            return log(id);
        }
        return error(404, "no such endpoint: " + path);
    } catch (const Error& e) {
        return error(500, e.what());
    }
}

void ControlService::install_routes() {
    server_ = std::make_unique<httplib::Server>();
    const std::string origin = cfg_.cors_origin;
    auto cors = [origin](httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
    };
    auto dispatch = [this, cors](const httplib::Request& req, httplib::Response& res) {
        const ServiceResponse r = handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
        cors(res);
    };
    const std::string any = R"(/.*)";
    server_->Get(any, dispatch);
    server_->Post(any, dispatch);
    server_->Options(any, [cors](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
        cors(res);
    });
}

bool ControlService::listen() {
    install_routes();
    if (cfg_.port == 0) {
        const int port = server_->bind_to_any_port(cfg_.host);
        if (port < 0) return false;
        std::fprintf(stderr, "serving on %s:%d\n", cfg_.host.c_str(), port);
        return server_->listen_after_bind();
    }
    return server_->listen(cfg_.host, cfg_.port);
}

int ControlService::start() {
    install_routes();
    const int port = cfg_.port == 0 ? server_->bind_to_any_port(cfg_.host)
                                    : (server_->bind_to_port(cfg_.host, cfg_.port) ? cfg_.port : -1);
    if (port < 0) return -1;
    thread_ = std::make_unique<std::thread>([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port;
}

void ControlService::stop() {
    if (server_) server_->stop();
    if (thread_ && thread_->joinable()) thread_->join();
    thread_.reset();
}

}  // namespace aerialnav
