#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "aerialnav/episode.hpp"
#include "aerialnav/scenario.hpp"

namespace httplib {
class Server;
}

namespace aerialnav {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 binds any free port
    std::string cors_origin = "*";
    std::optional<std::filesystem::path> log_dir;  // finished session logs are written here
    EpisodeConfig episode;
};

enum class SessionMode { human, policy };

struct ServiceResponse {
    int status = 200;
    nlohmann::json body;
};

/// In-memory sessions over the episode engine, exposed as JSON over HTTP.
class ControlService {
public:
    ControlService(std::vector<Scenario> scenarios, ServiceConfig cfg = {});
    ~ControlService();

    ControlService(const ControlService&) = delete;
    ControlService& operator=(const ControlService&) = delete;

    /// Routes one request without a socket; the HTTP server calls this too.
    ServiceResponse handle(const std::string& method, const std::string& path, const std::string& body) const;

    /// Binds and serves until stop(). Returns false when the bind fails.
    bool listen();
    /// Binds, then serves on a background thread; returns the bound port or -1.
    int start();
    void stop();

    const CorpusManifest& manifest() const { return manifest_; }

private:
    struct Session {
        std::mutex mu;
        std::string id;
        SessionMode mode = SessionMode::human;
        EpisodeSession episode;
        Session(std::string sid, SessionMode m, const Scenario& s, const EpisodeConfig& cfg, std::string policy)
            : id(std::move(sid)), mode(m), episode(s, cfg, std::move(policy)) {}
    };

    ServiceResponse create_session(const std::string& body) const;
    ServiceResponse observation(const std::string& id) const;
    ServiceResponse action(const std::string& id, const std::string& body) const;
    ServiceResponse log(const std::string& id) const;
    std::shared_ptr<Session> find(const std::string& id) const;
    void install_routes();

    std::vector<Scenario> scenarios_;
    CorpusManifest manifest_;
    ServiceConfig cfg_;
    mutable std::mutex sessions_mu_;
    mutable std::map<std::string, std::shared_ptr<Session>> sessions_;
    mutable std::atomic<std::uint64_t> next_id_{1};
    std::unique_ptr<httplib::Server> server_;
    std::unique_ptr<std::thread> thread_;
};

nlohmann::json observation_json(const SemanticObservation& obs, const CameraIntrinsics& intr = {});

}  // namespace aerialnav
