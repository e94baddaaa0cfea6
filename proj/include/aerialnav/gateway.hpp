#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <semaphore>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aerialnav/errors.hpp"

namespace aerialnav {

/// Which agent prompt a request carries; fixtures and ledger counts are keyed by it.
enum class RequestTag { localize, plan, imagine, decide, active_perception, plain };

std::string_view to_string(RequestTag t);
std::optional<RequestTag> request_tag_from_name(std::string_view s);

struct ContentPart {
    enum class Kind { text, image };
    Kind kind = Kind::text;
    std::string text;      // for text parts
    std::string data_url;  // for image parts, "data:image/png;base64,..."

    static ContentPart make_text(std::string t) { return {Kind::text, std::move(t), {}}; }
    static ContentPart make_image(std::string url) { return {Kind::image, {}, std::move(url)}; }
};

struct ChatMessage {
    std::string role;
    std::vector<ContentPart> parts;

    static ChatMessage user(std::string text) { return {"user", {ContentPart::make_text(std::move(text))}}; }
    static ChatMessage system(std::string text) { return {"system", {ContentPart::make_text(std::move(text))}}; }
    std::string text() const;
};

struct GatewayRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_output_tokens = 1024;
    RequestTag tag = RequestTag::plain;
};

class GatewayError : public Error {
public:
    enum class Kind { transport, auth, rate_limited, exhausted, fixture_miss };
    GatewayError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

class FixtureMissError : public GatewayError {
public:
    FixtureMissError(RequestTag tag, const std::string& key)
        : GatewayError(Kind::fixture_miss,
                       "no fixture for " + std::string(to_string(tag)) + " request (key " + key + ")"),
          tag_(tag) {}
    RequestTag tag() const { return tag_; }

private:
    RequestTag tag_;
};

/// Thread-safe token and call accounting.
class UsageLedger {
public:
    struct ModelUsage {
        std::uint64_t input_tokens = 0;
        std::uint64_t output_tokens = 0;
    };

    void record(const std::string& model, RequestTag tag, std::uint64_t input_tokens, std::uint64_t output_tokens,
                std::chrono::duration<double> wall);

    std::uint64_t calls(RequestTag tag) const;
    std::uint64_t total_calls() const;
    std::map<std::string, ModelUsage> usage() const;
    double wall_seconds() const;
    nlohmann::json to_json() const;

private:
    mutable std::mutex mu_;
    std::map<std::string, ModelUsage> usage_;
    std::map<RequestTag, std::uint64_t> calls_;
    double wall_ = 0.0;
};

/// Anything that can answer a chat-completions request.
class Gateway {
public:
    Gateway() : ledger_(std::make_shared<UsageLedger>()) {}
    virtual ~Gateway() = default;

    virtual std::string complete(const GatewayRequest& req) = 0;
    /// Model used when a request leaves it empty.
    virtual std::string default_model() const { return "mock"; }

    UsageLedger& ledger() { return *ledger_; }
    std::shared_ptr<UsageLedger> shared_ledger() const { return ledger_; }

protected:
    std::shared_ptr<UsageLedger> ledger_;
};

/// Rough token estimate for backends that do not report usage.
std::uint64_t estimate_tokens(const std::string& text);

// --- HTTP transport ---------------------------------------------------------

struct HttpReply {
    int status = 0;  // 0 means the request never completed
    std::string body;
    std::string error;
};

class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpReply post(const std::string& path, const std::string& body,
                           const std::vector<std::pair<std::string, std::string>>& headers) = 0;
};

/// cpp-httplib backed transport; supports http:// and https:// base URLs.
std::unique_ptr<HttpTransport> make_http_transport(const std::string& base_url, std::chrono::seconds timeout);

struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::duration<double> base_delay{1.0};
    double factor = 2.0;
    double jitter = 0.2;  // +/- fraction of each delay

    std::chrono::duration<double> delay_before_retry(int failed_attempts, std::mt19937_64& rng) const;
};

struct LiveGatewayConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key;
    std::string model;
    RetryPolicy retry;
    int max_in_flight = 4;
    std::chrono::seconds timeout{120};

    /// Reads AERIALNAV_API_BASE, AERIALNAV_API_KEY and AERIALNAV_MODEL.
    static LiveGatewayConfig from_env();
};

nlohmann::json chat_completions_body(const GatewayRequest& req, const std::string& model);

/// POSTs chat-completions bodies with retry on transport errors, 5xx and 429.
/// Authentication failures are never retried.
class ChatCompletionsGateway : public Gateway {
public:
    using Sleeper = std::function<void(std::chrono::duration<double>)>;

    ChatCompletionsGateway(LiveGatewayConfig cfg, std::unique_ptr<HttpTransport> transport, Sleeper sleeper = {},
                           std::uint64_t jitter_seed = 0x5eed);

    std::string complete(const GatewayRequest& req) override;
    std::string default_model() const override { return cfg_.model; }
    int attempts_last_call() const { return last_attempts_; }

private:
    LiveGatewayConfig cfg_;
    std::unique_ptr<HttpTransport> transport_;
    Sleeper sleeper_;
    std::mutex rng_mu_;
    std::mt19937_64 rng_;
    std::counting_semaphore<1024> in_flight_;
    std::atomic<int> last_attempts_{0};
};

// --- Record / replay ----------------------------------------------------------

enum class ReplayMode { record, replay, strict_replay };

/// Whitespace runs collapse to one space; leading and trailing space is dropped.
std::string normalize_text(std::string_view s);

/// Stable SHA-256 key over (model, tag, normalized messages).
std::string fixture_key(const GatewayRequest& req, const std::string& model);

/// Fixture store with one JSON file per key. `record` forwards to the inner gateway
/// and persists; `replay` serves hits and forwards misses when an inner gateway
/// exists; `strict_replay` never forwards.
class RecordReplayGateway : public Gateway {
public:
    /// `model` names the backend in fixture keys when requests leave it empty; it
    /// defaults to the inner gateway's model.
    RecordReplayGateway(ReplayMode mode, std::filesystem::path store, std::shared_ptr<Gateway> inner = nullptr,
                        std::string model = {});

    std::string complete(const GatewayRequest& req) override;
    std::string default_model() const override;

    ReplayMode mode() const { return mode_; }
    std::uint64_t forwarded_calls() const { return forwarded_; }

private:
    ReplayMode mode_;
    std::filesystem::path store_;
    std::shared_ptr<Gateway> inner_;
    std::string model_;
    std::mutex io_mu_;
    std::atomic<std::uint64_t> forwarded_{0};
};

/// In-process backend driven by a callback; records every request it receives.
class ScriptedGateway : public Gateway {
public:
    using Responder = std::function<std::string(const GatewayRequest&)>;

    explicit ScriptedGateway(Responder responder, std::string model = "scripted");

    std::string complete(const GatewayRequest& req) override;
    std::string default_model() const override { return model_; }

    std::vector<GatewayRequest> requests() const;
    void clear_requests();

private:
    Responder responder_;
    std::string model_;
    mutable std::mutex mu_;
    std::vector<GatewayRequest> requests_;
};

}  // namespace aerialnav
