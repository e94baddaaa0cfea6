#include "aerialnav/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <openssl/evp.h>

namespace aerialnav {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 6> kTagNames = {"Q_loc", "Q_plan", "Q_imgn", "Q_DM", "Q_imgn+Q_DM", "plain"};

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

std::string env_or(const char* name, std::string fallback) {
    const char* v = std::getenv(name);
    return (v && *v) ? std::string(v) : std::move(fallback);
}

json normalized_messages(const GatewayRequest& req) {
    json msgs = json::array();
    for (const auto& m : req.messages) {
        json parts = json::array();
        for (const auto& p : m.parts) {
            if (p.kind == ContentPart::Kind::text) {
                parts.push_back({{"text", normalize_text(p.text)}});
            } else {
                parts.push_back({{"image", p.data_url}});
            }
        }
        msgs.push_back({{"role", m.role}, {"parts", std::move(parts)}});
    }
    return msgs;
}

std::uint64_t request_tokens(const GatewayRequest& req) {
    std::uint64_t n = 0;
    for (const auto& m : req.messages) n += estimate_tokens(m.text());
    return n;
}

}  // namespace

std::string_view to_string(RequestTag t) { return kTagNames[static_cast<std::size_t>(t)]; }

std::optional<RequestTag> request_tag_from_name(std::string_view s) {
    for (std::size_t i = 0; i < kTagNames.size(); ++i)
        if (kTagNames[i] == s) return static_cast<RequestTag>(i);
    return std::nullopt;
}

std::string ChatMessage::text() const {
    std::string out;
    for (const auto& p : parts) {
        if (p.kind != ContentPart::Kind::text) continue;
        if (!out.empty()) out += "\n";
        out += p.text;
    }
    return out;
}

std::uint64_t estimate_tokens(const std::string& text) { return (text.size() + 3) / 4; }

// --- Ledger -------------------------------------------------------------------

void UsageLedger::record(const std::string& model, RequestTag tag, std::uint64_t input_tokens,
                         std::uint64_t output_tokens, std::chrono::duration<double> wall) {
    std::lock_guard lock(mu_);
    auto& u = usage_[model];
    u.input_tokens += input_tokens;
    u.output_tokens += output_tokens;
    ++calls_[tag];
    wall_ += wall.count();
}

std::uint64_t UsageLedger::calls(RequestTag tag) const {
    std::lock_guard lock(mu_);
    auto it = calls_.find(tag);
    return it == calls_.end() ? 0 : it->second;
}

std::uint64_t UsageLedger::total_calls() const {
    std::lock_guard lock(mu_);
    std::uint64_t n = 0;
    for (const auto& [_, c] : calls_) n += c;
    return n;
}

std::map<std::string, UsageLedger::ModelUsage> UsageLedger::usage() const {
    std::lock_guard lock(mu_);
    return usage_;
}

double UsageLedger::wall_seconds() const {
    std::lock_guard lock(mu_);
    return wall_;
}

json UsageLedger::to_json() const {
    std::lock_guard lock(mu_);
    json models = json::object();
    for (const auto& [m, u] : usage_) models[m] = {{"input_tokens", u.input_tokens}, {"output_tokens", u.output_tokens}};
    json calls = json::object();
    for (const auto& [t, c] : calls_) calls[std::string(to_string(t))] = c;
    return json{{"models", std::move(models)}, {"calls", std::move(calls)}, {"wall_seconds", wall_}};
}

// --- HTTP transport -------------------------------------------------------------

namespace {

class HttplibTransport : public HttpTransport {
public:
    HttplibTransport(const std::string& base_url, std::chrono::seconds timeout) {
        // Split "scheme://host[:port]/prefix" into the client origin and a path prefix.
        const auto scheme_end = base_url.find("://");
        const auto path_start = base_url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
        origin_ = path_start == std::string::npos ? base_url : base_url.substr(0, path_start);
        prefix_ = path_start == std::string::npos ? "" : base_url.substr(path_start);
        while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
        client_ = std::make_unique<httplib::Client>(origin_);
        client_->set_connection_timeout(timeout);
        client_->set_read_timeout(timeout);
        client_->set_write_timeout(timeout);
    }

    HttpReply post(const std::string& path, const std::string& body,
                   const std::vector<std::pair<std::string, std::string>>& headers) override {
        httplib::Headers h;
        for (const auto& [k, v] : headers) h.emplace(k, v);
        auto res = client_->Post(prefix_ + path, h, body, "application/json");
        if (!res) return {0, {}, httplib::to_string(res.error())};
        return {res->status, res->body, {}};
    }

private:
    std::string origin_;
    std::string prefix_;
    std::unique_ptr<httplib::Client> client_;
};

}  // namespace

std::unique_ptr<HttpTransport> make_http_transport(const std::string& base_url, std::chrono::seconds timeout) {
    return std::make_unique<HttplibTransport>(base_url, timeout);
}

std::chrono::duration<double> RetryPolicy::delay_before_retry(int failed_attempts, std::mt19937_64& rng) const {
    const double nominal = base_delay.count() * std::pow(factor, std::max(0, failed_attempts - 1));
    std::uniform_real_distribution<double> u(-jitter, jitter);
    return std::chrono::duration<double>(nominal * (1.0 + u(rng)));
}

LiveGatewayConfig LiveGatewayConfig::from_env() {
    LiveGatewayConfig c;
    c.base_url = env_or("AERIALNAV_API_BASE", c.base_url);
    c.api_key = env_or("AERIALNAV_API_KEY", "");
    c.model = env_or("AERIALNAV_MODEL", "gpt-4o");
    return c;
}

json chat_completions_body(const GatewayRequest& req, const std::string& model) {
    json messages = json::array();
    for (const auto& m : req.messages) {
        const bool has_image = std::any_of(m.parts.begin(), m.parts.end(),
                                           [](const ContentPart& p) { return p.kind == ContentPart::Kind::image; });
        if (!has_image) {
            messages.push_back({{"role", m.role}, {"content", m.text()}});
            continue;
        }
        json parts = json::array();
        for (const auto& p : m.parts) {
            if (p.kind == ContentPart::Kind::text) {
                parts.push_back({{"type", "text"}, {"text", p.text}});
            } else {
                parts.push_back({{"type", "image_url"}, {"image_url", {{"url", p.data_url}}}});
            }
        }
        messages.push_back({{"role", m.role}, {"content", std::move(parts)}});
    }
    return json{{"model", model},
                {"messages", std::move(messages)},
                {"temperature", req.temperature},
                {"max_tokens", req.max_output_tokens}};
}

ChatCompletionsGateway::ChatCompletionsGateway(LiveGatewayConfig cfg, std::unique_ptr<HttpTransport> transport,
                                               Sleeper sleeper, std::uint64_t jitter_seed)
    : cfg_(std::move(cfg)),
      transport_(std::move(transport)),
      sleeper_(sleeper ? std::move(sleeper) : Sleeper([](auto d) { std::this_thread::sleep_for(d); })),
      rng_(jitter_seed),
      in_flight_(std::max(1, cfg_.max_in_flight)) {}

std::string ChatCompletionsGateway::complete(const GatewayRequest& req) {
    if (req.messages.empty()) throw Error("gateway request needs at least one message");
    const std::string model = req.model.empty() ? cfg_.model : req.model;
    const std::string body = chat_completions_body(req, model).dump();
    std::vector<std::pair<std::string, std::string>> headers;
    if (!cfg_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + cfg_.api_key);

    const auto started = std::chrono::steady_clock::now();
    in_flight_.acquire();
    struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
    } release{in_flight_};

    std::string last_error;
    for (int attempt = 1; attempt <= cfg_.retry.max_attempts; ++attempt) {
        last_attempts_ = attempt;
        const HttpReply reply = transport_->post("/chat/completions", body, headers);
        if (reply.status == 401 || reply.status == 403) {
            throw GatewayError(GatewayError::Kind::auth, "authentication rejected (HTTP " + std::to_string(reply.status) + ")");
        }
        if (reply.status >= 200 && reply.status < 300) {
            json j;
            try {
                j = json::parse(reply.body);
            } catch (const json::parse_error& e) {
                throw GatewayError(GatewayError::Kind::transport, std::string("malformed response body: ") + e.what());
            }
            std::string text;
            try {
                const auto& content = j.at("choices").at(0).at("message").at("content");
                text = content.is_string() ? content.get<std::string>() : content.dump();
            } catch (const json::exception& e) {
                throw GatewayError(GatewayError::Kind::transport, std::string("response without content: ") + e.what());
            }
            std::uint64_t in_tok = request_tokens(req), out_tok = estimate_tokens(text);
            if (j.contains("usage") && j["usage"].is_object()) {
                in_tok = j["usage"].value("prompt_tokens", in_tok);
                out_tok = j["usage"].value("completion_tokens", out_tok);
            }
            ledger_->record(model, req.tag, in_tok, out_tok, std::chrono::steady_clock::now() - started);
            return text;
        }
        if (reply.status == 0) {
            last_error = "transport failure: " + reply.error;
        } else if (reply.status == 429) {
            last_error = "rate limited (HTTP 429)";
        } else if (reply.status >= 500) {
            last_error = "server error (HTTP " + std::to_string(reply.status) + ")";
        } else {
            // Other 4xx responses are request defects; retrying cannot help.
            throw GatewayError(GatewayError::Kind::transport,
                               "request rejected (HTTP " + std::to_string(reply.status) + "): " + reply.body);
        }
        if (attempt < cfg_.retry.max_attempts) {
            std::chrono::duration<double> d;
            {
                std::lock_guard lock(rng_mu_);
                d = cfg_.retry.delay_before_retry(attempt, rng_);
            }
            sleeper_(d);
        }
    }
    throw GatewayError(GatewayError::Kind::exhausted,
                       "gave up after " + std::to_string(cfg_.retry.max_attempts) + " attempts; last: " + last_error);
}

// --- Record / replay ----------------------------------------------------------

std::string normalize_text(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out += ' ';
        pending_space = false;
        out += c;
    }
    return out;
}

std::string fixture_key(const GatewayRequest& req, const std::string& model) {
    const json k{{"model", model}, {"tag", std::string(to_string(req.tag))}, {"messages", normalized_messages(req)}};
    return sha256_hex(k.dump());
}

RecordReplayGateway::RecordReplayGateway(ReplayMode mode, std::filesystem::path store, std::shared_ptr<Gateway> inner,
                                         std::string model)
    : mode_(mode), store_(std::move(store)), inner_(std::move(inner)), model_(std::move(model)) {
    if (mode_ == ReplayMode::record && !inner_) throw Error("record mode needs a backend to forward to");
    if (mode_ == ReplayMode::record) std::filesystem::create_directories(store_);
}

std::string RecordReplayGateway::default_model() const {
    if (!model_.empty()) return model_;
    return inner_ ? inner_->default_model() : "replay";
}

std::string RecordReplayGateway::complete(const GatewayRequest& req) {
    if (req.messages.empty()) throw Error("gateway request needs at least one message");
    const auto started = std::chrono::steady_clock::now();
    const std::string model = req.model.empty() ? default_model() : req.model;
    const std::string key = fixture_key(req, model);
    const auto path = store_ / (key + ".json");

    if (mode_ != ReplayMode::record) {
        std::unique_lock lock(io_mu_);
        std::ifstream in(path, std::ios::binary);
        if (in) {
            const json fx = json::parse(in);
            lock.unlock();
            const std::string text = fx.at("response").get<std::string>();
            const auto& usage = fx.value("usage", json::object());
            ledger_->record(model, req.tag, usage.value("input_tokens", request_tokens(req)),
                            usage.value("output_tokens", estimate_tokens(text)),
                            std::chrono::steady_clock::now() - started);
            return text;
        }
        if (mode_ == ReplayMode::strict_replay || !inner_) throw FixtureMissError(req.tag, key);
        ++forwarded_;
        std::string text = inner_->complete(req);
        ledger_->record(model, req.tag, request_tokens(req), estimate_tokens(text),
                        std::chrono::steady_clock::now() - started);
        return text;
    }

    ++forwarded_;
    std::string text = inner_->complete(req);
    const json fx{{"key", key},
                  {"model", model},
                  {"tag", std::string(to_string(req.tag))},
                  {"messages", normalized_messages(req)},
                  {"response", text},
                  {"usage", {{"input_tokens", request_tokens(req)}, {"output_tokens", estimate_tokens(text)}}}};
    {
        std::lock_guard lock(io_mu_);
        const auto tmp = std::filesystem::path(path.string() + ".tmp");
        {
            std::ofstream out(tmp, std::ios::binary);
            if (!out) throw Error("cannot write fixture " + tmp.string());
            out << fx.dump(2) << "\n";
        }
        std::filesystem::rename(tmp, path);
    }
    ledger_->record(model, req.tag, request_tokens(req), estimate_tokens(text),
                    std::chrono::steady_clock::now() - started);
    return text;
}

// --- Scripted -----------------------------------------------------------------

ScriptedGateway::ScriptedGateway(Responder responder, std::string model)
    : responder_(std::move(responder)), model_(std::move(model)) {}

std::string ScriptedGateway::complete(const GatewayRequest& req) {
    if (req.messages.empty()) throw Error("gateway request needs at least one message");
    const auto started = std::chrono::steady_clock::now();
    {
        std::lock_guard lock(mu_);
        requests_.push_back(req);
    }
    std::string text = responder_(req);
    ledger_->record(req.model.empty() ? model_ : req.model, req.tag, request_tokens(req), estimate_tokens(text),
                    std::chrono::steady_clock::now() - started);
    return text;
}

std::vector<GatewayRequest> ScriptedGateway::requests() const {
    std::lock_guard lock(mu_);
    return requests_;
}

void ScriptedGateway::clear_requests() {
    std::lock_guard lock(mu_);
    requests_.clear();
}

}  // namespace aerialnav
