#include "aerialnav/agent.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>

#include "aerialnav/errors.hpp"

namespace aerialnav {

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// Drops markdown emphasis, headings and list markers ("1.", "2)", "-", "*").
std::string strip_markup(std::string line) {
    line = trim(line);
    line.erase(std::remove(line.begin(), line.end(), '*'), line.end());
    static const std::regex marker(R"(^\s*(#+\s*|[-+]\s+|\d+[.)]\s*))");
    return trim(std::regex_replace(line, marker, "", std::regex_constants::format_first_only));
}

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool has_token(const std::string& text, const std::string& token) {
    for (auto pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos + 1)) {
        const bool left = pos == 0 || !word_char(text[pos - 1]);
        const std::size_t end = pos + token.size();
        const bool right = end >= text.size() || !word_char(text[end]);
        if (left && right) return true;
    }
    return false;
}

// Text after "<key>:" when the lowercased line starts with key, else nullopt.
std::optional<std::string> field(const std::string& line, const std::string& key) {
    const std::string l = lower(line);
    if (l.rfind(key, 0) != 0) return std::nullopt;
    std::string rest = line.substr(key.size());
    const auto colon = rest.find(':');
    if (colon != std::string::npos && trim(rest.substr(0, colon)).empty()) rest = rest.substr(colon + 1);
    else if (!trim(rest).empty()) return std::nullopt;  // "routes", "endpoint"
    return trim(rest);
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    std::string s = os.str();
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
}

}  // namespace

void memory_update(AgentMemory& memory, const CityWorld& world, const SemanticObservation& observation,
                   const std::string& plan, Action action, const CameraIntrinsics& intr) {
    const std::size_t step = memory.actions.size();
    bool admit = true;
    if (memory.admission == MemoryAdmission::sparse) {
        std::vector<AgentPose> stored;
        stored.reserve(memory.observations.size());
        for (const auto& o : memory.observations) stored.push_back(o.pose);
        admit = sparse_memory_admit(world, observation.camera_pose, stored, memory.sparse, intr);
    }
    if (admit) memory.observations.push_back({step, summarize(observation), observation.camera_pose});
    memory.plans.push_back(plan);
    memory.actions.push_back(action);
}

std::string PlanState::render() const {
    std::ostringstream os;
    os << "Perception plan:";
    for (std::size_t i = 0; i < perception_plan.size(); ++i) os << " " << i + 1 << ". " << perception_plan[i] << ";";
    os << "\nRoute: start " << route.start << "; flight " << route.flight << "; end " << route.end;
    if (!progress_note.empty()) os << "\nProgress: " << progress_note;
    return os.str();
}

PlanState parse_plan(const std::string& text) {
    PlanState p;
    enum class Section { none, perception, route } section = Section::none;
    bool start = false, flight = false, end = false;
    std::istringstream in(text);
    for (std::string raw; std::getline(in, raw);) {
        const std::string line = strip_markup(raw);
        if (line.empty()) continue;
        if (auto v = field(line, "inference")) {
            p.inference = *v;
            section = Section::none;
        } else if (auto v = field(line, "perception plan")) {
            section = Section::perception;
            if (!v->empty()) p.perception_plan.push_back(*v);
        } else if (field(line, "route plan") || field(line, "route")) {
            section = Section::route;
        } else if (auto v = field(line, "start")) {
            p.route.start = *v;
            start = true;
        } else if (auto v = field(line, "flight")) {
            p.route.flight = *v;
            flight = true;
        } else if (auto v = field(line, "end")) {
            p.route.end = *v;
            end = true;
        } else if (auto v = field(line, "progress")) {
            p.progress_note = *v;
            section = Section::none;
        } else if (section == Section::perception) {
            p.perception_plan.push_back(line);
        }
    }
    if (p.perception_plan.empty()) {
        p.perception_plan = {"locate goal"};
        p.perception_fallback = true;
    }
    p.route_missing = !(start && flight && end);
    return p;
}

std::vector<CandidateOutcome> parse_candidates(const std::string& text) {
    std::vector<CandidateOutcome> out(kMotionActions.size());
    std::vector<bool> seen(kMotionActions.size(), false);
    static const std::regex score_re(R"(score\s*[:=]?\s*(-?\d+(?:\.\d+)?))", std::regex::icase);
    std::istringstream in(text);
    for (std::string raw; std::getline(in, raw);) {
        const std::string line = strip_markup(raw);
        if (line.empty()) continue;
        const auto colon = line.find(':');
        const std::string head = colon == std::string::npos ? line : line.substr(0, colon);
        const auto a = parse_action(head, false);
        if (!a) continue;
        const auto k = static_cast<std::size_t>(*a);
        if (seen[k]) continue;
        seen[k] = true;
        CandidateOutcome& c = out[k];
        c.action = *a;
        c.predicted_effect = colon == std::string::npos ? line : trim(line.substr(colon + 1));
        std::smatch m;
        if (std::regex_search(c.predicted_effect, m, score_re)) c.score_hint = std::stod(m[1].str());
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (seen[k]) continue;
        out[k].action = kMotionActions[k];
        out[k].predicted_effect = "unknown effect";
        out[k].backfilled = true;
    }
    return out;
}

std::string render_candidates(const std::vector<CandidateOutcome>& candidates) {
    std::ostringstream os;
    for (const auto& c : candidates) {
        os << to_string(c.action) << ": " << c.predicted_effect;
        if (c.score_hint && c.predicted_effect.find("score") == std::string::npos) os << " (score " << *c.score_hint << ")";
        os << "\n";
    }
    return os.str();
}

Decision parse_decision(const std::string& text) {
    Decision d;
    if (has_token(text, "GOAL_REACHED")) {
        d.action = Action::stop;
        d.goal_reached = true;
        d.confident = true;
        return d;
    }
    if (const auto a = parse_action(text, false)) {
        d.action = *a;
        d.confident = has_token(text, "CONFIDENT") && !has_token(text, "UNSURE");
    } else {
        d.fallback = true;
    }
    return d;
}

AgentPrompts AgentPrompts::load(const std::filesystem::path& dir) {
    AgentPrompts p;
    const std::pair<const char*, std::string*> files[] = {
        {"q_loc.txt", &p.localize}, {"q_plan.txt", &p.plan},     {"q_imgn.txt", &p.imagine},
        {"q_dm.txt", &p.decide},    {"q_active.txt", &p.active}, {"q_verify.txt", &p.verify}};
    if (!std::filesystem::is_directory(dir)) throw Error("prompt directory not found: " + dir.string());
    for (const auto& [name, slot] : files) {
        const auto path = dir / name;
        if (std::filesystem::exists(path)) *slot = read_file(path);
    }
    return p;
}

Agent::Agent(std::shared_ptr<Gateway> gateway, const CityWorld& world, AgentConfig cfg)
    : gateway_(std::move(gateway)), world_(&world), cfg_(std::move(cfg)) {
    if (!gateway_) throw Error("agent needs a gateway");
    if (cfg_.window < 2) throw Error("agent memory window must hold at least 2 moments");
    cfg_.sparse.validate();
    if (cfg_.enhancements.grounding && cfg_.target_label.empty())
        throw Error("grounding enhancement needs a target label");
}

void Agent::reset(const std::string& instruction, const SemanticObservation&) {
    instruction_ = instruction;
    memory_ = AgentMemory{};
    memory_.admission = cfg_.enhancements.sparse_memory ? MemoryAdmission::sparse : MemoryAdmission::all;
    memory_.sparse = cfg_.sparse;
    grounded_.reset();
    if (cfg_.enhancements.grounding) {
        grounded_.emplace(*world_, cfg_.target_label, cfg_.motion, cfg_.camera);
        grounded_->reset(instruction, {});
    }
}

std::string Agent::ask(RequestTag tag, const std::string& prompt) {
    GatewayRequest req;
    req.model = cfg_.model.empty() ? gateway_->default_model() : cfg_.model;
    req.tag = tag;
    req.messages.push_back(ChatMessage::user(prompt));
    return gateway_->complete(req);
}

std::string Agent::observation_text(const SemanticObservation& observation) const {
    if (cfg_.enhancements.crossview) return crossview_text(*world_, observation.camera_pose, cfg_.camera);
    const std::string d = describe(observation);
    return d.empty() ? "(nothing recognisable in view)" : d;
}

std::string Agent::history_text() const {
    if (memory_.steps() == 0) return "(no actions taken yet)";
    std::ostringstream os;
    auto obs = memory_.observations.begin();
    for (std::size_t t : select_window(memory_.steps(), cfg_.window)) {
        while (obs != memory_.observations.end() && obs->step < t) ++obs;
        os << "t=" << t << ": ";
        if (obs != memory_.observations.end() && obs->step == t) os << "saw " << normalize_text(obs->summary) << "; ";
        os << "action " << to_string(memory_.actions[t]) << "\n";
    }
    return os.str();
}

std::string Agent::localize(const std::string& observation_text) {
    const std::string prompt = fill_template(
        cfg_.prompts.localize,
        {{"instruction", instruction_}, {"history", history_text()}, {"observation", observation_text}});
    std::string reply = trim(ask(RequestTag::localize, prompt));
    return reply.empty() ? "(no localization)" : reply;
}

PlanState Agent::plan(const std::string& localization, const std::string& observation_text, double gimbal) {
    std::ostringstream g;
    g << gimbal;
    const std::string prompt = fill_template(cfg_.prompts.plan, {{"instruction", instruction_},
                                                                 {"gimbal", g.str()},
                                                                 {"localization", localization},
                                                                 {"observation", observation_text}});
    return parse_plan(ask(RequestTag::plan, prompt));
}

std::vector<CandidateOutcome> Agent::imagine(const PlanState& plan, const std::string& localization,
                                             const std::string& observation_text) {
    const std::string prompt = fill_template(cfg_.prompts.imagine, {{"instruction", instruction_},
                                                                    {"localization", localization},
                                                                    {"plan", plan.render()},
                                                                    {"observation", observation_text},
                                                                    {"commands", command_list()}});
    return parse_candidates(ask(RequestTag::imagine, prompt));
}

Decision Agent::decide(const std::vector<CandidateOutcome>& candidates, const PlanState& plan) {
    if (candidates.size() != kMotionActions.size()) throw Error("decide needs one candidate per motion command");
    const std::string prompt = fill_template(
        cfg_.prompts.decide,
        {{"instruction", instruction_}, {"plan", plan.render()}, {"candidates", render_candidates(candidates)}});
    return parse_decision(ask(RequestTag::decide, prompt));
}

Decision Agent::active_perceive(const PlanState& plan, const std::string& localization, const AgentPose& pose) {
    std::ostringstream views;
    for (const auto& v : probe_views(*world_, pose, cfg_.camera).views) {
        const std::string d = describe(v.observation);
        views << "[" << v.tag << " view]\n" << (d.empty() ? "(nothing recognisable in view)\n" : d);
    }
    const std::string prompt = fill_template(cfg_.prompts.active, {{"instruction", instruction_},
                                                                   {"localization", localization},
                                                                   {"plan", plan.render()},
                                                                   {"views", views.str()},
                                                                   {"commands", command_list()}});
    return parse_decision(ask(RequestTag::active_perception, prompt));
}

Action Agent::verify_with_simulator(Action proposed, const PlanState& plan, const AgentPose& pose) {
    std::vector<Action> order{proposed};
    for (Action a : kMotionActions)
        if (a != proposed) order.push_back(a);
    const Proposer proposer = [&order](int i) -> std::optional<Action> {
        if (static_cast<std::size_t>(i) >= order.size()) return std::nullopt;
        return order[static_cast<std::size_t>(i)];
    };
    static const std::regex score_re(R"(score\s*[:=]?\s*(-?\d+(?:\.\d+)?))", std::regex::icase);
    const Scorer scorer = [&](const ImaginedOutcome& o) -> Verdict {
        std::string predicted = describe(o.observation);
        if (predicted.empty()) predicted = "(nothing recognisable in view)";
        if (o.blocked) predicted = "(blocked by an obstacle; the drone would not move)\n" + predicted;
        const std::string prompt = fill_template(cfg_.prompts.verify, {{"instruction", instruction_},
                                                                       {"plan", plan.render()},
                                                                       {"action", std::string(to_string(o.action))},
                                                                       {"predicted", predicted}});
        const std::string reply = ask(RequestTag::imagine, prompt);
        Verdict v;
        v.accept = has_token(reply, "ACCEPT") && !has_token(reply, "REJECT");
        std::smatch m;
        v.score = std::regex_search(reply, m, score_re) ? std::stod(m[1].str()) : (v.accept ? 1.0 : 0.0);
        return v;
    };
    return imagination_loop(*world_, pose, proposer, scorer, cfg_.imagination_iters, cfg_.motion, cfg_.camera).action;
}

PolicyDecision Agent::next_action(const SemanticObservation& observation) {
    const AgentPose& pose = observation.camera_pose;
    try {
        if (grounded_) {
            if (auto g = grounded_->step_towards(pose)) {
                memory_update(memory_, *world_, observation, "grounded controller", g->action, cfg_.camera);
                return {g->action, "grounded: " + g->rationale};
            }
        }

        const std::string obs_text = observation_text(observation);
        const std::string loc = localize(obs_text);
        const PlanState p = plan(loc, obs_text, pose.gimbal);
        const auto candidates = imagine(p, loc, obs_text);
        Decision d = decide(candidates, p);

        std::ostringstream trace;
        trace << "loc: " << normalize_text(loc) << " | focus: " << p.perception_plan.front()
              << " | decide: " << (d.goal_reached ? "GOAL_REACHED" : std::string(to_string(d.action)))
              << (d.confident ? " CONFIDENT" : " UNSURE");
        if (d.fallback) trace << " (fallback)";
        if (!d.confident) {
            d = active_perceive(p, loc, pose);
            trace << " | active: " << (d.goal_reached ? "GOAL_REACHED" : std::string(to_string(d.action)));
            if (d.fallback) trace << " (fallback)";
        }
        if (cfg_.enhancements.imagination && d.action != Action::stop) {
            const Action verified = verify_with_simulator(d.action, p, pose);
            if (verified != d.action) trace << " | imagined: " << to_string(verified);
            d.action = verified;
        }
        memory_update(memory_, *world_, observation, p.render(), d.action, cfg_.camera);
        return {d.action, trace.str()};
    } catch (const GatewayError& e) {
        throw PolicyError(std::string("agent backend failure: ") + e.what());
    }
}

}  // namespace aerialnav
