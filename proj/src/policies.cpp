#include "aerialnav/policies.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <regex>
#include <sstream>

#include "aerialnav/prompts.hpp"

namespace aerialnav {

std::vector<std::size_t> select_window(std::size_t history_length, std::size_t capacity) {
    capacity = std::max<std::size_t>(capacity, 2);
    std::vector<std::size_t> out;
    if (history_length <= capacity) {
        out.resize(history_length);
        for (std::size_t i = 0; i < history_length; ++i) out[i] = i;
        return out;
    }
    out.reserve(capacity);
    const double span = static_cast<double>(history_length - 1) / static_cast<double>(capacity - 1);
    for (std::size_t k = 0; k < capacity; ++k) {
        const auto idx = static_cast<std::size_t>(std::llround(static_cast<double>(k) * span));
        if (out.empty() || out.back() != idx) out.push_back(idx);
    }
    return out;
}

// --- Parsing -------------------------------------------------------------------

namespace {

std::optional<Action> match_command(const std::string& verb, const std::string& dir) {
    if (verb == "move") {
        if (dir == "forth" || dir == "forward") return Action::move_forth;
        if (dir == "back" || dir == "backward") return Action::move_back;
        if (dir == "left") return Action::move_left;
        if (dir == "right") return Action::move_right;
        if (dir == "up") return Action::move_up;
        if (dir == "down") return Action::move_down;
    } else if (verb == "turn") {
        if (dir == "left") return Action::turn_left;
        if (dir == "right") return Action::turn_right;
    } else if (verb == "gimbal" || verb == "angle") {
        if (dir == "up") return Action::gimbal_up;
        if (dir == "down") return Action::gimbal_down;
    }
    return std::nullopt;
}

std::optional<Action> first_command(const std::string& text, bool allow_stop) {
    static const std::regex re(
        R"((?:^|[^a-z])(move|turn|gimbal|angle)[\s_\-]*(forward|forth|backward|back|left|right|up|down)(?![a-z])|(?:^|[^a-z])(stop)(?![a-z]))",
        std::regex::icase | std::regex::ECMAScript);
    for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        if (m[3].matched) {
            if (allow_stop) return Action::stop;
            continue;
        }
        std::string verb = m[1].str(), dir = m[2].str();
        std::transform(verb.begin(), verb.end(), verb.begin(), [](unsigned char c) { return std::tolower(c); });
        std::transform(dir.begin(), dir.end(), dir.begin(), [](unsigned char c) { return std::tolower(c); });
        if (auto a = match_command(verb, dir)) return a;
    }
    return std::nullopt;
}

}  // namespace

std::optional<Action> parse_action(std::string_view text, bool allow_stop) {
    const std::string s(text);
    // Explicit "Action: ..." lines win over mentions in free text.
    static const std::regex action_line(R"((?:^|\n)\s*\**\s*action\s*\**\s*[:=]\s*([^\n]*))", std::regex::icase);
    std::smatch m;
    if (std::regex_search(s, m, action_line)) {
        if (auto a = first_command(m[1].str(), allow_stop)) return a;
    }
    return first_command(s, allow_stop);
}

std::string summarize(const SemanticObservation& obs, std::size_t max_lines) {
    std::istringstream in(describe(obs));
    std::ostringstream out;
    std::string line;
    std::size_t n = 0, total = obs.entities.size();
    // Landmarks first: they carry the goal-relevant semantics.
    std::vector<std::string> landmark_lines, other_lines;
    while (std::getline(in, line)) {
        if (n < total && obs.entities[n].kind == EntityKind::landmark) {
            landmark_lines.push_back(line);
        } else {
            other_lines.push_back(line);
        }
        ++n;
    }
    std::size_t written = 0;
    for (const auto* group : {&landmark_lines, &other_lines}) {
        for (const auto& l : *group) {
            if (written == max_lines) break;
            out << l << "\n";
            ++written;
        }
    }
    if (total > written) out << "(+" << (total - written) << " more)\n";
    return out.str();
}

// --- Random / sampling ----------------------------------------------------------

PolicyDecision RandomPolicy::next_action(const SemanticObservation&) {
    std::uniform_int_distribution<std::size_t> pick(0, kMotionActions.size() - 1);
    return {kMotionActions[pick(rng_)], "uniform random"};
}

const std::vector<Action>& ActionSamplingPolicy::members(ActionCategory c) {
    static const std::vector<Action> horizontal = {Action::move_forth, Action::move_back, Action::move_left,
                                                   Action::move_right};
    static const std::vector<Action> vertical = {Action::move_up, Action::move_down};
    static const std::vector<Action> rotation = {Action::turn_left, Action::turn_right, Action::gimbal_up,
                                                 Action::gimbal_down};
    switch (c) {
        case ActionCategory::horizontal: return horizontal;
        case ActionCategory::vertical: return vertical;
        default: return rotation;
    }
}

PolicyDecision ActionSamplingPolicy::next_action(const SemanticObservation&) {
    std::discrete_distribution<int> cat({kHorizontalShare, kVerticalShare, kRotationShare});
    const auto& group = members(static_cast<ActionCategory>(cat(rng_)));
    std::uniform_int_distribution<std::size_t> pick(0, group.size() - 1);
    return {group[pick(rng_)], "sampled from action prior"};
}

// --- Oracle -------------------------------------------------------------------

OraclePolicy::OraclePolicy(const CityWorld& world, const Vec3& goal, double epsilon, MotionConfig cfg)
    : world_(&world), goal_(goal), epsilon_(epsilon), cfg_(cfg) {}

OraclePolicy::OraclePolicy(const CityWorld& world, std::shared_ptr<const PathField> field, double epsilon,
                           MotionConfig cfg)
    : world_(&world), goal_(field->goal()), epsilon_(epsilon), cfg_(cfg), field_(std::move(field)) {}

void OraclePolicy::reset(const std::string&, const SemanticObservation& initial) {
    if (!field_) field_ = std::make_shared<const PathField>(*world_, goal_, cfg_);
    first_step_ = true;
    if (!std::isfinite(field_->remaining(initial.camera_pose.position))) {
        throw NoPathError("oracle: goal unreachable from start");
    }
}

PolicyDecision OraclePolicy::next_action(const SemanticObservation& observation) {
    PolicyDecision d = decide(observation.camera_pose, first_step_);
    first_step_ = false;
    return d;
}

PolicyDecision OraclePolicy::decide(const AgentPose& pose, bool first_step) const {
    if (!field_) throw Error("oracle used before reset");
    const double d = distance_to_goal(pose, goal_);
    if (first_step && d <= epsilon_) return {Action::stop, "goal already within success radius"};

    const double here = field_->remaining(pose.position);
    constexpr double kInf = std::numeric_limits<double>::infinity();

    // Horizontal candidates: every heading reachable by turning, fewest turns first.
    const int headings = std::max(1, static_cast<int>(std::lround(360.0 / cfg_.turn_step)));
    std::vector<int> order{0};
    for (int k = 1; 2 * k <= headings; ++k) {
        order.push_back(k);
        if (headings - k != k) order.push_back(headings - k);
    }
    double best_h = kInf;
    int best_k = 0;
    for (int k : order) {
        const Vec3 step = snap_position(heading_vector(pose.yaw + k * cfg_.turn_step) * cfg_.translation_step);
        const Vec3 next = pose.position + step;
        if (!segment_free(*world_, pose.position, next, cfg_.safety_radius)) continue;
        const double v = field_->remaining(next);
        if (v < best_h - 1e-9) {
            best_h = v;
            best_k = k;
        }
    }
    double best_v = kInf;
    Action vertical = Action::move_up;
    for (Action a : {Action::move_up, Action::move_down}) {
        const StepResult r = apply_action(pose, a, *world_, cfg_);
        if (r.blocked) continue;
        const double v = field_->remaining(r.pose.position);
        if (v < best_v - 1e-9) {
            best_v = v;
            vertical = a;
        }
    }

    const double best = std::min(best_h, best_v);
    const double gain = here - best;
    const double min_gain = 0.5 * std::min(cfg_.translation_step, cfg_.vertical_step);
    if (d <= epsilon_ && !(gain >= min_gain)) return {Action::stop, "within success radius"};
    if (!std::isfinite(best) || gain <= 1e-9) {
        return {Action::move_up, "no command reduces the remaining path; climbing"};
    }

    std::ostringstream why;
    why.precision(1);
    why << std::fixed << "remaining path " << here << " m";
    if (best_v < best_h) return {vertical, why.str()};
    if (best_k == 0) return {Action::move_forth, why.str()};
    return {2 * best_k <= headings ? Action::turn_left : Action::turn_right, why.str() + ", aligning heading"};
}

// --- Language policy --------------------------------------------------------------

std::vector<const MemoryEntry*> MemoryWindow::window() const {
    std::vector<const MemoryEntry*> out;
    for (std::size_t i : select_window(history_.size(), capacity_)) out.push_back(&history_[i]);
    return out;
}

const char* const kLanguagePolicyTemplate = prompts::language;

std::string fill_template(std::string tpl, const std::vector<std::pair<std::string, std::string>>& values) {
    for (const auto& [key, value] : values) {
        const std::string ph = "{" + key + "}";
        for (std::size_t pos = tpl.find(ph); pos != std::string::npos; pos = tpl.find(ph, pos + value.size())) {
            tpl.replace(pos, ph.size(), value);
        }
    }
    return tpl;
}

std::string command_list() {
    return "move_forth, move_back, move_left, move_right (10 m horizontal), move_up, move_down (10 m vertical), "
           "turn_left, turn_right (22.5 degrees), gimbal_up, gimbal_down (45 degrees), stop (declare arrival)";
}

std::string render_memory(const MemoryWindow& memory) {
    if (memory.history_size() == 0) return "(no actions taken yet)";
    std::ostringstream os;
    const auto idx = select_window(memory.history_size(), memory.capacity());
    const auto entries = memory.window();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto* e = entries[i];
        os << "t=" << idx[i] << ": action " << to_string(e->action);
        if (!e->rationale.empty()) os << " (" << e->rationale << ")";
        os << "\n  saw: " << normalize_text(e->observation) << "\n";
    }
    return os.str();
}

LanguagePolicy::LanguagePolicy(std::shared_ptr<Gateway> gateway, std::string prompt_template, std::string model)
    : gateway_(std::move(gateway)), template_(std::move(prompt_template)), model_(std::move(model)) {}

void LanguagePolicy::reset(const std::string& instruction, const SemanticObservation&) {
    instruction_ = instruction;
    memory_.clear();
}

std::string LanguagePolicy::ask(const std::string& prompt) {
    GatewayRequest req;
    req.model = model_;
    req.tag = RequestTag::plain;
    req.messages.push_back(ChatMessage::user(prompt));
    try {
        return gateway_->complete(req);
    } catch (const GatewayError& e) {
        throw PolicyError(std::string("language policy backend failure: ") + e.what());
    }
}

PolicyDecision LanguagePolicy::next_action(const SemanticObservation& observation) {
    std::ostringstream gimbal;
    gimbal << observation.camera_pose.gimbal;
    const std::string obs_text = formatter_ ? formatter_(observation) : describe(observation);
    const std::string prompt = fill_template(template_, {{"instruction", instruction_},
                                                         {"gimbal", gimbal.str()},
                                                         {"commands", command_list()},
                                                         {"memory", render_memory(memory_)},
                                                         {"observation", obs_text}});
    std::string reply = ask(prompt);
    std::optional<Action> action = parse_action(reply);
    if (!action) {
        reply = ask(prompt + "\n\nYour previous reply did not contain a valid command. Reply with exactly one command "
                             "from the list on a line starting with \"Action:\".");
        action = parse_action(reply);
    }
    PolicyDecision d;
    if (action) {
        d = {*action, normalize_text(reply)};
    } else {
        d = {Action::move_forth, "parse-failure fallback"};
    }
    memory_.push({summarize(observation), d.action, d.rationale});
    return d;
}

}  // namespace aerialnav
