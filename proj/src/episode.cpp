#include "aerialnav/episode.hpp"

#include <fstream>
#include <sstream>

#include "aerialnav/errors.hpp"

namespace aerialnav {

using nlohmann::json;

void EpisodeConfig::validate() const {
    if (max_steps < 1) throw Error("max_steps must be at least 1");
    if (epsilon && !(*epsilon > 0.0)) throw Error("epsilon must be positive");
    motion.validate();
}

std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::success: return "success";
        case Outcome::failure_timeout: return "failure_timeout";
        case Outcome::failure_stopped_far: return "failure_stopped_far";
    }
    return "failure_timeout";
}

Outcome outcome_from_name(std::string_view s) {
    if (s == "success") return Outcome::success;
    if (s == "failure_timeout") return Outcome::failure_timeout;
    if (s == "failure_stopped_far") return Outcome::failure_stopped_far;
    throw Error("unknown outcome '" + std::string(s) + "'");
}

std::vector<double> EpisodeLog::distance_series() const {
    std::vector<double> d{initial_distance};
    for (const auto& s : steps) d.push_back(s.distance_to_goal);
    return d;
}

std::vector<Vec3> EpisodeLog::positions() const {
    std::vector<Vec3> p{start.position};
    for (const auto& s : steps) p.push_back(s.pose.position);
    return p;
}

double EpisodeLog::traveled_length() const {
    double total = 0.0;
    Vec3 prev = start.position;
    for (const auto& s : steps) {
        total += distance(prev, s.pose.position);
        prev = s.pose.position;
    }
    return total;
}

EpisodeSession::EpisodeSession(const Scenario& scenario, EpisodeConfig cfg, std::string policy_name)
    : scenario_(&scenario), cfg_(std::move(cfg)), pose_(scenario.start) {
    cfg_.validate();
    log_.scenario_id = scenario.id;
    log_.policy = std::move(policy_name);
    log_.start = scenario.start;
    log_.goal = scenario.goal.position;
    log_.epsilon = cfg_.epsilon.value_or(scenario.goal.epsilon);
    log_.optimal_length = scenario.ground_truth.length;
    log_.initial_distance = distance_to_goal(pose_, log_.goal);
    log_.max_steps = cfg_.max_steps;
    log_.seed = cfg_.seed;
    log_.final_distance = log_.initial_distance;
}

SemanticObservation EpisodeSession::observe() const {
    SemanticObservation obs = render(scenario_->world, pose_, cfg_.camera);
    obs.timestamp = step_count();
    return obs;
}

double EpisodeSession::distance() const { return distance_to_goal(pose_, log_.goal); }

const StepRecord& EpisodeSession::step(Action action, std::string rationale, std::vector<std::string> observed) {
    if (done()) throw Error("episode already finished");
    StepRecord rec;
    rec.index = step_count();
    rec.action = action;
    rec.rationale = std::move(rationale);
    rec.observed = std::move(observed);
    if (action != Action::stop) {
        const StepResult r = apply_action(pose_, action, scenario_->world, cfg_.motion);
        pose_ = r.pose;
        rec.blocked = r.blocked;
    }
    rec.pose = pose_;
    rec.distance_to_goal = distance();
    log_.steps.push_back(std::move(rec));
    log_.final_distance = log_.steps.back().distance_to_goal;

    if (action == Action::stop) {
        finish(true);
    } else if (step_count() >= cfg_.max_steps) {
        finish(false);
    }
    return log_.steps.back();
}

void EpisodeSession::finish(bool stopped) {
    const bool within = log_.final_distance <= log_.epsilon;
    if (within) {
        log_.outcome = Outcome::success;
    } else {
        log_.outcome = stopped ? Outcome::failure_stopped_far : Outcome::failure_timeout;
    }
    log_.complete = true;
}

void EpisodeSession::abort(const std::string& reason) {
    if (done()) return;
    log_.error = reason;
    log_.outcome = Outcome::failure_timeout;
    log_.final_distance = distance();
    log_.complete = true;
}

EpisodeLog run_episode(const Scenario& scenario, Policy& policy, const EpisodeConfig& cfg) {
    EpisodeSession session(scenario, cfg, policy.name());
    try {
        SemanticObservation obs = session.observe();
        policy.reset(scenario.goal.instruction, obs);
        while (!session.done()) {
            PolicyDecision d = policy.next_action(obs);
            std::vector<std::string> seen;
            for (const auto& e : obs.entities)
                if (e.kind == EntityKind::landmark) seen.push_back(e.label);
            session.step(d.action, std::move(d.rationale), std::move(seen));
            if (!session.done()) obs = session.observe();
        }
    } catch (const PolicyError& e) {
        session.abort(e.what());
    }
    return session.log();
}

// ---------------------------------------------------------------------------
// JSONL persistence

json to_json(const EpisodeLog& log) {
    json steps = json::array();
    for (const auto& s : log.steps) {
        steps.push_back({{"t", s.index},
                         {"action", std::string(to_string(s.action))},
                         {"blocked", s.blocked},
                         {"pose", to_json(s.pose)},
                         {"distance", s.distance_to_goal},
                         {"rationale", s.rationale},
                         {"observed", s.observed}});
    }
    json j{{"scenario_id", log.scenario_id},
           {"policy", log.policy},
           {"start", to_json(log.start)},
           {"goal", to_json(log.goal)},
           {"epsilon", log.epsilon},
           {"optimal_length", log.optimal_length},
           {"initial_distance", log.initial_distance},
           {"max_steps", log.max_steps},
           {"seed", log.seed},
           {"steps", std::move(steps)},
           {"outcome", std::string(to_string(log.outcome))},
           {"final_distance", log.final_distance},
           {"complete", log.complete}};
    if (log.error) j["error"] = *log.error;
    return j;
}

void write_episode_log(const EpisodeLog& log, std::ostream& out) {
    json header{{"type", "header"},
                {"scenario_id", log.scenario_id},
                {"policy", log.policy},
                {"start", to_json(log.start)},
                {"goal", to_json(log.goal)},
                {"epsilon", log.epsilon},
                {"optimal_length", log.optimal_length},
                {"initial_distance", log.initial_distance},
                {"max_steps", log.max_steps},
                {"seed", log.seed}};
    out << header.dump() << "\n";
    for (const auto& s : log.steps) {
        json step{{"type", "step"},
                  {"t", s.index},
                  {"action", std::string(to_string(s.action))},
                  {"blocked", s.blocked},
                  {"pose", to_json(s.pose)},
                  {"distance", s.distance_to_goal},
                  {"rationale", s.rationale},
                  {"observed", s.observed}};
        out << step.dump() << "\n";
    }
    if (log.complete) {
        json summary{{"type", "summary"},
                     {"outcome", std::string(to_string(log.outcome))},
                     {"final_distance", log.final_distance},
                     {"steps", log.steps.size()}};
        if (log.error) summary["error"] = *log.error;
        out << summary.dump() << "\n";
    }
}

void save_episode_log(const EpisodeLog& log, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error("cannot write " + tmp.string());
        write_episode_log(log, out);
    }
    std::filesystem::rename(tmp, path);
}

EpisodeLog read_episode_log(std::istream& in) {
    EpisodeLog log;
    std::string line;
    bool have_header = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw SchemaError("line " + std::to_string(lineno), e.what());
        }
        const std::string type = j.value("type", "");
        const std::string where = "line " + std::to_string(lineno);
        if (type == "header") {
            log.scenario_id = j.at("scenario_id").get<std::string>();
            log.policy = j.at("policy").get<std::string>();
            log.start = pose_from_json(j.at("start"), where + ".start");
            log.goal = vec3_from_json(j.at("goal"), where + ".goal");
            log.epsilon = j.at("epsilon").get<double>();
            log.optimal_length = j.at("optimal_length").get<double>();
            log.initial_distance = j.at("initial_distance").get<double>();
            log.max_steps = j.at("max_steps").get<int>();
            log.seed = j.at("seed").get<std::uint64_t>();
            log.final_distance = log.initial_distance;
            have_header = true;
        } else if (type == "step") {
            if (!have_header) throw SchemaError(where, "step before header");
            StepRecord s;
            s.index = j.at("t").get<int>();
            auto a = action_from_name(j.at("action").get<std::string>());
            if (!a) throw SchemaError(where + ".action", "unknown action");
            s.action = *a;
            s.blocked = j.at("blocked").get<bool>();
            s.pose = pose_from_json(j.at("pose"), where + ".pose");
            s.distance_to_goal = j.at("distance").get<double>();
            s.rationale = j.value("rationale", "");
            s.observed = j.value("observed", std::vector<std::string>{});
            log.final_distance = s.distance_to_goal;
            log.steps.push_back(std::move(s));
        } else if (type == "summary") {
            log.outcome = outcome_from_name(j.at("outcome").get<std::string>());
            log.final_distance = j.at("final_distance").get<double>();
            if (j.contains("error")) log.error = j["error"].get<std::string>();
            log.complete = true;
        } else {
            throw SchemaError(where + ".type", "unknown record type '" + type + "'");
        }
    }
    if (!have_header) throw SchemaError("line 1", "missing header");
    return log;
}

EpisodeLog load_episode_log(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    return read_episode_log(in);
}

}  // namespace aerialnav
