#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "aerialnav/episode.hpp"
#include "aerialnav/gateway.hpp"

namespace aerialnav {

inline constexpr int kMemoryWindowCapacity = 30;

/// Uniformly spaced history indices; first and last always kept. capacity >= 2.
std::vector<std::size_t> select_window(std::size_t history_length, std::size_t capacity = kMemoryWindowCapacity);

/// Finds the first command in free text. Case-insensitive; accepts underscores,
/// spaces, hyphens or nothing between words, and the aliases forward, backward,
/// angle_up and angle_down. A line starting with "action:" takes precedence.
std::optional<Action> parse_action(std::string_view text, bool allow_stop = true);

/// Compact text summary of an observation used in memory and prompts.
std::string summarize(const SemanticObservation& obs, std::size_t max_lines = 6);

/// Uniform over the ten motion commands; never stops on its own.
class RandomPolicy : public Policy {
public:
    explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
    std::string name() const override { return "random"; }
    void reset(const std::string&, const SemanticObservation&) override {}
    PolicyDecision next_action(const SemanticObservation&) override;

private:
    std::mt19937_64 rng_;
};

/// Draws a category with the dataset-level proportions, then a command uniformly
/// within it.
class ActionSamplingPolicy : public Policy {
public:
    static constexpr double kHorizontalShare = 0.450;
    static constexpr double kVerticalShare = 0.282;
    static constexpr double kRotationShare = 0.268;

    explicit ActionSamplingPolicy(std::uint64_t seed) : rng_(seed) {}
    std::string name() const override { return "sampling"; }
    void reset(const std::string&, const SemanticObservation&) override {}
    PolicyDecision next_action(const SemanticObservation&) override;

    static const std::vector<Action>& members(ActionCategory c);

private:
    std::mt19937_64 rng_;
};

/// Greedy follower of the geodesic distance field; the stand-in for a human pilot.
/// Aligns its heading by turning, then flies forward or vertically, and stops inside
/// the success radius once no single command gains at least half a step.
class OraclePolicy : public Policy {
public:
    /// The world must outlive the policy.
    OraclePolicy(const CityWorld& world, const Vec3& goal, double epsilon, MotionConfig cfg = {});
    /// Reuses a precomputed field for the same world and goal.
    OraclePolicy(const CityWorld& world, std::shared_ptr<const PathField> field, double epsilon,
                 MotionConfig cfg = {});

    std::string name() const override { return "oracle"; }
    void reset(const std::string& instruction, const SemanticObservation& initial) override;
    PolicyDecision next_action(const SemanticObservation& observation) override;

    /// The decision for an arbitrary pose, without episode bookkeeping.
    PolicyDecision decide(const AgentPose& pose, bool first_step) const;

private:
    const CityWorld* world_;
    Vec3 goal_;
    double epsilon_;
    MotionConfig cfg_;
    std::shared_ptr<const PathField> field_;
    bool first_step_ = true;
};

struct MemoryEntry {
    std::string observation;
    Action action = Action::stop;
    std::string rationale;
};

/// Bounded view over the full history using select_window.
class MemoryWindow {
public:
    explicit MemoryWindow(std::size_t capacity = kMemoryWindowCapacity) : capacity_(capacity) {}

    void push(MemoryEntry e) { history_.push_back(std::move(e)); }
    std::vector<const MemoryEntry*> window() const;
    std::size_t history_size() const { return history_.size(); }
    std::size_t capacity() const { return capacity_; }
    void clear() { history_.clear(); }

private:
    std::size_t capacity_;
    std::vector<MemoryEntry> history_;
};

/// Default prompt for the plain action-as-language policy. Placeholders:
/// {instruction} {gimbal} {memory} {observation} {commands}.
extern const char* const kLanguagePolicyTemplate;

std::string fill_template(std::string tpl, const std::vector<std::pair<std::string, std::string>>& values);

/// The command list shown to language models.
std::string command_list();

class LanguagePolicy : public Policy {
public:
    LanguagePolicy(std::shared_ptr<Gateway> gateway, std::string prompt_template = kLanguagePolicyTemplate,
                   std::string model = {});

    std::string name() const override { return "lmm"; }
    bool requires_backend() const override { return true; }
    void reset(const std::string& instruction, const SemanticObservation& initial) override;
    PolicyDecision next_action(const SemanticObservation& observation) override;

    /// Swaps the single observation for an observation text of the caller's choice
    /// (the cross-view enhancement feeds a six-view panorama here).
    void set_observation_formatter(std::function<std::string(const SemanticObservation&)> f) {
        formatter_ = std::move(f);
    }

private:
    std::string ask(const std::string& prompt);

    std::shared_ptr<Gateway> gateway_;
    std::string template_;
    std::string model_;
    std::string instruction_;
    MemoryWindow memory_;
    std::function<std::string(const SemanticObservation&)> formatter_;
};

std::string render_memory(const MemoryWindow& memory);

}  // namespace aerialnav
