#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aerialnav/episode.hpp"
#include "aerialnav/errors.hpp"
#include "aerialnav/scenario.hpp"

namespace aerialnav {

double success_rate(const std::vector<EpisodeLog>& logs);

/// Uses each log's optimal_length as l_i and its traveled length as g_i.
double spl(const std::vector<EpisodeLog>& logs);
double spl(const std::vector<EpisodeLog>& logs, const std::vector<double>& optimal_lengths);

double dtg(const std::vector<EpisodeLog>& logs);

enum class GroupingMode { trisect, paper_fixed };

GroupingMode grouping_mode_from_name(std::string_view s);

inline constexpr double kPaperShortBoundary = 118.2;
inline constexpr double kPaperLongBoundary = 223.6;

struct Grouping {
    double short_boundary = 0.0;  // short: length < short_boundary
    double long_boundary = 0.0;   // long: length > long_boundary
    std::array<std::vector<std::size_t>, 3> members;  // indices per LengthGroup
};

/// Linear-interpolation quantile of unsorted data, q in [0, 1].
double quantile(std::vector<double> values, double q);

Grouping group_episodes(const std::vector<double>& ground_truth_lengths, GroupingMode mode);

struct GroupMetrics {
    std::string name;
    std::size_t n = 0;
    // Empty when n == 0.
    std::optional<double> sr;
    std::optional<double> spl;
    std::optional<double> dtg;
};

struct MetricReport {
    double short_boundary = 0.0;
    double long_boundary = 0.0;
    std::vector<GroupMetrics> rows;  // short, middle, long, average
};

MetricReport evaluate(const std::vector<EpisodeLog>& logs, GroupingMode mode);

/// Columns group,n,SR,SPL,DTG with SR and SPL in percent.
std::string to_csv(const MetricReport& report);
nlohmann::json to_json(const MetricReport& report);

/// r_t = d_t / d_0 over the log's distance series.
std::vector<double> progress_curve(const EpisodeLog& log);
std::vector<double> progress_curve(const std::vector<double>& distances);

/// Columns step,r_t,completion_pct.
std::string progress_csv(const std::vector<double>& ratios);

struct CdbResult {
    bool found = false;
    std::size_t t_star = 0;
    double pre_slope = 0.0;   // metres per step over [0, t*]
    double post_slope = 0.0;  // metres per step over [t*, T]
    std::vector<double> progress;
};

/// Least-squares slope of values[first..last] against their index.
double fitted_slope(const std::vector<double>& values, std::size_t first, std::size_t last);

CdbResult detect_cdb(const std::vector<double>& distances, bool failed, double tol = 0.0);
CdbResult detect_cdb(const EpisodeLog& log, double tol = 0.0);

struct DatasetStats {
    std::size_t scenarios = 0;
    double mean_length = 0.0;
    double bin_width = 25.0;
    std::vector<std::size_t> length_histogram;
    double horizontal_share = 0.0;
    double vertical_share = 0.0;
    double rotation_share = 0.0;
    /// Goal minus start in the start heading frame (x forward, y left, z up).
    std::vector<Vec3> displacements;
};

DatasetStats dataset_stats(const std::vector<Scenario>& scenarios, double bin_width = 25.0);
nlohmann::json to_json(const DatasetStats& s);

}  // namespace aerialnav
