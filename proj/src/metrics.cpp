#include "aerialnav/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace aerialnav {

double success_rate(const std::vector<EpisodeLog>& logs) {
    if (logs.empty()) throw EmptySetError();
    std::size_t ok = 0;
    for (const auto& l : logs) ok += l.success() ? 1 : 0;
    return static_cast<double>(ok) / logs.size();
}

double spl(const std::vector<EpisodeLog>& logs, const std::vector<double>& optimal_lengths) {
    if (logs.empty()) throw EmptySetError();
    if (optimal_lengths.size() != logs.size()) throw Error("spl: one optimal length per log is required");
    double sum = 0.0;
    for (std::size_t i = 0; i < logs.size(); ++i) {
        const double l = optimal_lengths[i];
        if (!(l > 0.0)) throw Error("spl: optimal length must be positive for " + logs[i].scenario_id);
        if (!logs[i].success()) continue;
        sum += l / std::max(l, logs[i].traveled_length());
    }
    return sum / logs.size();
}

double spl(const std::vector<EpisodeLog>& logs) {
    std::vector<double> lengths;
    lengths.reserve(logs.size());
    for (const auto& l : logs) lengths.push_back(l.optimal_length);
    return spl(logs, lengths);
}

double dtg(const std::vector<EpisodeLog>& logs) {
    if (logs.empty()) throw EmptySetError();
    double sum = 0.0;
    for (const auto& l : logs) sum += l.final_distance;
    return sum / logs.size();
}

GroupingMode grouping_mode_from_name(std::string_view s) {
    if (s == "trisect") return GroupingMode::trisect;
    if (s == "paper_fixed") return GroupingMode::paper_fixed;
    throw Error("unknown grouping mode: " + std::string(s));
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw EmptySetError();
    std::sort(v.begin(), v.end());
    const double pos = q * (v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

Grouping group_episodes(const std::vector<double>& lengths, GroupingMode mode) {
    Grouping g;
    if (mode == GroupingMode::paper_fixed) {
        g.short_boundary = kPaperShortBoundary;
        g.long_boundary = kPaperLongBoundary;
    } else if (!lengths.empty()) {
        g.short_boundary = quantile(lengths, 1.0 / 3.0);
        g.long_boundary = quantile(lengths, 2.0 / 3.0);
    }
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        const double x = lengths[i];
        const int k = x < g.short_boundary ? 0 : (x > g.long_boundary ? 2 : 1);
        g.members[k].push_back(i);
    }
    return g;
}

namespace {

GroupMetrics metrics_for(std::string name, const std::vector<EpisodeLog>& logs) {
    GroupMetrics m;
    m.name = std::move(name);
    m.n = logs.size();
    if (!logs.empty()) {
        m.sr = success_rate(logs);
        m.spl = spl(logs);
        m.dtg = dtg(logs);
    }
    return m;
}

std::string fmt(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

}  // namespace

MetricReport evaluate(const std::vector<EpisodeLog>& logs, GroupingMode mode) {
    std::vector<double> lengths;
    for (const auto& l : logs) lengths.push_back(l.optimal_length);
    const Grouping g = group_episodes(lengths, mode);
    MetricReport r;
    r.short_boundary = g.short_boundary;
    r.long_boundary = g.long_boundary;
    const char* names[] = {"short", "middle", "long"};
    for (int k = 0; k < 3; ++k) {
        std::vector<EpisodeLog> subset;
        for (auto i : g.members[k]) subset.push_back(logs[i]);
        r.rows.push_back(metrics_for(names[k], subset));
    }
    r.rows.push_back(metrics_for("average", logs));
    return r;
}

std::string to_csv(const MetricReport& report) {
    std::ostringstream os;
    os << "group,n,SR,SPL,DTG\n";
    for (const auto& row : report.rows) {
        os << row.name << ',' << row.n << ',';
        os << (row.sr ? fmt(100.0 * *row.sr, 2) : "") << ',';
        os << (row.spl ? fmt(100.0 * *row.spl, 2) : "") << ',';
        os << (row.dtg ? fmt(*row.dtg, 2) : "") << '\n';
    }
    return os.str();
}

nlohmann::json to_json(const MetricReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : report.rows) {
        nlohmann::json j{{"group", row.name}, {"n", row.n}};
        j["SR"] = row.sr ? nlohmann::json(*row.sr) : nlohmann::json();
        j["SPL"] = row.spl ? nlohmann::json(*row.spl) : nlohmann::json();
        j["DTG"] = row.dtg ? nlohmann::json(*row.dtg) : nlohmann::json();
        rows.push_back(j);
    }
    return {{"short_boundary", report.short_boundary}, {"long_boundary", report.long_boundary}, {"rows", rows}};
}

std::vector<double> progress_curve(const std::vector<double>& d) {
    if (d.empty() || d.front() <= 1e-9) throw DegenerateStartError();
    std::vector<double> r;
    r.reserve(d.size());
    for (double x : d) r.push_back(x / d.front());
    return r;
}

std::vector<double> progress_curve(const EpisodeLog& log) { return progress_curve(log.distance_series()); }

std::string progress_csv(const std::vector<double>& ratios) {
    std::ostringstream os;
    os << "step,r_t,completion_pct\n";
    for (std::size_t t = 0; t < ratios.size(); ++t)
        os << t << ',' << fmt(ratios[t], 6) << ',' << fmt(100.0 * (1.0 - ratios[t]), 4) << '\n';
    return os.str();
}

double fitted_slope(const std::vector<double>& v, std::size_t first, std::size_t last) {
    if (last <= first) return 0.0;
    const double n = static_cast<double>(last - first + 1);
    double sx = 0, sy = 0;
    for (std::size_t i = first; i <= last; ++i) {
        sx += i;
        sy += v[i];
    }
    const double mx = sx / n, my = sy / n;
    double num = 0, den = 0;
    for (std::size_t i = first; i <= last; ++i) {
        num += (i - mx) * (v[i] - my);
        den += (i - mx) * (i - mx);
    }
    return num / den;
}

CdbResult detect_cdb(const std::vector<double>& d, bool failed, double tol) {
    if (d.size() < 2) throw Error("detect_cdb needs at least two distances");
    CdbResult r;
    if (d.front() > 1e-9) r.progress = progress_curve(d);
    if (!failed) return r;
    const std::size_t T = d.size() - 1;
    // Earliest start of the non-decreasing (within tol) suffix.
    std::size_t start = T;
    while (start > 0 && d[start] >= d[start - 1] - tol) --start;
    for (std::size_t t = start; t < T; ++t) {
        if (d[T] > d[t] + tol) {
            r.found = true;
            r.t_star = t;
            r.pre_slope = fitted_slope(d, 0, t);
            r.post_slope = fitted_slope(d, t, T);
            break;
        }
    }
    return r;
}

CdbResult detect_cdb(const EpisodeLog& log, double tol) {
    return detect_cdb(log.distance_series(), !log.success(), tol);
}

DatasetStats dataset_stats(const std::vector<Scenario>& scenarios, double bin_width) {
    if (scenarios.empty()) throw EmptySetError();
    DatasetStats s;
    s.scenarios = scenarios.size();
    s.bin_width = bin_width;
    std::size_t counts[3] = {0, 0, 0};
    double total = 0.0;
    for (const auto& sc : scenarios) {
        const double len = sc.ground_truth.length;
        total += len;
        const auto bin = static_cast<std::size_t>(std::max(0.0, len) / bin_width);
        if (s.length_histogram.size() <= bin) s.length_histogram.resize(bin + 1, 0);
        ++s.length_histogram[bin];
        for (Action a : sc.ground_truth.actions) {
            if (a == Action::stop) continue;
            ++counts[static_cast<int>(category_of(a))];
        }
        const Vec3 d = sc.goal.position - sc.start.position;
        const double y = deg2rad(sc.start.yaw);
        s.displacements.push_back({d.x * std::cos(y) + d.y * std::sin(y), -d.x * std::sin(y) + d.y * std::cos(y), d.z});
    }
    s.mean_length = total / scenarios.size();
    const double n = static_cast<double>(counts[0] + counts[1] + counts[2]);
    if (n > 0) {
        s.horizontal_share = counts[static_cast<int>(ActionCategory::horizontal)] / n;
        s.vertical_share = counts[static_cast<int>(ActionCategory::vertical)] / n;
        s.rotation_share = counts[static_cast<int>(ActionCategory::rotation)] / n;
    }
    return s;
}

nlohmann::json to_json(const DatasetStats& s) {
    nlohmann::json disp = nlohmann::json::array();
    for (const auto& d : s.displacements) disp.push_back({d.x, d.y, d.z});
    return {{"scenarios", s.scenarios},
            {"mean_length", s.mean_length},
            {"bin_width", s.bin_width},
            {"length_histogram", s.length_histogram},
            {"action_shares",
             {{"horizontal", s.horizontal_share}, {"vertical", s.vertical_share}, {"rotation", s.rotation_share}}},
            {"displacements", disp}};
}

}  // namespace aerialnav
