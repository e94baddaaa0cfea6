#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "aerialnav/errors.hpp"
#include "aerialnav/generator.hpp"
#include "aerialnav/metrics.hpp"
#include "aerialnav/runner.hpp"
#include "aerialnav/service.hpp"

using namespace aerialnav;

namespace {

std::vector<LengthGroup> parse_groups(const std::string& list) {
    std::vector<LengthGroup> out;
    std::stringstream ss(list);
    for (std::string item; std::getline(ss, item, ',');) {
        if (!item.empty()) out.push_back(length_group_from_name(item));
    }
    if (out.empty()) throw Error("--groups lists no group");
    return out;
}

struct GenerateArgs {
    std::uint64_t seed = 0;
    int count = 30;
    std::string groups = "short,middle,long";
    std::string out;
    int max_steps = 50;
};

struct RunArgs {
    std::string corpus, out, policy = "oracle", enhancements, gateway, model, prompts;
    int jobs = 1;
    bool resume = false;
    std::uint64_t seed = 0;
    int max_steps = 50;
    double epsilon = 0.0;
};

struct EvalArgs {
    std::string run, mode = "trisect", format = "csv";
};

struct AnalyzeArgs {
    std::string run, out;
    double tol = 0.0;
};

struct ServeArgs {
    std::string corpus, host = "127.0.0.1", cors = "*", log_dir;
    int port = 8080;
    int max_steps = 50;
};

struct StatsArgs {
    std::string corpus;
    double bin_width = 25.0;
};

void cmd_generate(const GenerateArgs& a) {
    GeneratorParams p;
    p.max_steps = a.max_steps;
    const auto scenarios = generate_scenarios(a.seed, parse_groups(a.groups), a.count, p);
    const CorpusManifest m = write_corpus(a.out, a.seed, scenarios);
    std::cout << "wrote " << m.entries.size() << " scenarios to " << a.out << "\n";
}

int cmd_run(const RunArgs& a) {
    RunOptions o;
    o.corpus = a.corpus;
    o.out = a.out;
    o.policy = a.policy;
    o.enhancements = parse_enhancements(a.enhancements);
    if (!a.gateway.empty()) o.gateway = GatewaySpec::parse(a.gateway);
    o.model = a.model;
    if (!a.prompts.empty()) o.prompts = a.prompts;
    o.jobs = a.jobs;
    o.resume = a.resume;
    o.seed = a.seed;
    o.episode.max_steps = a.max_steps;
    if (a.epsilon > 0) o.episode.epsilon = a.epsilon;
    const RunSummary s = run_corpus(o);
    std::cout << "ran " << s.ran << " episodes";
    if (s.skipped) std::cout << ", skipped " << s.skipped << " finished";
    if (s.errored) std::cout << ", " << s.errored << " aborted by backend errors";
    std::cout << "; logs in " << a.out << "\n";
    return s.errored ? 2 : 0;
}

void cmd_eval(const EvalArgs& a) {
    const auto logs = load_run(a.run);
    const MetricReport r = evaluate(logs, grouping_mode_from_name(a.mode));
    const std::string text = a.format == "json" ? to_json(r).dump(2) + "\n" : to_csv(r);
    std::cout << text;
    std::ofstream(std::filesystem::path(a.run) / ("metrics_" + a.mode + (a.format == "json" ? ".json" : ".csv")))
        << text;
}

void cmd_analyze(const AnalyzeArgs& a) {
    const std::filesystem::path out = a.out.empty() ? std::filesystem::path(a.run) / "analysis" : std::filesystem::path(a.out);
    const auto rows = analyze_run(a.run, out, a.tol);
    std::size_t found = 0;
    for (const auto& [id, r] : rows) found += r.found ? 1 : 0;
    std::cout << "analysed " << rows.size() << " episodes, " << found << " with a decision bifurcation; wrote "
              << (out / "cdb.csv").string() << "\n";
}

void cmd_serve(const ServeArgs& a) {
    ServiceConfig cfg;
    cfg.host = a.host;
    cfg.port = a.port;
    cfg.cors_origin = a.cors;
    cfg.episode.max_steps = a.max_steps;
    if (!a.log_dir.empty()) {
        std::filesystem::create_directories(a.log_dir);
        cfg.log_dir = a.log_dir;
    }
    ControlService svc(load_corpus(a.corpus), cfg);
    std::cerr << "control service on " << a.host << ":" << a.port << " (" << svc.manifest().entries.size()
              << " scenarios)\n";
    if (!svc.listen()) throw Error("could not bind " + a.host + ":" + std::to_string(a.port));
}

void cmd_stats(const StatsArgs& a) {
    std::cout << to_json(dataset_stats(load_corpus(a.corpus), a.bin_width)).dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Aerial navigation harness: scenario generation, policy runs, metrics and the control service."};
    app.set_config("--config", "", "TOML or INI file with the same keys as the flags; flags win");
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Generate a scenario corpus");
    g->add_option("--seed", gen.seed, "Generator seed");
    g->add_option("--count", gen.count, "Total scenarios, spread over the groups")->check(CLI::NonNegativeNumber);
    g->add_option("--groups", gen.groups, "Comma-separated subset of short,middle,long");
    g->add_option("--max-steps", gen.max_steps, "Step budget the ground truth must fit")->check(CLI::PositiveNumber);
    g->add_option("--out", gen.out, "Output directory")->required();

    RunArgs run;
    auto* r = app.add_subcommand("run", "Run a policy over a corpus");
    r->add_option("--corpus", run.corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
    r->add_option("--policy", run.policy, "Policy")
        ->check(CLI::IsMember({"random", "sampling", "oracle", "lmm", "agent"}));
    r->add_option("--enhancements", run.enhancements, "Comma-separated grounding,crossview,imagination,sparse_memory");
    r->add_option("--gateway", run.gateway, "live | replay:DIR | record:DIR");
    r->add_option("--model", run.model, "Model name sent to the backend");
    r->add_option("--prompts", run.prompts, "Directory overriding the agent prompt templates")
        ->check(CLI::ExistingDirectory);
    r->add_option("--jobs", run.jobs, "Episodes run in parallel")->check(CLI::PositiveNumber);
    r->add_flag("--resume", run.resume, "Skip scenarios whose log is already complete");
    r->add_option("--seed", run.seed, "Run seed for stochastic policies");
    r->add_option("--max-steps", run.max_steps, "Step cap per episode")->check(CLI::PositiveNumber);
    r->add_option("--epsilon", run.epsilon, "Success radius override in metres")->check(CLI::PositiveNumber);
    r->add_option("--out", run.out, "Run directory")->required();

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Compute SR, SPL and DTG per length group");
    e->add_option("--run", ev.run, "Run directory")->required()->check(CLI::ExistingDirectory);
    e->add_option("--mode", ev.mode, "Length grouping")->check(CLI::IsMember({"trisect", "paper_fixed"}));
    e->add_option("--format", ev.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

    AnalyzeArgs an;
    auto* a = app.add_subcommand("analyze", "Write per-episode CDB and progress-curve CSVs");
    a->add_option("--run", an.run, "Run directory")->required()->check(CLI::ExistingDirectory);
    a->add_option("--out", an.out, "Output directory (default RUN/analysis)");
    a->add_option("--tol", an.tol, "Distance tolerance for the bifurcation test")->check(CLI::NonNegativeNumber);

    ServeArgs sv;
    auto* s = app.add_subcommand("serve", "Serve the control API over a corpus");
    s->add_option("--corpus", sv.corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
    s->add_option("--host", sv.host, "Bind address");
    s->add_option("--port", sv.port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
    s->add_option("--cors-origin", sv.cors, "Allowed CORS origin");
    s->add_option("--log-dir", sv.log_dir, "Where finished session logs are written");
    s->add_option("--max-steps", sv.max_steps, "Step cap per session")->check(CLI::PositiveNumber);

    StatsArgs st;
    auto* t = app.add_subcommand("stats", "Dataset statistics as JSON");
    t->add_option("--corpus", st.corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
    t->add_option("--bin-width", st.bin_width, "Length histogram bin width in metres")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*g) cmd_generate(gen);
        else if (*r) return cmd_run(run);
        else if (*e) cmd_eval(ev);
        else if (*a) cmd_analyze(an);
        else if (*s) cmd_serve(sv);
        else if (*t) cmd_stats(st);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
