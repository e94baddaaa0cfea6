#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "aerialnav/camera.hpp"
#include "aerialnav/errors.hpp"
#include "aerialnav/generator.hpp"
#include "aerialnav/metrics.hpp"
#include "aerialnav/runner.hpp"
#include "aerialnav/service.hpp"

namespace py = pybind11;
using namespace aerialnav;
using json = nlohmann::json;

namespace {

py::object to_py(const json& j) {
    switch (j.type()) {
        case json::value_t::null: return py::none();
        case json::value_t::boolean: return py::bool_(j.get<bool>());
        case json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
        case json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
        case json::value_t::number_float: return py::float_(j.get<double>());
        case json::value_t::string: return py::str(j.get_ref<const std::string&>());
        case json::value_t::array: {
            py::list out;
            for (const auto& v : j) out.append(to_py(v));
            return std::move(out);
        }
        case json::value_t::object: {
            py::dict out;
            for (const auto& [k, v] : j.items()) out[py::str(k)] = to_py(v);
            return std::move(out);
        }
        default: return py::none();
    }
}

using Vec = std::tuple<double, double, double>;
Vec tup(const Vec3& v) { return {v.x, v.y, v.z}; }
Vec3 vec(const Vec& t) { return {std::get<0>(t), std::get<1>(t), std::get<2>(t)}; }

Action action_arg(const std::string& name) {
    const auto a = action_from_name(name);
    if (!a) throw Error("unknown action: " + name);
    return *a;
}

EpisodeConfig episode_config(int max_steps, std::optional<double> epsilon, std::uint64_t seed) {
    EpisodeConfig cfg;
    cfg.max_steps = max_steps;
    cfg.epsilon = epsilon;
    cfg.seed = seed;
    cfg.validate();
    return cfg;
}

CityWorld open_world() {
    CityWorld w;
    w.bounds = {{-1000, -1000, 0}, {1000, 1000, 500}};
    return w;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Aerial navigation harness: worlds, episodes, metrics and the control service.";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

    m.def("actions", [] {
        std::vector<std::string> out;
        for (int i = 0; i <= static_cast<int>(Action::stop); ++i) out.emplace_back(to_string(static_cast<Action>(i)));
        return out;
    }, "Action names in canonical order.");

    py::class_<AgentPose>(m, "Pose")
        .def(py::init([](const Vec& position, double yaw, double gimbal) { return make_pose(vec(position), yaw, gimbal); }),
             py::arg("position"), py::arg("yaw") = 0.0, py::arg("gimbal") = 0.0)
        .def_property_readonly("position", [](const AgentPose& p) { return tup(p.position); })
        .def_readonly("yaw", &AgentPose::yaw)
        .def_readonly("gimbal", &AgentPose::gimbal)
        .def("__eq__", [](const AgentPose& a, const AgentPose& b) { return a == b; })
        .def("__repr__", [](const AgentPose& p) {
            return "Pose((" + std::to_string(p.position.x) + ", " + std::to_string(p.position.y) + ", " +
                   std::to_string(p.position.z) + "), yaw=" + std::to_string(p.yaw) +
                   ", gimbal=" + std::to_string(p.gimbal) + ")";
        });

    py::class_<Scenario>(m, "Scenario")
        .def_readonly("id", &Scenario::id)
        .def_readonly("start", &Scenario::start)
        .def_property_readonly("instruction", [](const Scenario& s) { return s.goal.instruction; })
        .def_property_readonly("goal", [](const Scenario& s) { return tup(s.goal.position); })
        .def_property_readonly("epsilon", [](const Scenario& s) { return s.goal.epsilon; })
        .def_property_readonly("group", [](const Scenario& s) { return s.meta.group; })
        .def_property_readonly("landmark", [](const Scenario& s) { return s.meta.landmark; })
        .def_property_readonly("ground_truth_length", [](const Scenario& s) { return s.ground_truth.length; })
        .def("to_dict", [](const Scenario& s) { return to_py(to_json(s)); })
        .def("save", [](const Scenario& s, const std::filesystem::path& p) { save_scenario(s, p); })
        .def("__repr__", [](const Scenario& s) { return "<Scenario " + s.id + ">"; });

    m.def("load_scenario", &load_scenario, py::arg("path"));
    m.def("load_corpus", &load_corpus, py::arg("directory"));
    m.def("scenario_from_json", [](const std::string& text) { return scenario_from_json(json::parse(text)); },
          py::arg("text"));
    m.def(
        "generate_scenarios",
        [](std::uint64_t seed, int count, const std::vector<std::string>& groups, int max_steps) {
            std::vector<LengthGroup> gs;
            for (const auto& g : groups) gs.push_back(length_group_from_name(g));
            GeneratorParams p;
            p.max_steps = max_steps;
            py::gil_scoped_release release;
            return generate_scenarios(seed, gs, count, p);
        },
        py::arg("seed"), py::arg("count"), py::arg("groups") = std::vector<std::string>{"short", "middle", "long"},
        py::arg("max_steps") = 50, "Deterministic scenarios; count is spread over the groups.");
    m.def(
        "write_corpus",
        [](const std::filesystem::path& dir, std::uint64_t seed, const std::vector<Scenario>& scenarios) {
            return to_py(to_json(write_corpus(dir, seed, scenarios)));
        },
        py::arg("directory"), py::arg("seed"), py::arg("scenarios"), "Writes scenario files and a manifest.");
    m.def("dataset_stats",
          [](const std::vector<Scenario>& s, double bin_width) { return to_py(to_json(dataset_stats(s, bin_width))); },
          py::arg("scenarios"), py::arg("bin_width") = 25.0);

    m.def(
        "apply_action",
        [](const Scenario& s, const AgentPose& pose, const std::string& action) {
            const StepResult r = apply_action(pose, action_arg(action), s.world, MotionConfig{});
            return std::make_pair(r.pose, r.blocked);
        },
        py::arg("scenario"), py::arg("pose"), py::arg("action"), "Returns (pose, blocked).");
    m.def(
        "render", [](const Scenario& s, const AgentPose& pose) { return to_py(observation_json(render(s.world, pose))); },
        py::arg("scenario"), py::arg("pose"));
    m.def(
        "describe", [](const Scenario& s, const AgentPose& pose) { return describe(render(s.world, pose)); },
        py::arg("scenario"), py::arg("pose"));
    m.def(
        "fov_overlap",
        [](const AgentPose& a, const AgentPose& b, const Scenario* s) {
            return fov_overlap(s ? s->world : open_world(), a, b);
        },
        py::arg("pose_a"), py::arg("pose_b"), py::arg("scenario") = nullptr,
        "Fraction of pose_a's view also seen from pose_b; an open world when no scenario is given.");

    py::class_<EpisodeLog>(m, "EpisodeLog")
        .def_readonly("scenario_id", &EpisodeLog::scenario_id)
        .def_readonly("policy", &EpisodeLog::policy)
        .def_readonly("final_distance", &EpisodeLog::final_distance)
        .def_readonly("optimal_length", &EpisodeLog::optimal_length)
        .def_readonly("error", &EpisodeLog::error)
        .def_property_readonly("success", &EpisodeLog::success)
        .def_property_readonly("outcome", [](const EpisodeLog& l) { return std::string(to_string(l.outcome)); })
        .def_property_readonly("actions", [](const EpisodeLog& l) {
            std::vector<std::string> out;
            for (const auto& s : l.steps) out.emplace_back(to_string(s.action));
            return out;
        })
        .def_property_readonly("distances", &EpisodeLog::distance_series)
        .def_property_readonly("traveled_length", &EpisodeLog::traveled_length)
        .def("to_dict", [](const EpisodeLog& l) { return to_py(to_json(l)); })
        .def("save", [](const EpisodeLog& l, const std::filesystem::path& p) { save_episode_log(l, p); })
        .def("__len__", [](const EpisodeLog& l) { return l.steps.size(); });
    m.def("load_episode_log", &load_episode_log, py::arg("path"));
    m.def("load_run", &load_run, py::arg("run_directory"));

    m.def(
        "run_episode",
        [](const Scenario& s, const std::string& policy, std::uint64_t seed, int max_steps,
           std::optional<double> epsilon, std::optional<std::string> gateway) {
            RunOptions opts;
            opts.policy = policy;
            opts.episode = episode_config(max_steps, epsilon, seed);
            std::shared_ptr<Gateway> gw;
            if (gateway) gw = make_gateway(GatewaySpec::parse(*gateway));
            py::gil_scoped_release release;
            auto p = make_policy(opts, s, gw, seed);
            return run_episode(s, *p, opts.episode);
        },
        py::arg("scenario"), py::arg("policy") = "oracle", py::arg("seed") = 0, py::arg("max_steps") = 50,
        py::arg("epsilon") = std::nullopt, py::arg("gateway") = std::nullopt,
        "Runs one episode with a named policy (random, sampling, oracle, lmm, agent).");

    py::class_<EpisodeSession>(m, "Session", "Step-by-step episode, as driven by a human or external policy.")
        .def(py::init([](const Scenario& s, int max_steps, std::optional<double> epsilon) {
                 return std::make_unique<EpisodeSession>(s, episode_config(max_steps, epsilon, 0), "python");
             }),
             py::arg("scenario"), py::arg("max_steps") = 50, py::arg("epsilon") = std::nullopt,
             py::keep_alive<1, 2>())
        .def("observe", [](const EpisodeSession& e) { return to_py(observation_json(e.observe())); })
        .def(
            "step",
            [](EpisodeSession& e, const std::string& action, const std::string& rationale) {
                const StepRecord& r = e.step(action_arg(action), rationale);
                return py::dict(py::arg("pose") = r.pose, py::arg("blocked") = r.blocked,
                                py::arg("distance_to_goal") = r.distance_to_goal, py::arg("done") = e.done());
            },
            py::arg("action"), py::arg("rationale") = "")
        .def_property_readonly("pose", &EpisodeSession::pose)
        .def_property_readonly("done", &EpisodeSession::done)
        .def_property_readonly("steps", &EpisodeSession::step_count)
        .def_property_readonly("log", [](const EpisodeSession& e) { return e.log(); });

    m.def("success_rate", &success_rate, py::arg("logs"));
    m.def("spl", py::overload_cast<const std::vector<EpisodeLog>&>(&spl), py::arg("logs"));
    m.def("dtg", &dtg, py::arg("logs"));
    m.def(
        "evaluate",
        [](const std::vector<EpisodeLog>& logs, const std::string& mode) {
            return to_py(to_json(evaluate(logs, grouping_mode_from_name(mode))));
        },
        py::arg("logs"), py::arg("mode") = "trisect", "SR, SPL and DTG per length group and on average.");
    m.def(
        "evaluate_csv",
        [](const std::vector<EpisodeLog>& logs, const std::string& mode) {
            return to_csv(evaluate(logs, grouping_mode_from_name(mode)));
        },
        py::arg("logs"), py::arg("mode") = "trisect");
    m.def("progress_curve", py::overload_cast<const EpisodeLog&>(&progress_curve), py::arg("log"));
    m.def(
        "detect_cdb",
        [](const std::vector<double>& distances, bool failed, double tol) {
            const CdbResult r = detect_cdb(distances, failed, tol);
            py::dict out(py::arg("found") = r.found, py::arg("progress") = r.progress);
            if (r.found) {
                out["t_star"] = r.t_star;
                out["pre_slope"] = r.pre_slope;
                out["post_slope"] = r.post_slope;
            }
            return out;
        },
        py::arg("distances"), py::arg("failed"), py::arg("tol") = 0.0);

    m.def(
        "run_corpus",
        [](const std::filesystem::path& corpus, const std::filesystem::path& out, const std::string& policy,
           std::uint64_t seed, int jobs, int max_steps, bool resume, std::optional<std::string> gateway,
           const std::string& enhancements) {
            RunOptions o;
            o.corpus = corpus;
            o.out = out;
            o.policy = policy;
            o.seed = seed;
            o.jobs = jobs;
            o.resume = resume;
            o.episode.max_steps = max_steps;
            o.enhancements = parse_enhancements(enhancements);
            if (gateway) o.gateway = GatewaySpec::parse(*gateway);
            py::gil_scoped_release release;
            const RunSummary s = run_corpus(o);
            py::gil_scoped_acquire acquire;
            return py::dict(py::arg("ran") = s.ran, py::arg("skipped") = s.skipped, py::arg("errored") = s.errored);
        },
        py::arg("corpus"), py::arg("out"), py::arg("policy") = "oracle", py::arg("seed") = 0, py::arg("jobs") = 1,
        py::arg("max_steps") = 50, py::arg("resume") = false, py::arg("gateway") = std::nullopt,
        py::arg("enhancements") = "");
    m.def(
        "analyze_run",
        [](const std::filesystem::path& run, const std::filesystem::path& out, double tol) {
            py::dict result;
            for (const auto& [id, r] : analyze_run(run, out, tol))
                result[py::str(id)] = r.found ? py::object(py::int_(r.t_star)) : py::none();
            return result;
        },
        py::arg("run_directory"), py::arg("out_directory"), py::arg("tol") = 0.0,
        "Writes cdb.csv and progress curves; returns the CDB step per scenario (None when absent).");

    py::class_<ControlService>(m, "ControlService", "The control API without a socket, or served over HTTP.")
        .def(py::init([](const std::filesystem::path& corpus, int port, std::optional<std::filesystem::path> log_dir) {
                 ServiceConfig cfg;
                 cfg.port = port;
                 cfg.log_dir = log_dir;
                 return std::make_unique<ControlService>(load_corpus(corpus), cfg);
             }),
             py::arg("corpus"), py::arg("port") = 0, py::arg("log_dir") = std::nullopt)
        .def(
            "handle",
            [](const ControlService& s, const std::string& method, const std::string& path, const std::string& body) {
                const ServiceResponse r = s.handle(method, path, body);
                return std::make_pair(r.status, to_py(r.body));
            },
            py::arg("method"), py::arg("path"), py::arg("body") = "", "Returns (status, body).")
        .def("start", &ControlService::start, py::call_guard<py::gil_scoped_release>(),
             "Serves on a background thread; returns the bound port.")
        .def("stop", &ControlService::stop, py::call_guard<py::gil_scoped_release>());
}
