#include "wbplan/io/json_io.hpp"
#include "wbplan/io/svg.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace wbp;
using nlohmann::json;

namespace
{
    enum ExitCode
    {
        kOk = 0,
        kValidationFailed = 1,
        kNoPath = 2,
        kAllFailed = 3,
        kBadInput = 4
    };

    void setupLogging()
    {
        auto logger = spdlog::stderr_color_mt("wbplan");
        spdlog::set_default_logger(logger);
        spdlog::set_pattern("[%l] %v");
        const char *env = std::getenv("WBP_LOG");
        spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    }

    json readJson(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw InputError(path + ": cannot open");
        try
        {
            return json::parse(in);
        }
        catch (const json::parse_error &e)
        {
            throw InputError(path + ": " + e.what());
        }
    }

    void writeText(const std::string &path, const std::string &text)
    {
        if (path.empty() || path == "-")
        {
            std::cout << text;
            return;
        }
        std::ofstream out(path);
        if (!out)
            throw InputError(path + ": cannot write");
        out << text;
    }

    // Wraps json type errors of a file section into InputError with the file name.
    template <class F>
    auto parsing(const std::string &what, F &&f) -> decltype(f())
    {
        try
        {
            return f();
        }
        catch (const json::exception &e)
        {
            throw InputError(what + ": " + e.what());
        }
    }

    robot::RobotModel loadRobot(const std::string &path)
    {
        if (path.empty())
            return robot::defaultRobot();
        const json j = readJson(path);
        return parsing(path, [&] { return robot::robotFromJson(j); });
    }

    pipeline::PlannerConfig loadConfig(const std::string &path)
    {
        pipeline::PlannerConfig c;
        if (!path.empty())
        {
            const json j = readJson(path);
            parsing(path, [&] { pipeline::from_json(j, c); });
        }
        return c;
    }

    world::Scenario loadScenario(const std::string &path)
    {
        const json j = readJson(path);
        return parsing(path, [&] { return j.get<world::Scenario>(); });
    }

    world::World buildWorld(const world::Scenario &sc, const pipeline::PlannerConfig &c, const robot::RobotModel &m)
    {
        return world::World::build(sc, c.esdf_resolution, c.esdf_inflation >= 0.0 ? c.esdf_inflation : m.collision.base.radius);
    }

    struct PlanArgs
    {
        std::string scenario, robot, config, request, out, svg, trajectory_out, csv;
        std::optional<std::uint64_t> random;
        std::optional<std::uint64_t> seed;
        std::vector<double> distance{3.0, 8.0};
        int jobs = 0;
        double budget_ms = 0.0;
        bool timing = false;
    };

    int cmdPlan(const PlanArgs &a)
    {
        const auto m = loadRobot(a.robot);
        auto cfg = loadConfig(a.config);
        if (a.jobs > 0)
            cfg.jobs = a.jobs;
        if (a.budget_ms > 0.0)
            cfg.setBudget(a.budget_ms);

        std::shared_ptr<world::World> w;
        pipeline::PlanRequest req;
        if (a.random)
        {
            // random desk-scale scenario, start and goal like a benchmark trial
            if (a.distance.size() != 2 || !(a.distance[0] < a.distance[1]))
                throw InputError("--distance needs d_min < d_max");
            pipeline::BenchmarkSpec spec;
            spec.planner = cfg;
            const auto t = pipeline::makeTrial(spec, m, {a.distance[0], a.distance[1]}, *a.random);
            if (!t)
                throw InputError("could not sample start and goal for --random " + std::to_string(*a.random));
            w = t->world;
            req = t->request;
            if (!a.request.empty())
                spdlog::warn("--request ignored with --random");
        }
        else
        {
            if (a.scenario.empty() || a.request.empty())
                throw InputError("plan needs --scenario and --request, or --random");
            w = std::make_shared<world::World>(buildWorld(loadScenario(a.scenario), cfg, m));
            const json rj = readJson(a.request);
            req = parsing(a.request, [&] { return io::requestFromJson(rj); });
        }
        if (a.seed)
            req.seed = *a.seed;

        spdlog::info("planning from ({:.3f}, {:.3f}) seed {}", req.start.base.x, req.start.base.y, req.seed);
        const auto rep = pipeline::plan(req, *w, m, cfg);
        for (const auto &c : rep.candidates)
            spdlog::info("candidate {}: length {:.2f} pieces {} {} cost {:.3f} evals {} {} {:.0f} ms", c.index,
                         c.path_length, c.pieces, c.opt_status, c.cost, c.evaluations,
                         c.success ? "ok" : c.failure_reason, c.wall_ms);
        spdlog::info("status {} in {:.0f} ms", pipeline::toString(rep.status), rep.wall_ms);

        json out = io::reportToJson(rep, a.timing);
        out["request"] = io::requestToJson(req);
        writeText(a.out, out.dump(2) + "\n");
        if (!a.svg.empty())
            writeText(a.svg, io::renderSvg(*w, &req, &rep));
        if (a.random && !a.scenario.empty())
            writeText(a.scenario, json(w->scenario).dump(2) + "\n");

        switch (rep.status)
        {
        case pipeline::PlanStatus::NoPath:
            return kNoPath;
        case pipeline::PlanStatus::AllCandidatesFailed:
            return kAllFailed;
        case pipeline::PlanStatus::Success:
            break;
        }
        const auto &tr = *rep.best()->trajectory;
        if (!a.trajectory_out.empty())
            writeText(a.trajectory_out, io::trajectoryToJson(tr).dump(2) + "\n");
        if (!a.csv.empty())
            writeText(a.csv, io::trajectoryCsv(tr, 0.05));
        return rep.best()->validation->pass ? kOk : kValidationFailed;
    }

    struct BenchArgs
    {
        std::string spec, config, out, csv;
        std::optional<std::uint64_t> seed;
        int trials = 0;
        int jobs = 0;
        double budget_ms = 0.0;
        bool timing = false;
    };

    int cmdBenchmark(const BenchArgs &a)
    {
        const auto m = robot::defaultRobot();
        pipeline::BenchmarkSpec spec;
        if (!a.spec.empty())
        {
            const json j = readJson(a.spec);
            spec = parsing(a.spec, [&] { return io::benchmarkSpecFromJson(j); });
        }
        if (!a.config.empty())
            spec.planner = loadConfig(a.config);
        spec.planner.jobs = 1;
        if (a.seed)
            spec.seed = *a.seed;
        if (a.trials > 0)
            spec.trials = a.trials;
        if (a.jobs > 0)
            spec.jobs = a.jobs;
        if (a.budget_ms > 0.0)
            spec.budget_ms = a.budget_ms;
        spec.planner.setBudget(spec.budget_ms);
        spec.validate();

        const auto res = pipeline::runBenchmark(spec, m,
                                                [](const pipeline::TrialRow &r)
                                                {
                                                    spdlog::info("interval {} trial {}: {} {} ({:.0f} ms)", r.interval,
                                                                 r.trial, r.status, r.failure_reason, r.wall_ms);
                                                });
        if (!a.csv.empty())
            writeText(a.csv, io::benchmarkCsv(res, a.timing));
        writeText(a.out, io::benchmarkSummaryJson(res, spec, a.timing).dump(2) + "\n");
        return kOk;
    }

    struct ValidateArgs
    {
        std::string trajectory, scenario, robot, config;
        double tol = 1e-3;
        int density = 0;
        std::string out;
    };

    int cmdValidate(const ValidateArgs &a)
    {
        const auto m = loadRobot(a.robot);
        const auto cfg = loadConfig(a.config);
        const auto w = buildWorld(loadScenario(a.scenario), cfg, m);
        const json j = readJson(a.trajectory);
        // a bare trajectory or a plan report carrying one
        const json &tj = j.contains("trajectory") ? j.at("trajectory") : j;
        const auto tr = parsing(a.trajectory, [&] { return io::trajectoryFromJson(tj); });
        if (tr.dof() != m.dof())
            throw InputError(a.trajectory + ": trajectory has " + std::to_string(tr.dof()) + " joints, robot has " +
                             std::to_string(m.dof()));
        const int density = a.density > 0 ? a.density : cfg.validation_density * cfg.opt.K;
        const auto rep = pipeline::validateTrajectory(tr, w, m, a.tol, density);
        json out = pipeline::toJson(rep);
        out["final_time"] = tr.totalDuration();
        out["end_base"] = {rep.end_base.x, rep.end_base.y, rep.end_base.theta};
        out["end_effector"] = io::poseToJson(robot::forwardKinematics(m, rep.end_base, rep.end_q));
        writeText(a.out, out.dump(2) + "\n");
        if (!rep.pass)
            for (int f = 0; f < pipeline::kFamilyCount; ++f)
                if (rep.max_violation[f] >= rep.tol)
                    spdlog::warn("{} violated by {:.4g} at t = {:.3f} s", pipeline::familyName(f),
                                 rep.max_violation[f], rep.worst_time[f]);
        return rep.pass ? kOk : kValidationFailed;
    }

    struct GenArgs
    {
        std::uint64_t seed = 1;
        std::string params, out;
    };

    int cmdGenScenario(const GenArgs &a)
    {
        world::ScenarioParams p;
        if (!a.params.empty())
        {
            const json j = readJson(a.params);
            parsing(a.params, [&] { world::from_json(j, p); });
        }
        else
        {
            const pipeline::BenchmarkSpec spec;
            p = spec.scenario;
        }
        const auto sc = world::generateScenario(p, a.seed);
        writeText(a.out, json(sc).dump(2) + "\n");
        return kOk;
    }
} // namespace

int main(int argc, char **argv)
{
    setupLogging();
    CLI::App app{"Whole-body trajectory planner for a differential-drive mobile manipulator"};
    app.require_subcommand(1);

    PlanArgs pa;
    auto *plan = app.add_subcommand("plan", "plan one request");
    plan->add_option("--scenario", pa.scenario, "scenario JSON (with --random: where to save the generated one)");
    plan->add_option("--request", pa.request, "plan request JSON");
    plan->add_option("--random", pa.random, "generate a desk-scale scenario and request from this seed");
    plan->add_option("--distance", pa.distance, "start-goal base distance range for --random")->expected(2);
    plan->add_option("--robot", pa.robot, "robot model JSON (default: built-in)");
    plan->add_option("--config", pa.config, "planner config JSON");
    plan->add_option("--seed", pa.seed, "override the request seed");
    plan->add_option("--out", pa.out, "report JSON path (default stdout)");
    plan->add_option("--svg", pa.svg, "write a top-view SVG");
    plan->add_option("--trajectory-out", pa.trajectory_out, "write the trajectory JSON");
    plan->add_option("--csv", pa.csv, "write the trajectory sampled every 50 ms");
    plan->add_option("--jobs", pa.jobs, "candidate workers (0 = all cores)");
    plan->add_option("--budget-ms", pa.budget_ms, "per-candidate budget");
    plan->add_flag("--timing", pa.timing, "include wall-clock fields");

    BenchArgs ba;
    auto *bench = app.add_subcommand("benchmark", "run the randomized benchmark");
    bench->add_option("--spec", ba.spec, "benchmark spec JSON (default: desk scale)");
    bench->add_option("--config", ba.config, "planner config JSON");
    bench->add_option("--seed", ba.seed, "benchmark seed");
    bench->add_option("--trials", ba.trials, "trials per interval");
    bench->add_option("--jobs", ba.jobs, "trials run concurrently");
    bench->add_option("--budget-ms", ba.budget_ms, "per-trial budget");
    bench->add_option("--out", ba.out, "summary JSON path (default stdout)");
    bench->add_option("--csv", ba.csv, "per-trial CSV path");
    bench->add_flag("--timing", ba.timing, "include wall-clock fields");

    ValidateArgs va;
    auto *val = app.add_subcommand("validate", "check a trajectory against every constraint");
    val->add_option("--trajectory", va.trajectory, "trajectory or plan report JSON")->required();
    val->add_option("--scenario", va.scenario, "scenario JSON")->required();
    val->add_option("--robot", va.robot, "robot model JSON (default: built-in)");
    val->add_option("--config", va.config, "planner config JSON (ESDF settings, density)");
    val->add_option("--tol", va.tol, "pass threshold");
    val->add_option("--density", va.density, "samples per segment");
    val->add_option("--out", va.out, "report JSON path (default stdout)");

    GenArgs ga;
    auto *gen = app.add_subcommand("gen-scenario", "generate a random scenario");
    gen->add_option("--seed", ga.seed, "scenario seed");
    gen->add_option("--params", ga.params, "scenario parameter JSON (default: desk scale)");
    gen->add_option("--out", ga.out, "scenario JSON path (default stdout)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return kBadInput;
    }

    try
    {
        if (*plan)
            return cmdPlan(pa);
        if (*bench)
            return cmdBenchmark(ba);
        if (*val)
            return cmdValidate(va);
        if (*gen)
            return cmdGenScenario(ga);
    }
    catch (const InputError &e)
    {
        spdlog::error("{}", e.what());
        return kBadInput;
    }
    catch (const world::PlacementError &e)
    {
        spdlog::error("{}", e.what());
        return kBadInput;
    }
    catch (const json::exception &e)
    {
        spdlog::error("{}", e.what());
        return kBadInput;
    }
    return kOk;
}
