#ifndef WBPLAN_PIPELINE_BENCHMARK_HPP
#define WBPLAN_PIPELINE_BENCHMARK_HPP

#include "wbplan/pipeline/planner.hpp"
#include "wbplan/world/state_sampling.hpp"

#include <map>
#include <mutex>

namespace wbp::pipeline
{
    struct DistanceInterval
    {
        double lo = 3.0, hi = 8.0;
    };

    struct BenchmarkSpec
    {
        std::vector<DistanceInterval> intervals{{3.0, 8.0}, {8.0, 15.0}};
        int trials = 50;
        world::ScenarioParams scenario;
        std::uint64_t seed = 1;
        double budget_ms = 5000.0;
        // Trials run concurrently (each trial is deterministic on its own).
        int jobs = 1;
        // Fraction of each joint range used for start and goal states.
        double joint_range = 0.6;
        double state_margin = 0.05;
        PlannerConfig planner;

        BenchmarkSpec()
        {
            scenario.room_width = 20.0;
            scenario.room_height = 10.0;
            scenario.desk_grids = 10;
            scenario.cuboids = 20;
            planner.jobs = 1;
        }

        void validate() const
        {
            if (intervals.empty())
                throw InputError("benchmark needs at least one interval");
            for (const auto &iv : intervals)
                if (!(iv.lo >= 0.0 && iv.lo < iv.hi))
                    throw InputError("benchmark interval needs 0 <= d_min < d_max");
            if (trials < 1)
                throw InputError("benchmark needs at least one trial");
            if (jobs < 1)
                throw InputError("benchmark jobs must be positive");
            planner.validate();
        }
    };

    struct TrialRow
    {
        int interval = 0;
        int trial = 0;
        std::uint64_t seed = 0;
        double distance = 0.0;
        std::string status;
        bool success = false;
        int candidates = 0;
        int best_index = -1;
        double final_time = 0.0;
        double cost = 0.0;
        std::string failure_reason;
        double wall_ms = 0.0;
        // setup plus slowest candidate, the wall time with one worker per candidate
        double critical_ms = 0.0;
        // full report of the trial, kept for export
        std::shared_ptr<const PlanReport> report;
    };

    struct IntervalSummary
    {
        DistanceInterval range;
        int trials = 0;
        int successes = 0;
        double mean_final_time = 0.0;
        double mean_wall_ms = 0.0;
        double mean_critical_ms = 0.0;
        // trials whose critical-path time exceeded the budget
        int over_budget = 0;
        std::map<std::string, int> failures;

        double successRate() const { return trials ? 100.0 * successes / trials : 0.0; }
    };

    struct BenchmarkResult
    {
        std::vector<TrialRow> rows;
        std::vector<IntervalSummary> intervals;
    };

    struct TrialSetup
    {
        std::shared_ptr<world::World> world;
        PlanRequest request;
        robot::WholeBodyState goal_state;
        double distance = 0.0;
    };

    /// Scenario, start and goal of one trial. The goal pose is the FK of a
    /// sampled collision-free goal state whose base lies at a straight-line
    /// distance inside the interval. std::nullopt when sampling fails.
    inline std::optional<TrialSetup> makeTrial(const BenchmarkSpec &spec, const robot::RobotModel &m,
                                               const DistanceInterval &iv, std::uint64_t seed)
    {
        const double infl =
            spec.planner.esdf_inflation >= 0.0 ? spec.planner.esdf_inflation : m.collision.base.radius;
        world::FreeStateParams fp;
        fp.margin = spec.state_margin;
        fp.joint_range = spec.joint_range;
        fp.max_attempts = 2000;
        for (int attempt = 0; attempt < 10; ++attempt)
        {
            const std::uint64_t s = mixSeed(seed, attempt);
            world::Scenario sc;
            try
            {
                sc = world::generateScenario(spec.scenario, s);
            }
            catch (const world::PlacementError &)
            {
                continue;
            }
            TrialSetup t;
            t.world = std::make_shared<world::World>(world::World::build(sc, spec.planner.esdf_resolution, infl));
            const topo::FreeSpace fs(t.world->esdf, spec.planner.topo.clearance_min);
            // start and goal must share a free region, otherwise no base route exists at all
            const topo::FreeRegions regions(fs);
            Rng rng(mixSeed(s, 0x57a7));
            std::optional<robot::WholeBodyState> start;
            for (int k = 0; k < 50 && !start; ++k)
            {
                start = world::sampleFreeState(*t.world, m, rng, fp);
                if (start && regions.regionOf({start->base.x, start->base.y}) < 0)
                    start.reset();
            }
            if (!start)
                continue;
            std::optional<robot::WholeBodyState> goal;
            for (int k = 0; k < 400 && !goal; ++k)
            {
                goal = world::sampleFreeState(*t.world, m, rng, fp);
                if (!goal)
                    break;
                const double d = std::hypot(goal->base.x - start->base.x, goal->base.y - start->base.y);
                if (d < iv.lo || d > iv.hi ||
                    !regions.connected({start->base.x, start->base.y}, {goal->base.x, goal->base.y}))
                    goal.reset();
            }
            if (!goal)
                continue;
            t.request.start.base = start->base;
            t.request.start.q = start->q;
            t.request.goal.pose = robot::forwardKinematics(m, goal->base, goal->q);
            t.request.seed = s;
            t.goal_state = *goal;
            t.distance = std::hypot(goal->base.x - start->base.x, goal->base.y - start->base.y);
            return t;
        }
        return std::nullopt;
    }

    using TrialCallback = std::function<void(const TrialRow &)>;

    inline BenchmarkResult runBenchmark(const BenchmarkSpec &spec, const robot::RobotModel &m,
                                        const TrialCallback &on_trial = {})
    {
        spec.validate();
        BenchmarkResult res;
        const int ni = static_cast<int>(spec.intervals.size());
        res.rows.resize(static_cast<std::size_t>(ni) * spec.trials);
        std::mutex cb_mutex;
        parallelFor(static_cast<int>(res.rows.size()), spec.jobs,
                    [&](int idx)
                    {
                        TrialRow &row = res.rows[idx];
                        row.interval = idx / spec.trials;
                        row.trial = idx % spec.trials;
                        row.seed = mixSeed(spec.seed, static_cast<std::uint64_t>(idx));
                        const auto &iv = spec.intervals[row.interval];
                        const auto setup = makeTrial(spec, m, iv, row.seed);
                        if (!setup)
                        {
                            row.status = "setup_failure";
                            row.failure_reason = "setup_failure";
                        }
                        else
                        {
                            row.distance = setup->distance;
                            try
                            {
                                auto rep = std::make_shared<PlanReport>(
                                    plan(setup->request, *setup->world, m, spec.planner));
                                row.status = toString(rep->status);
                                row.candidates = static_cast<int>(rep->candidates.size());
                                row.best_index = rep->best_index;
                                row.wall_ms = rep->wall_ms;
                                row.critical_ms = rep->criticalPathMs();
                                if (const auto *b = rep->best())
                                {
                                    // independent re-check of every reported success
                                    const auto v = validateTrajectory(*b->trajectory, *setup->world, m,
                                                                      spec.planner.validation_tol,
                                                                      spec.planner.validation_density *
                                                                          spec.planner.opt.K);
                                    row.success = v.pass;
                                    row.final_time = b->trajectory->totalDuration();
                                    row.cost = b->cost;
                                    if (!v.pass)
                                        row.failure_reason = "revalidation_failure";
                                }
                                else
                                {
                                    row.failure_reason = rep->failure_reason;
                                }
                                row.report = std::move(rep);
                            }
                            catch (const InputError &)
                            {
                                row.status = "bad_input";
                                row.failure_reason = "bad_input";
                            }
                        }
                        if (on_trial)
                        {
                            std::lock_guard<std::mutex> lock(cb_mutex);
                            on_trial(row);
                        }
                    });

        for (int k = 0; k < ni; ++k)
        {
            IntervalSummary s;
            s.range = spec.intervals[k];
            double tf = 0.0, wall = 0.0, crit = 0.0;
            for (int i = 0; i < spec.trials; ++i)
            {
                const auto &r = res.rows[static_cast<std::size_t>(k) * spec.trials + i];
                ++s.trials;
                wall += r.wall_ms;
                crit += r.critical_ms;
                if (r.critical_ms > spec.budget_ms)
                    ++s.over_budget;
                if (r.success)
                {
                    ++s.successes;
                    tf += r.final_time;
                }
                else
                    ++s.failures[r.failure_reason.empty() ? r.status : r.failure_reason];
            }
            s.mean_final_time = s.successes ? tf / s.successes : 0.0;
            s.mean_wall_ms = s.trials ? wall / s.trials : 0.0;
            s.mean_critical_ms = s.trials ? crit / s.trials : 0.0;
            res.intervals.push_back(std::move(s));
        }
        return res;
    }

} // namespace wbp::pipeline

#endif
