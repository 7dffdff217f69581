#ifndef WBPLAN_PIPELINE_PLANNER_HPP
#define WBPLAN_PIPELINE_PLANNER_HPP

#include "wbplan/opt/alm.hpp"
#include "wbplan/pipeline/init.hpp"
#include "wbplan/pipeline/validate.hpp"

#include <atomic>
#include <chrono>
#include <functional>
#include <optional>
#include <thread>

namespace wbp::pipeline
{
    struct PlanRequest
    {
        opt::StartState start;
        opt::GoalSpec goal;
        std::uint64_t seed = 0;
    };

    enum class PlanStatus
    {
        Success,
        NoPath,
        AllCandidatesFailed
    };

    inline const char *toString(PlanStatus s)
    {
        switch (s)
        {
        case PlanStatus::Success:
            return "success";
        case PlanStatus::NoPath:
            return "no_path";
        case PlanStatus::AllCandidatesFailed:
            return "all_candidates_failed";
        }
        return "unknown";
    }

    struct CandidateResult
    {
        int index = 0;
        topo::Path2D path;
        double path_length = 0.0;
        bool init_ok = false;
        int pieces = 0;
        std::string opt_status = "not_run";
        bool validated = false;
        bool success = false;
        // Final objective f (jerk + rho |T|_1 + penalties); inf when not optimized.
        double cost = kInf;
        int evaluations = 0;
        int outer_iterations = 0;
        int inner_iterations = 0;
        double residual_inf = kInf;
        double goal_position_error = kInf;
        double goal_rotation_error = kInf;
        std::string failure_reason;
        std::optional<traj::WholeBodyTrajectory> trajectory;
        std::optional<ValidationReport> validation;
        double wall_ms = 0.0;
    };

    struct PlanReport
    {
        PlanStatus status = PlanStatus::AllCandidatesFailed;
        std::string failure_reason;
        std::optional<GoalBase> goal_base;
        std::vector<CandidateResult> candidates;
        int best_index = -1;
        double wall_ms = 0.0;
        // goal base search and topological search, before any candidate work
        double setup_ms = 0.0;

        const CandidateResult *best() const { return best_index >= 0 ? &candidates[best_index] : nullptr; }
        // Wall time with one worker per candidate: setup plus the slowest candidate.
        double criticalPathMs() const
        {
            double slowest = 0.0;
            for (const auto &c : candidates)
                slowest = std::max(slowest, c.wall_ms);
            return setup_ms + slowest;
        }
        double finalTime() const { return best() ? best()->trajectory->totalDuration() : 0.0; }
    };

    namespace detail
    {
        struct Knot
        {
            double s, theta;
            Eigen::VectorXd q;
        };

        // Segment boundaries of the initial trajectory. Moves follow the
        // chords between consecutive states; heading changes above the turn
        // threshold become turn-in-place segments; straight runs are merged
        // up to segment_length / segment_joint_change.
        inline std::vector<Knot> knotsFromStates(const std::vector<robot::WholeBodyState> &states, double theta0,
                                                 double theta_goal, const InitConfig &cfg)
        {
            std::vector<Knot> raw;
            double s = 0.0, heading = theta0;
            raw.push_back({0.0, theta0, states.front().q});
            auto unwrap = [](double ref, double a) { return ref + wrapAngle(a - ref); };
            for (std::size_t i = 1; i < states.size(); ++i)
            {
                const Eigen::Vector2d a(states[i - 1].base.x, states[i - 1].base.y),
                    b(states[i].base.x, states[i].base.y);
                const double len = (b - a).norm();
                if (len > 1e-9)
                {
                    const double h = unwrap(heading, std::atan2(b.y() - a.y(), b.x() - a.x()));
                    if (std::abs(h - heading) > cfg.turn_threshold)
                        raw.push_back({s, h, states[i - 1].q});
                    heading = h;
                    s += len;
                }
                raw.push_back({s, heading, states[i].q});
            }
            const double hg = unwrap(heading, theta_goal);
            if (std::abs(hg - heading) > cfg.turn_threshold)
                raw.push_back({s, hg, states.back().q});
            else
                raw.back().theta = hg;

            // turn segments are kept, straight runs merged
            std::vector<char> keep(raw.size(), 0);
            keep.front() = keep.back() = 1;
            for (std::size_t i = 1; i < raw.size(); ++i)
                if (std::abs(raw[i].s - raw[i - 1].s) < 1e-9 && std::abs(raw[i].theta - raw[i - 1].theta) > 1e-9)
                    keep[i - 1] = keep[i] = 1;
            std::vector<Knot> out{raw.front()};
            for (std::size_t i = 1; i < raw.size(); ++i)
            {
                bool take = keep[i];
                if (!take)
                {
                    const Knot &next = raw[i + 1], &anchor = out.back();
                    take = std::abs(next.s - anchor.s) > cfg.segment_length + 1e-9 ||
                           (next.q - anchor.q).cwiseAbs().maxCoeff() > cfg.segment_joint_change ||
                           std::abs(next.theta - anchor.theta) > cfg.turn_threshold;
                }
                if (take)
                    out.push_back(raw[i]);
            }
            return out;
        }

        inline double initialDuration(const Knot &a, const Knot &b, const robot::RobotModel &m, const InitConfig &cfg)
        {
            const auto &L = m.limits;
            const double f = cfg.reference_speed;
            double T = cfg.min_duration;
            T = std::max(T, std::abs(b.s - a.s) / (f * L.v_max));
            T = std::max(T, std::abs(b.theta - a.theta) / (f * L.omega_max));
            T = std::max(T, ((b.q - a.q).cwiseAbs().array() / (f * L.dq_max.array())).maxCoeff());
            return T;
        }
    } // namespace detail

    /// Optimizes one candidate from its whole-body initial path and validates
    /// the result. Never throws on solver failure; the outcome is recorded in
    /// the returned result.
    inline void optimizeCandidate(const std::vector<robot::WholeBodyState> &init, const GoalBase &gb,
                                  const PlanRequest &req, const world::World &w, const robot::RobotModel &m,
                                  const PlannerConfig &cfg, CandidateResult &res)
    {
        auto knots = detail::knotsFromStates(init, req.start.base.theta, gb.base.theta, cfg.init);
        while (static_cast<int>(knots.size()) - 1 > cfg.init.max_pieces)
        {
            // drop every other interior knot
            std::vector<detail::Knot> thin{knots.front()};
            for (std::size_t i = 1; i + 1 < knots.size(); ++i)
                if (i % 2 == 0)
                    thin.push_back(knots[i]);
            thin.push_back(knots.back());
            knots = std::move(thin);
        }
        const int M = static_cast<int>(knots.size()) - 1;
        if (M < 1)
        {
            res.failure_reason = "empty_initial_path";
            return;
        }
        const int n = m.dof(), D = n + 2;
        Eigen::MatrixXd inner(D, M - 1);
        for (int i = 1; i < M; ++i)
        {
            inner(traj::kChS, i - 1) = knots[i].s;
            inner(traj::kChTheta, i - 1) = knots[i].theta;
            // strictly inside the joint limits for the squashing transform
            inner.col(i - 1).tail(n) = knots[i].q.cwiseMax(-0.98 * m.limits.q_max).cwiseMin(0.98 * m.limits.q_max);
        }
        Eigen::VectorXd end(D), T(M);
        end(traj::kChS) = knots.back().s;
        end(traj::kChTheta) = knots.back().theta;
        end.tail(n) = knots.back().q.cwiseMax(-0.98 * m.limits.q_max).cwiseMin(0.98 * m.limits.q_max);
        for (int j = 0; j < M; ++j)
            T(j) = detail::initialDuration(knots[j], knots[j + 1], m, cfg.init);
        res.pieces = M;

        const opt::TrajectoryProblem prob(w, m, cfg.opt, req.goal, req.start, M);
        Eigen::VectorXd x = prob.encode(inner, end, T);
        const auto alm = opt::almSolve(opt::almFunctions(prob), x, cfg.opt.alm);
        res.opt_status = opt::toString(alm.status);
        res.evaluations = alm.evaluations;
        res.outer_iterations = alm.outer_iterations;
        res.inner_iterations = alm.inner_iterations;
        res.residual_inf = alm.residual_inf;

        opt::TrajectoryProblem::Breakdown b;
        Eigen::VectorXd g;
        res.cost = prob.evaluate(x, Eigen::VectorXd::Zero(9), 0.0, g, &b, false);
        if (!std::isfinite(res.cost))
        {
            res.failure_reason = "non_finite_objective";
            return;
        }
        auto tr = prob.trajectory(x);
        const auto rep = validateTrajectory(tr, w, m, cfg.validation_tol, cfg.validation_density * cfg.opt.K);
        const SE3Pose ee = robot::forwardKinematics(m, rep.end_base, rep.end_q);
        res.goal_position_error = (ee.p - req.goal.pose.p).norm();
        res.goal_rotation_error = rotationError(ee.R, req.goal.pose.R);
        res.validated = rep.pass;
        res.trajectory = std::move(tr);
        res.validation = rep;
        const bool goal_ok =
            res.goal_position_error < cfg.goal_position_tol && res.goal_rotation_error < cfg.goal_rotation_tol;
        res.success = alm.status == opt::AlmStatus::Converged && rep.pass && goal_ok;
        if (!res.success)
        {
            if (alm.status != opt::AlmStatus::Converged)
                res.failure_reason = res.opt_status;
            else if (!rep.pass)
            {
                int worst = 0;
                for (int f = 1; f < kFamilyCount; ++f)
                    if (rep.max_violation[f] / rep.tol > rep.max_violation[worst] / rep.tol)
                        worst = f;
                res.failure_reason = std::string("validation:") + familyName(worst);
            }
            else
                res.failure_reason = "goal_tolerance";
        }
    }

    inline int workerCount(int jobs, int tasks)
    {
        int n = jobs > 0 ? jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        return std::max(1, std::min(n, tasks));
    }

    // Runs task(i) for i in [0, count) on up to `jobs` threads.
    inline void parallelFor(int count, int jobs, const std::function<void(int)> &task)
    {
        const int nw = workerCount(jobs, count);
        if (nw <= 1)
        {
            for (int i = 0; i < count; ++i)
                task(i);
            return;
        }
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int k = 0; k < nw; ++k)
            pool.emplace_back(
                [&]
                {
                    for (int i = next++; i < count; i = next++)
                        task(i);
                });
        for (auto &t : pool)
            t.join();
    }

    /// Full pipeline: goal base search, homotopy-distinct base paths, then
    /// per-candidate initialization and optimization in parallel. The
    /// validated candidate with the least objective wins (ties by index).
    /// The outcome depends only on the inputs and seed, never on `jobs`.
    inline PlanReport plan(const PlanRequest &req, const world::World &w, const robot::RobotModel &m,
                           const PlannerConfig &cfg)
    {
        using Clock = std::chrono::steady_clock;
        const auto t_start = Clock::now();
        PlanReport rep;
        req.goal.validate();
        if (req.start.q.size() != m.dof())
            throw InputError("start joint vector has wrong size");
        if (!world::isStateFree(w, m, robot::WholeBodyState{req.start.base, req.start.q}, 0.0))
            throw InputError("start state is in collision");

        Rng goal_rng(mixSeed(req.seed, 0x90a1));
        const auto bases = findGoalBases(w, m, req.goal, req.start.base, cfg, goal_rng);
        if (bases.empty())
        {
            rep.status = PlanStatus::AllCandidatesFailed;
            rep.failure_reason = "goal_unreachable";
            rep.wall_ms = rep.setup_ms = std::chrono::duration<double, std::milli>(Clock::now() - t_start).count();
            return rep;
        }

        std::vector<topo::Path2D> paths;
        const Eigen::Vector2d s0(req.start.base.x, req.start.base.y);
        for (const auto &gb : bases)
        {
            topo::TopoConfig tc = cfg.topo;
            tc.seed = mixSeed(req.seed, 0x7090);
            try
            {
                paths = topo::candidatePaths(w.esdf, s0, Eigen::Vector2d(gb.base.x, gb.base.y), tc);
            }
            catch (const topo::DisconnectedError &)
            {
                continue;
            }
            if (!paths.empty())
            {
                rep.goal_base = gb;
                break;
            }
        }
        if (!rep.goal_base)
        {
            rep.status = PlanStatus::NoPath;
            rep.failure_reason = "no_path";
            rep.wall_ms = rep.setup_ms = std::chrono::duration<double, std::milli>(Clock::now() - t_start).count();
            return rep;
        }

        const GoalBase gb = *rep.goal_base;
        rep.setup_ms = std::chrono::duration<double, std::milli>(Clock::now() - t_start).count();
        rep.candidates.resize(paths.size());
        parallelFor(static_cast<int>(paths.size()), cfg.jobs,
                    [&](int i)
                    {
                        const auto t0 = Clock::now();
                        CandidateResult &c = rep.candidates[i];
                        c.index = i;
                        c.path = paths[i];
                        c.path_length = paths[i].length();
                        Rng rng(mixSeed(req.seed, static_cast<std::uint64_t>(i) + 1));
                        auto states = sampleBaseStates(paths[i], cfg.init.base_interval);
                        states.front() = req.start.base;
                        states.back() = gb.base;
                        try
                        {
                            const auto init = sampleArmPath(states, req.start.q, gb.q, w, m, rng, cfg.init);
                            c.init_ok = init.has_value();
                            if (!init)
                                c.failure_reason = "init_failure";
                            else
                                optimizeCandidate(*init, gb, req, w, m, cfg, c);
                        }
                        catch (const std::exception &e)
                        {
                            c.success = false;
                            c.failure_reason = std::string("error: ") + e.what();
                        }
                        c.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
                    });

        for (const auto &c : rep.candidates)
            if (c.success && (rep.best_index < 0 || c.cost < rep.candidates[rep.best_index].cost))
                rep.best_index = c.index;
        if (rep.best_index >= 0)
            rep.status = PlanStatus::Success;
        else
        {
            rep.status = PlanStatus::AllCandidatesFailed;
            rep.failure_reason = rep.candidates.empty() ? "no_candidates" : rep.candidates.front().failure_reason;
        }
        rep.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t_start).count();
        return rep;
    }

} // namespace wbp::pipeline

#endif
