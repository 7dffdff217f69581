#ifndef WBPLAN_PIPELINE_INIT_HPP
#define WBPLAN_PIPELINE_INIT_HPP

#include "wbplan/opt/lbfgs.hpp"
#include "wbplan/opt/problem.hpp"
#include "wbplan/pipeline/config.hpp"
#include "wbplan/topo/paths.hpp"
#include "wbplan/world/state_sampling.hpp"

#include <optional>
#include <vector>

namespace wbp::pipeline
{
    /// Arc-length uniform base poses along a path, spacing at most `interval`,
    /// both endpoints included. Heading is the direction of the path segment
    /// containing the sample (the last segment for the goal).
    inline std::vector<SE2> sampleBaseStates(const topo::Path2D &path, double interval)
    {
        if (!(interval > 0.0))
            throw InputError("base sampling interval must be positive");
        const auto &w = path.waypoints;
        std::vector<SE2> out;
        if (w.empty())
            return out;
        const double L = path.length();
        const int n = std::max(1, static_cast<int>(std::ceil(L / interval - 1e-9)));
        std::size_t seg = 1;
        double seg_start = 0.0;
        for (int i = 0; i <= n; ++i)
        {
            const double s = L * i / n;
            while (seg + 1 < w.size() && seg_start + (w[seg] - w[seg - 1]).norm() <= s)
            {
                seg_start += (w[seg] - w[seg - 1]).norm();
                ++seg;
            }
            Eigen::Vector2d p = i == n ? w.back() : path.at(L > 0.0 ? s / L : 0.0);
            double heading = 0.0;
            if (w.size() >= 2)
            {
                // skip zero-length segments for the tangent
                std::size_t k = std::min(seg, w.size() - 1);
                while (k + 1 < w.size() && (w[k] - w[k - 1]).norm() == 0.0)
                    ++k;
                const Eigen::Vector2d d = w[k] - w[k - 1];
                heading = d.norm() > 0.0 ? std::atan2(d.y(), d.x()) : 0.0;
            }
            out.push_back({p.x(), p.y(), heading});
        }
        return out;
    }

    struct IkOutcome
    {
        Eigen::VectorXd q;
        double position_error = kInf;
        double rotation_error = kInf;
        bool ok = false;
    };

    inline double rotationError(const Eigen::Matrix3d &R, const Eigen::Matrix3d &Rt)
    {
        return std::sqrt((R.col(0) - Rt.col(0)).squaredNorm() + (R.col(1) - Rt.col(1)).squaredNorm());
    }

    /// Joint vector reaching the goal from a fixed base: L-BFGS on
    /// |r|^2 / 2 plus the static constraint penalties (joint limits, arm
    /// clearance, self clearance), restarted from random seeds. ok requires
    /// the tolerances and a collision-free state with the init margin.
    inline IkOutcome solveIk(const world::World &w, const robot::RobotModel &m, const opt::GoalSpec &goal,
                             const SE2 &base, const Eigen::VectorXd &q_seed, Rng &rng, const InitConfig &cfg,
                             const opt::PenaltyEvaluator &pen)
    {
        const int n = m.dof(), D = n + 2;
        const double mu = 1e-2;
        const Eigen::Vector2d xy(base.x, base.y);
        opt::Objective f = [&](const Eigen::VectorXd &q, Eigen::VectorXd &g)
        {
            const auto gr = opt::goalResidual(m, goal, base, q);
            Eigen::Matrix<double, 4, Eigen::Dynamic> vals = Eigen::Matrix<double, 4, Eigen::Dynamic>::Zero(4, D);
            vals(0, traj::kChTheta) = base.theta;
            vals.row(0).tail(n) = q.transpose();
            Eigen::Matrix<double, 3, Eigen::Dynamic> gp;
            Eigen::Vector2d gxy;
            const double p = pen.sample(vals, xy, gp, gxy);
            g = gr.J.rightCols(n).transpose() * gr.r + mu * gp.row(0).tail(n).transpose();
            return 0.5 * gr.r.squaredNorm() + mu * p;
        };
        opt::LbfgsParams lp;
        lp.max_iterations = cfg.ik_max_iterations;
        lp.g_epsilon = 1e-10;
        lp.delta = 1e-14;
        lp.memory = 8;

        IkOutcome best;
        for (int attempt = 0; attempt <= cfg.ik_restarts; ++attempt)
        {
            Eigen::VectorXd q(n);
            if (attempt == 0)
                q = q_seed;
            else
                for (int k = 0; k < n; ++k)
                    q(k) = rng.uniform(-0.8, 0.8) * m.limits.q_max(k);
            opt::lbfgsMinimize(f, q, lp);
            const SE3Pose ee = robot::forwardKinematics(m, base, q);
            IkOutcome out;
            out.q = q;
            out.position_error = (ee.p - goal.pose.p).norm();
            out.rotation_error = rotationError(ee.R, goal.pose.R);
            out.ok = out.position_error < cfg.ik_position_tol && out.rotation_error < cfg.ik_rotation_tol &&
                     (q.cwiseAbs().array() < m.limits.q_max.array()).all() &&
                     world::isStateFree(w, m, robot::WholeBodyState{base, q}, cfg.margin);
            if (out.ok)
                return out;
            if (out.position_error < best.position_error)
                best = out;
        }
        return best;
    }

    struct GoalBase
    {
        SE2 base;
        Eigen::VectorXd q;
    };

    /// Base poses around the goal end-effector admitting a collision-free
    /// IK solution, nearest to the start first. The heading faces away from
    /// the start so the base can drive in forward.
    inline std::vector<GoalBase> findGoalBases(const world::World &w, const robot::RobotModel &m,
                                               const opt::GoalSpec &goal, const SE2 &start, const PlannerConfig &cfg,
                                               Rng &rng)
    {
        const InitConfig &ic = cfg.init;
        const topo::FreeSpace fs(w.esdf, cfg.topo.clearance_min, cfg.topo.step_cells);
        const opt::PenaltyEvaluator pen(w, m, cfg.opt);
        std::vector<std::pair<double, GoalBase>> found;
        const Eigen::Vector2d target = goal.pose.p.head<2>(), s0(start.x, start.y);
        for (int k = 0; k < ic.goal_base_samples && static_cast<int>(found.size()) < ic.goal_base_keep; ++k)
        {
            const double r = std::sqrt(rng.uniform(ic.goal_base_rmin * ic.goal_base_rmin,
                                                   ic.goal_base_rmax * ic.goal_base_rmax));
            const double phi = rng.uniform(-kPi, kPi);
            const Eigen::Vector2d p = target + r * Eigen::Vector2d(std::cos(phi), std::sin(phi));
            if (!fs.pointFree(p) ||
                w.esdf.query(p).distance < m.collision.base_clearance + ic.margin)
                continue;
            const Eigen::Vector2d d = p - s0;
            const double heading = d.norm() > 0.3 ? std::atan2(d.y(), d.x()) : start.theta;
            const SE2 base{p.x(), p.y(), heading};
            const auto ik = solveIk(w, m, goal, base, m.travel_q, rng, ic, pen);
            if (ik.ok)
                found.push_back({d.norm(), GoalBase{base, ik.q}});
        }
        std::stable_sort(found.begin(), found.end(),
                         [](const auto &a, const auto &b) { return a.first < b.first; });
        std::vector<GoalBase> out;
        for (auto &f : found)
            out.push_back(std::move(f.second));
        return out;
    }

    namespace detail
    {
        inline Eigen::VectorXd lerp(const Eigen::VectorXd &a, const Eigen::VectorXd &b, double t)
        {
            return a + (b - a) * std::clamp(t, 0.0, 1.0);
        }

        // Straight interpolation start -> goal, or start -> travel pose ->
        // goal when `via_travel` and there are enough states.
        inline std::vector<Eigen::VectorXd> nominalSchedule(int N, const Eigen::VectorXd &q_start,
                                                            const Eigen::VectorXd &q_goal,
                                                            const Eigen::VectorXd &travel, double step,
                                                            bool via_travel)
        {
            auto steps = [&](const Eigen::VectorXd &a, const Eigen::VectorXd &b)
            { return static_cast<int>(std::ceil((a - b).cwiseAbs().maxCoeff() / (0.8 * step))); };
            std::vector<Eigen::VectorXd> nominal(N, q_start);
            const int nA = steps(q_start, travel), nC = steps(travel, q_goal);
            if (via_travel && N - 1 >= nA + nC + 1)
            {
                for (int i = 0; i < N; ++i)
                {
                    if (i <= nA)
                        nominal[i] = lerp(q_start, travel, nA ? double(i) / nA : 1.0);
                    else if (i >= N - 1 - nC)
                        nominal[i] = lerp(travel, q_goal, nC ? double(i - (N - 1 - nC)) / nC : 1.0);
                    else
                        nominal[i] = travel;
                }
            }
            else
            {
                for (int i = 0; i < N; ++i)
                    nominal[i] = lerp(q_start, q_goal, N > 1 ? double(i) / (N - 1) : 1.0);
            }
            return nominal;
        }
    } // namespace detail

    /// Joint vectors along the base states. Tries a straight interpolation
    /// start -> goal, then a detour through the travel pose, each with
    /// per-state collision repair by random perturbation. When the final
    /// step would exceed dq_step the arm finishes with extra states at the
    /// goal base. Every output state is collision-free with the init margin;
    /// consecutive joint vectors differ by at most dq_step per joint.
    inline std::optional<std::vector<robot::WholeBodyState>>
    sampleArmPath(const std::vector<SE2> &bases, const Eigen::VectorXd &q_start, const Eigen::VectorXd &q_goal,
                  const world::World &w, const robot::RobotModel &m, Rng &rng, const InitConfig &cfg)
    {
        const int n = m.dof();
        const int N = static_cast<int>(bases.size());
        if (N < 1)
            return std::nullopt;
        const double step = cfg.dq_step;
        auto freeState = [&](const SE2 &b, const Eigen::VectorXd &q)
        {
            return (q.cwiseAbs().array() < m.limits.q_max.array()).all() &&
                   world::isStateFree(w, m, robot::WholeBodyState{b, q}, cfg.margin);
        };
        auto withinStep = [&](const Eigen::VectorXd &a, const Eigen::VectorXd &b)
        { return (a - b).cwiseAbs().maxCoeff() <= step + 1e-12; };

        for (const bool via_travel : {false, true})
        {
            const auto nominal = detail::nominalSchedule(N, q_start, q_goal, m.travel_q, step, via_travel);
            std::vector<robot::WholeBodyState> out;
            out.push_back({bases[0], q_start});
            bool failed = false;
            for (int i = 1; i < N - 1 && !failed; ++i)
            {
                const Eigen::VectorXd &prev = out.back().q;
                Eigen::VectorXd q = nominal[i];
                if (!(withinStep(q, prev) && freeState(bases[i], q)))
                {
                    bool fixed = false;
                    for (int a = 0; a < cfg.repair_attempts && !fixed; ++a)
                    {
                        const double radius = step * (0.2 + 0.8 * double(a) / cfg.repair_attempts);
                        Eigen::VectorXd c(n);
                        for (int k = 0; k < n; ++k)
                            c(k) = std::clamp(nominal[i](k) + rng.uniform(-radius, radius), prev(k) - step,
                                              prev(k) + step);
                        if (freeState(bases[i], c))
                        {
                            q = c;
                            fixed = true;
                        }
                    }
                    failed = !fixed;
                }
                out.push_back({bases[i], q});
            }
            if (failed)
                continue;
            if (N > 1)
            {
                // reach the goal base with the current arm, then finish the arm
                const SE2 &gb = bases.back();
                const Eigen::VectorXd q0 = out.back().q;
                if (withinStep(q0, q_goal))
                {
                    out.push_back({gb, q_goal});
                }
                else
                {
                    if (!freeState(gb, q0))
                        continue;
                    out.push_back({gb, q0});
                    const int k = static_cast<int>(std::ceil((q_goal - q0).cwiseAbs().maxCoeff() / step));
                    for (int i = 1; i <= k && !failed; ++i)
                    {
                        const Eigen::VectorXd q = detail::lerp(q0, q_goal, double(i) / k);
                        failed = !freeState(gb, q);
                        out.push_back({gb, q});
                    }
                    if (failed)
                        continue;
                }
            }
            return out;
        }
        return std::nullopt;
    }

} // namespace wbp::pipeline

#endif
