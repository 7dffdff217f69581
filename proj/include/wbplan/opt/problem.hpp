#ifndef WBPLAN_OPT_PROBLEM_HPP
#define WBPLAN_OPT_PROBLEM_HPP

#include "wbplan/opt/config.hpp"
#include "wbplan/opt/costs.hpp"
#include "wbplan/robot/flat.hpp"
#include "wbplan/robot/kinematics.hpp"
#include "wbplan/traj/minco.hpp"
#include "wbplan/traj/transforms.hpp"
#include "wbplan/world/world.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace wbp::opt
{
    // Start conditions of every channel: pose, rates and accelerations.
    struct StartState
    {
        SE2 base;
        Eigen::VectorXd q;
        double v = 0.0, omega = 0.0, a = 0.0, beta = 0.0;
        Eigen::VectorXd dq, ddq; // empty = zero
    };

    struct PenaltyResult
    {
        double value = 0.0;
        Eigen::MatrixXd d_c;
        Eigen::VectorXd d_T;
        // d/d(base grid points), consumed by FlatGrid::backward
        Eigen::Matrix2Xd d_pts;
    };

    /// Discretized inequality penalties: at t = (l / K) T_j for l = 0..K-1 of
    /// every segment, plus the trajectory end, accumulates
    /// rho_c * (T_j / K) * sum L(max(0, C)) with L(x) = x^3 over the diamond
    /// velocity pair, base and yaw acceleration, joint position, rate and
    /// acceleration bounds (all normalized by their limits), and the
    /// environment and self clearances (divided by length_scale).
    class PenaltyEvaluator
    {
    public:
        PenaltyEvaluator(const world::World &w, const robot::RobotModel &m, const OptimizerConfig &cfg)
            : w_(&w), m_(&m), cfg_(&cfg)
        {
            const auto &L = m.limits;
            const double s = cfg.limit_scale;
            vs_ = s * L.v_max;
            ws_ = s * L.omega_max;
            as2_ = std::pow(s * L.a_max, 2);
            bs2_ = std::pow(s * L.beta_max, 2);
            qs2_ = (s * L.q_max).array().square();
            dqs2_ = (s * L.dq_max).array().square();
            ddqs2_ = (s * L.ddq_max).array().square();

            // Bound on the distance of any sphere surface from the base axis,
            // used to skip arm queries far away from obstacles.
            const int n = m.dof();
            std::vector<double> reach(n + 1, 0.0);
            reach[0] = m.mount.xyz.norm();
            for (int k = 1; k <= n; ++k)
                reach[k] = reach[k - 1] + m.joints[k - 1].origin_xyz.norm();
            arm_reach_ = 0.0;
            max_sphere_ = 0.0;
            for (const auto &sp : m.collision.spheres)
            {
                arm_reach_ = std::max(arm_reach_, reach[sp.link] + sp.offset.norm() + sp.radius);
                max_sphere_ = std::max(max_sphere_, sp.radius);
            }
        }

        // Penalty of one sample (unweighted) and its partials w.r.t. the
        // channel values, rates and accelerations (rows 0..2) and (x, y).
        double sample(const Eigen::Matrix<double, 4, Eigen::Dynamic> &vals, const Eigen::Vector2d &xy,
                      Eigen::Matrix<double, 3, Eigen::Dynamic> &g, Eigen::Vector2d &g_xy) const
        {
            const auto &m = *m_;
            const auto &cfg = *cfg_;
            const int n = m.dof();
            g.setZero(3, n + 2);
            g_xy.setZero();
            double p = 0.0;
            auto hinge = [&p](double viol) -> double
            {
                if (viol <= 0.0)
                    return 0.0;
                p += viol * viol * viol;
                return 3.0 * viol * viol;
            };

            const double v = vals(1, 0), om = vals(1, 1);
            for (const double sg : {1.0, -1.0})
            {
                const double u = om / ws_ + sg * v / vs_;
                const double dp = hinge(std::abs(u) - 1.0);
                if (dp == 0.0)
                    continue;
                const double su = u > 0.0 ? 1.0 : -1.0;
                g(1, 1) += dp * su / ws_;
                g(1, 0) += dp * su * sg / vs_;
            }
            const double a = vals(2, 0), be = vals(2, 1);
            g(2, 0) += hinge(a * a / as2_ - 1.0) * 2.0 * a / as2_;
            g(2, 1) += hinge(be * be / bs2_ - 1.0) * 2.0 * be / bs2_;
            for (int k = 0; k < n; ++k)
            {
                const int ch = traj::kChQ0 + k;
                const double q = vals(0, ch), dq = vals(1, ch), ddq = vals(2, ch);
                g(0, ch) += hinge(q * q / qs2_(k) - 1.0) * 2.0 * q / qs2_(k);
                g(1, ch) += hinge(dq * dq / dqs2_(k) - 1.0) * 2.0 * dq / dqs2_(k);
                g(2, ch) += hinge(ddq * ddq / ddqs2_(k) - 1.0) * 2.0 * ddq / ddqs2_(k);
            }

            const double ls = cfg.length_scale;
            const auto e = w_->esdf.query(xy);
            {
                const double dp = hinge((m.collision.base_clearance + cfg.collision_margin - e.distance) / ls);
                g_xy -= dp / ls * e.gradient;
            }

            const Eigen::VectorXd q = vals.row(0).tail(n).transpose();
            const robot::ChainFrames f(m, SE2{xy.x(), xy.y(), vals(0, 1)}, q);
            Eigen::RowVectorXd gs = Eigen::RowVectorXd::Zero(3 + n);
            const double inflation = m.collision.base.radius;
            const bool arm_near = e.distance + inflation - 2.0 * w_->esdf.resolution() <
                                  arm_reach_ + cfg.collision_margin;
            for (const auto &sp : m.collision.spheres)
            {
                const Eigen::Vector3d c = f.pointOnLink(sp.link, sp.offset);
                const double need = sp.radius + cfg.collision_margin;
                Eigen::Vector3d gc = Eigen::Vector3d::Zero();
                if (arm_near)
                {
                    const auto d = w_->sdf.queryNear(c, need + 1e-3);
                    const double dp = hinge((need - d.distance) / ls);
                    gc -= dp / ls * d.gradient;
                }
                // floor plane
                const double dpf = hinge((need - c.z()) / ls);
                gc.z() -= dpf / ls;
                if (!gc.isZero(0.0))
                    f.addPointGradient(sp.link, c, gc, gs);
            }
            if (!m.collision.self_pairs.empty())
            {
                Eigen::MatrixXd jac;
                const Eigen::VectorXd d = robot::selfCollisionDistances(m, f, &jac, cfg.self_margin);
                for (int k = 0; k < d.size(); ++k)
                {
                    const double dp = hinge((cfg.self_margin - d(k)) / ls);
                    if (dp != 0.0)
                        gs.tail(n) -= dp / ls * jac.row(k);
                }
            }
            g_xy += gs.head<2>().transpose();
            g(0, 1) += gs(2);
            g.row(0).tail(n) += gs.tail(n);
            return p;
        }

        PenaltyResult evaluate(const traj::WholeBodyTrajectory &tr, const robot::FlatGrid &grid) const
        {
            const int M = tr.pieces(), D = tr.channels(), K = grid.samplesPerSegment();
            const double rc = cfg_->rho_c;
            PenaltyResult out;
            out.d_c.setZero(6 * M, D);
            out.d_T.setZero(M);
            out.d_pts.setZero(2, grid.pointCount());
            Eigen::Matrix<double, 4, Eigen::Dynamic> vals(4, D);
            Eigen::Matrix<double, 3, Eigen::Dynamic> g(3, D);
            Eigen::Vector2d g_xy;
            for (int j = 0; j < M; ++j)
            {
                const double Tj = tr.durations(j);
                const auto cj = tr.segment(j);
                const int lmax = j == M - 1 ? K : K - 1;
                for (int l = 0; l <= lmax; ++l)
                {
                    const double alpha = double(l) / K;
                    const traj::PolyEval pe(alpha * Tj);
                    vals.noalias() = pe.rows * cj;
                    const int idx = j * K + l;
                    const double p = sample(vals, grid.point(idx), g, g_xy);
                    if (p == 0.0)
                        continue;
                    const double wgt = rc * Tj / K;
                    out.value += wgt * p;
                    out.d_c.middleRows<6>(6 * j).noalias() += wgt * pe.rows.topRows<3>().transpose() * g;
                    double dt = 0.0;
                    for (int o = 0; o < 3; ++o)
                        dt += g.row(o).dot(vals.row(o + 1));
                    out.d_T(j) += rc * p / K + wgt * alpha * dt;
                    out.d_pts.col(idx) += wgt * g_xy;
                }
            }
            return out;
        }

    private:
        const world::World *w_;
        const robot::RobotModel *m_;
        const OptimizerConfig *cfg_;
        double vs_, ws_, as2_, bs2_;
        Eigen::ArrayXd qs2_, dqs2_, ddqs2_;
        double arm_reach_ = 0.0, max_sphere_ = 0.0;
    };

    /// Penalties with the flat-output dependence already folded into d_c / d_T.
    inline CostGrad penaltyTerms(const traj::WholeBodyTrajectory &tr, const world::World &w,
                                 const robot::RobotModel &m, const OptimizerConfig &cfg)
    {
        robot::FlatGrid grid;
        grid.compute(tr, cfg.K);
        const auto pr = PenaltyEvaluator(w, m, cfg).evaluate(tr, grid);
        CostGrad out{pr.value, pr.d_c, pr.d_T};
        grid.backward(pr.d_pts, out.d_c, out.d_T);
        return out;
    }

    /// Objective over the unconstrained decision vector
    ///   x = [P (D x (M-1), column-major, joint rows squashed), e (joints squashed), tau (M)]
    /// where D = N + 2 channels (s, theta, q).
    class TrajectoryProblem
    {
    public:
        struct Breakdown
        {
            double jerk = 0.0;    // includes rho * sum(T)
            double penalty = 0.0;
            double alm = 0.0;
            Eigen::Matrix<double, 9, 1> residual = Eigen::Matrix<double, 9, 1>::Zero();
        };

        TrajectoryProblem(const world::World &w, const robot::RobotModel &m, const OptimizerConfig &cfg,
                          const GoalSpec &goal, const StartState &start, int pieces)
            : w_(&w), m_(&m), cfg_(cfg), goal_(goal), start_(start), M_(pieces), D_(m.dof() + 2),
              pen_(w, m, cfg_)
        {
            if (M_ < 1)
                throw InputError("trajectory needs at least one piece");
            const int n = m.dof();
            if (start.q.size() != n)
                throw InputError("start joint vector has wrong size");
            head_.setZero(D_, 3);
            head_(traj::kChTheta, 0) = start.base.theta;
            head_(traj::kChS, 1) = start.v;
            head_(traj::kChTheta, 1) = start.omega;
            head_(traj::kChS, 2) = start.a;
            head_(traj::kChTheta, 2) = start.beta;
            head_.col(0).tail(n) = start.q;
            if (start.dq.size() == n)
                head_.col(1).tail(n) = start.dq;
            if (start.ddq.size() == n)
                head_.col(2).tail(n) = start.ddq;
            W_ = cfg_.W.size() == D_ ? cfg_.W : Eigen::VectorXd::Ones(D_);
        }

        // pen_ keeps a pointer to cfg_
        TrajectoryProblem(const TrajectoryProblem &) = delete;
        TrajectoryProblem &operator=(const TrajectoryProblem &) = delete;

        int pieces() const { return M_; }
        int channels() const { return D_; }
        int dimension() const { return D_ * (M_ - 1) + D_ + M_; }
        const OptimizerConfig &config() const { return cfg_; }

        Eigen::VectorXd encode(const Eigen::MatrixXd &inner, const Eigen::VectorXd &end, const Eigen::VectorXd &T) const
        {
            Eigen::VectorXd x(dimension());
            const auto &qm = m_->limits.q_max;
            int k = 0;
            for (int i = 0; i < M_ - 1; ++i)
                for (int d = 0; d < D_; ++d)
                    x(k++) = d >= traj::kChQ0 ? traj::squashJoint(inner(d, i), qm(d - traj::kChQ0)) : inner(d, i);
            for (int d = 0; d < D_; ++d)
                x(k++) = d >= traj::kChQ0 ? traj::squashJoint(end(d), qm(d - traj::kChQ0)) : end(d);
            for (int j = 0; j < M_; ++j)
                x(k++) = traj::tauFromTime(T(j));
            return x;
        }

        // Decodes x; when the derivative outputs are non-null they receive
        // the diagonal chain factors of the inverse transforms.
        void decode(const Eigen::VectorXd &x, Eigen::MatrixXd &inner, Eigen::VectorXd &end, Eigen::VectorXd &T,
                    Eigen::MatrixXd *d_inner = nullptr, Eigen::VectorXd *d_end = nullptr,
                    Eigen::VectorXd *d_T = nullptr) const
        {
            const auto &qm = m_->limits.q_max;
            inner.resize(D_, M_ - 1);
            end.resize(D_);
            T.resize(M_);
            if (d_inner)
            {
                d_inner->setOnes(D_, M_ - 1);
                d_end->setOnes(D_);
                d_T->resize(M_);
            }
            int k = 0;
            auto take = [&](double u, int d, double &val, double *der)
            {
                if (d >= traj::kChQ0)
                {
                    const double lim = qm(d - traj::kChQ0);
                    val = traj::unsquashJoint(u, lim);
                    if (der)
                        *der = traj::unsquashJointDerivative(u, lim);
                }
                else
                    val = u;
            };
            for (int i = 0; i < M_ - 1; ++i)
                for (int d = 0; d < D_; ++d)
                    take(x(k++), d, inner(d, i), d_inner ? &(*d_inner)(d, i) : nullptr);
            for (int d = 0; d < D_; ++d)
                take(x(k++), d, end(d), d_end ? &(*d_end)(d) : nullptr);
            for (int j = 0; j < M_; ++j)
            {
                T(j) = traj::timeFromTau(x(k));
                if (d_T)
                    (*d_T)(j) = traj::timeFromTauDerivative(x(k));
                ++k;
            }
        }

        traj::WholeBodyTrajectory trajectory(const Eigen::VectorXd &x) const
        {
            Eigen::MatrixXd inner;
            Eigen::VectorXd end, T;
            decode(x, inner, end, T);
            traj::MincoJerk minco;
            minco.generate(head_, tailOf(end), inner, T);
            return {T, minco.coeffs(), start_.base.x, start_.base.y};
        }

        Eigen::Matrix<double, 9, 1> residual(const Eigen::VectorXd &x) const
        {
            Breakdown b;
            Eigen::VectorXd g;
            evaluate(x, Eigen::VectorXd::Zero(9), 0.0, g, &b, false);
            return b.residual;
        }

        /// f + lambda^T r + sigma / 2 |r|^2, f = jerk cost + rho |T|_1 + penalties.
        double evaluate(const Eigen::VectorXd &x, const Eigen::VectorXd &lambda, double sigma, Eigen::VectorXd &grad,
                        Breakdown *info = nullptr, bool with_grad = true) const
        {
            const int n = m_->dof();
            Eigen::MatrixXd inner, d_inner;
            Eigen::VectorXd end, T, d_end, d_T;
            decode(x, inner, end, T, &d_inner, &d_end, &d_T);

            traj::MincoJerk minco;
            minco.generate(head_, tailOf(end), inner, T);
            const traj::WholeBodyTrajectory tr{T, minco.coeffs(), start_.base.x, start_.base.y};

            auto jc = jerkCost(tr, W_, cfg_.rho);
            robot::FlatGrid grid;
            grid.compute(tr, cfg_.K);
            auto pr = pen_.evaluate(tr, grid);

            const Eigen::Vector2d xy_f = grid.end();
            const auto gr = goalResidual(*m_, goal_, SE2{xy_f.x(), xy_f.y(), end(traj::kChTheta)}, end.tail(n));
            const double alm = lambda.dot(gr.r) + 0.5 * sigma * gr.r.squaredNorm();
            if (info)
            {
                info->jerk = jc.value;
                info->penalty = pr.value;
                info->alm = alm;
                info->residual = gr.r;
            }
            const double total = jc.value + pr.value + alm;
            if (!with_grad)
                return total;

            Eigen::MatrixXd gc = jc.d_c + pr.d_c;
            Eigen::VectorXd gT = jc.d_T + pr.d_T;
            const Eigen::RowVectorXd gs = (lambda + sigma * gr.r).transpose() * gr.J;
            pr.d_pts.col(grid.pointCount() - 1) += gs.head<2>().transpose();
            Eigen::VectorXd g_end = Eigen::VectorXd::Zero(D_);
            g_end(traj::kChTheta) += gs(2);
            g_end.tail(n) += gs.tail(n).transpose();
            grid.backward(pr.d_pts, gc, gT);

            Eigen::MatrixXd g_inner, g_tail;
            Eigen::VectorXd g_T;
            minco.propagateGrad(gc, gT, g_inner, g_tail, g_T);
            g_end += g_tail.col(0);

            grad.resize(dimension());
            int k = 0;
            for (int i = 0; i < M_ - 1; ++i)
                for (int d = 0; d < D_; ++d, ++k)
                    grad(k) = g_inner(d, i) * d_inner(d, i);
            for (int d = 0; d < D_; ++d, ++k)
                grad(k) = g_end(d) * d_end(d);
            for (int j = 0; j < M_; ++j, ++k)
                grad(k) = g_T(j) * d_T(j);
            return total;
        }

    private:
        Eigen::MatrixXd tailOf(const Eigen::VectorXd &end) const
        {
            Eigen::MatrixXd tail = Eigen::MatrixXd::Zero(D_, 3);
            tail.col(0) = end;
            return tail;
        }

        const world::World *w_;
        const robot::RobotModel *m_;
        OptimizerConfig cfg_;
        GoalSpec goal_;
        StartState start_;
        int M_, D_;
        PenaltyEvaluator pen_;
        Eigen::MatrixXd head_;
        Eigen::VectorXd W_;
    };

} // namespace wbp::opt

#endif
