#ifndef WBPLAN_OPT_COSTS_HPP
#define WBPLAN_OPT_COSTS_HPP

#include "wbplan/opt/config.hpp"
#include "wbplan/robot/kinematics.hpp"
#include "wbplan/traj/trajectory.hpp"

#include <Eigen/Dense>

namespace wbp::opt
{
    struct CostGrad
    {
        double value = 0.0;
        Eigen::MatrixXd d_c;
        Eigen::VectorXd d_T;
    };

    /// Exact integral of weighted squared jerk plus rho * sum(T).
    inline CostGrad jerkCost(const traj::WholeBodyTrajectory &tr, const Eigen::VectorXd &W, double rho)
    {
        const int M = tr.pieces(), D = tr.channels();
        CostGrad out;
        out.d_c.setZero(6 * M, D);
        out.d_T.setConstant(M, rho);
        out.value = rho * tr.durations.sum();
        for (int j = 0; j < M; ++j)
        {
            const double T1 = tr.durations(j), T2 = T1 * T1, T3 = T2 * T1, T4 = T3 * T1, T5 = T4 * T1;
            for (int d = 0; d < D; ++d)
            {
                const double w = W.size() ? W(d) : 1.0;
                if (w == 0.0)
                    continue;
                const double c3 = tr.coeffs(6 * j + 3, d), c4 = tr.coeffs(6 * j + 4, d),
                             c5 = tr.coeffs(6 * j + 5, d);
                out.value += w * (36.0 * c3 * c3 * T1 + 144.0 * c3 * c4 * T2 + (192.0 * c4 * c4 + 240.0 * c3 * c5) * T3 +
                                  720.0 * c4 * c5 * T4 + 720.0 * c5 * c5 * T5);
                out.d_c(6 * j + 3, d) += w * (72.0 * c3 * T1 + 144.0 * c4 * T2 + 240.0 * c5 * T3);
                out.d_c(6 * j + 4, d) += w * (144.0 * c3 * T2 + 384.0 * c4 * T3 + 720.0 * c5 * T4);
                out.d_c(6 * j + 5, d) += w * (240.0 * c3 * T3 + 720.0 * c4 * T4 + 1440.0 * c5 * T5);
                out.d_T(j) += w * (36.0 * c3 * c3 + 288.0 * c3 * c4 * T1 + 3.0 * (192.0 * c4 * c4 + 240.0 * c3 * c5) * T2 +
                                   2880.0 * c4 * c5 * T3 + 3600.0 * c5 * c5 * T4);
            }
        }
        return out;
    }

    struct GoalResidual
    {
        Eigen::Matrix<double, 9, 1> r;
        // d r / d(x, y, theta, q)
        Eigen::Matrix<double, 9, Eigen::Dynamic> J;
    };

    /// Continuous 9-vector pose error: weighted position difference and the
    /// difference of the first two rotation columns. Zero iff the
    /// end-effector attains the goal pose.
    inline GoalResidual goalResidual(const robot::RobotModel &m, const GoalSpec &goal, const SE2 &base,
                                     const Eigen::VectorXd &q)
    {
        const robot::ChainFrames f(m, base, q);
        const SE3Pose &ee = f.endEffector();
        GoalResidual out;
        const double wp = goal.position_weight, wr = goal.rotation_weight;
        out.r.head<3>() = wp * (ee.p - goal.pose.p);
        out.r.segment<3>(3) = wr * (ee.R.col(0) - goal.pose.R.col(0));
        out.r.segment<3>(6) = wr * (ee.R.col(1) - goal.pose.R.col(1));
        const int n = m.dof();
        out.J.setZero(9, 3 + n);
        out.J.topRows<3>() = wp * f.pointJacobian(n, ee.p);
        const auto Jw = f.angularJacobian(n);
        out.J.middleRows<3>(3) = -wr * skew(ee.R.col(0)) * Jw;
        out.J.middleRows<3>(6) = -wr * skew(ee.R.col(1)) * Jw;
        return out;
    }

} // namespace wbp::opt

#endif
