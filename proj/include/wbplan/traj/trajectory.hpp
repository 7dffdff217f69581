#ifndef WBPLAN_TRAJ_TRAJECTORY_HPP
#define WBPLAN_TRAJ_TRAJECTORY_HPP

#include "wbplan/common.hpp"

#include <Eigen/Dense>

#include <algorithm>

namespace wbp::traj
{
    constexpr int kCoeffs = 6;

    // Channel layout shared by every trajectory: arc length, yaw, joints.
    constexpr int kChS = 0;
    constexpr int kChTheta = 1;
    constexpr int kChQ0 = 2;

    /// Derivative of the given order of the natural basis [1, t, ..., t^5].
    inline Eigen::Matrix<double, 1, kCoeffs> basisRow(int order, double t)
    {
        Eigen::Matrix<double, 1, kCoeffs> row = Eigen::Matrix<double, 1, kCoeffs>::Zero();
        for (int k = order; k < kCoeffs; ++k)
        {
            double f = 1.0;
            for (int m = 0; m < order; ++m)
                f *= (k - m);
            row(k) = f * std::pow(t, k - order);
        }
        return row;
    }

    // Evaluates orders 0..3 of a quintic at local time t in one pass.
    struct PolyEval
    {
        Eigen::Matrix<double, 4, kCoeffs> rows;

        explicit PolyEval(double t)
        {
            const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
            rows << 1.0, t, t2, t3, t4, t5,
                0.0, 1.0, 2.0 * t, 3.0 * t2, 4.0 * t3, 5.0 * t4,
                0.0, 0.0, 2.0, 6.0 * t, 12.0 * t2, 20.0 * t3,
                0.0, 0.0, 0.0, 6.0, 24.0 * t, 60.0 * t2;
        }
    };

    /// Piecewise quintic over channels (s, theta, q_1..q_N). Coefficients of
    /// segment j occupy rows 6j..6j+5 of `coeffs`, lowest order first.
    struct WholeBodyTrajectory
    {
        Eigen::VectorXd durations;
        Eigen::MatrixXd coeffs;
        double x0 = 0.0;
        double y0 = 0.0;

        int pieces() const { return static_cast<int>(durations.size()); }
        int channels() const { return static_cast<int>(coeffs.cols()); }
        int dof() const { return channels() - 2; }
        double totalDuration() const { return durations.sum(); }

        auto segment(int j) const { return coeffs.middleRows<kCoeffs>(kCoeffs * j); }

        struct Locate
        {
            int segment;
            double local;
            bool clamped;
        };

        Locate locate(double t) const
        {
            Locate out{0, 0.0, false};
            const int M = pieces();
            if (t < 0.0)
            {
                out.clamped = true;
                return out;
            }
            for (int j = 0; j < M; ++j)
            {
                if (t <= durations(j) || j == M - 1)
                {
                    out.segment = j;
                    out.local = std::min(t, durations(j));
                    out.clamped = t > durations(j);
                    return out;
                }
                t -= durations(j);
            }
            return out;
        }

        /// Value (order 0) or derivative (1..4) of every channel at time t.
        /// Out-of-range t is clamped; `clamped` reports it when non-null.
        Eigen::VectorXd eval(double t, int order = 0, bool *clamped = nullptr) const
        {
            const Locate loc = locate(t);
            if (clamped)
                *clamped = loc.clamped;
            return (basisRow(order, loc.local) * segment(loc.segment)).transpose();
        }

        Eigen::VectorXd evalLocal(int seg, double local, int order) const
        {
            return (basisRow(order, local) * segment(seg)).transpose();
        }
    };

} // namespace wbp::traj

#endif
