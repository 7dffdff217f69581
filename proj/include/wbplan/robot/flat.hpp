#ifndef WBPLAN_ROBOT_FLAT_HPP
#define WBPLAN_ROBOT_FLAT_HPP

#include "wbplan/traj/trajectory.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace wbp::robot
{
    namespace detail
    {
        // One Simpson panel of (s' cos(theta), s' sin(theta)) over
        // [a * L, b * L] of a single segment, with derivatives w.r.t. the
        // segment's s / theta coefficients and the scale L.
        struct PanelResult
        {
            Eigen::Vector2d value = Eigen::Vector2d::Zero();
            Eigen::Matrix<double, 2, 6> d_cs = Eigen::Matrix<double, 2, 6>::Zero();
            Eigen::Matrix<double, 2, 6> d_cth = Eigen::Matrix<double, 2, 6>::Zero();
            Eigen::Vector2d d_L = Eigen::Vector2d::Zero();
        };

        template <typename SegS, typename SegTh>
        PanelResult simpsonPanel(const SegS &cs, const SegTh &cth, double L, double a, double b, bool with_grad)
        {
            PanelResult out;
            const double fr[3] = {a, 0.5 * (a + b), b};
            const double w[3] = {1.0, 4.0, 1.0};
            const double h = (b - a) * L;
            Eigen::Vector2d dfdt_sum = Eigen::Vector2d::Zero();
            Eigen::Vector2d f_sum = Eigen::Vector2d::Zero();
            for (int k = 0; k < 3; ++k)
            {
                const double t = fr[k] * L;
                const traj::PolyEval pe(t);
                const double v = pe.rows.row(1).dot(cs);
                const double th = pe.rows.row(0).dot(cth);
                const double c = std::cos(th), s = std::sin(th);
                const double wk = w[k] * h / 6.0;
                out.value += wk * Eigen::Vector2d(v * c, v * s);
                f_sum += w[k] * (b - a) / 6.0 * Eigen::Vector2d(v * c, v * s);
                if (!with_grad)
                    continue;
                const double acc = pe.rows.row(2).dot(cs);
                const double om = pe.rows.row(1).dot(cth);
                out.d_cs.row(0) += wk * c * pe.rows.row(1);
                out.d_cs.row(1) += wk * s * pe.rows.row(1);
                out.d_cth.row(0) += wk * (-v * s) * pe.rows.row(0);
                out.d_cth.row(1) += wk * (v * c) * pe.rows.row(0);
                dfdt_sum += wk * fr[k] * Eigen::Vector2d(acc * c - v * om * s, acc * s + v * om * c);
            }
            if (with_grad)
                out.d_L = f_sum + dfdt_sum;
            return out;
        }
    } // namespace detail

    struct FlatPosition
    {
        Eigen::Vector2d xy = Eigen::Vector2d::Zero();
        // d(x, y) / d(coefficients) for the s and theta channels (2 x 6M each)
        Eigen::MatrixXd d_cs;
        Eigen::MatrixXd d_cth;
        // d(x, y) / d(durations) (2 x M)
        Eigen::MatrixXd d_T;
    };

    /// Base position at time t by composite Simpson quadrature of
    /// (s' cos(theta), s' sin(theta)): every completed segment uses
    /// `panels` panels, the current segment integrates [0, t_local] with
    /// the same panel count.
    inline FlatPosition flatPosition(const traj::WholeBodyTrajectory &tr, double t, int panels = 8,
                                     bool with_grad = false)
    {
        const int M = tr.pieces();
        FlatPosition out;
        out.xy = Eigen::Vector2d(tr.x0, tr.y0);
        if (with_grad)
        {
            out.d_cs.setZero(2, 6 * M);
            out.d_cth.setZero(2, 6 * M);
            out.d_T.setZero(2, M);
        }
        const auto loc = tr.locate(t);
        for (int j = 0; j <= loc.segment; ++j)
        {
            const bool partial = j == loc.segment;
            const double L = partial ? loc.local : tr.durations(j);
            const auto cs = tr.coeffs.block<6, 1>(6 * j, traj::kChS);
            const auto cth = tr.coeffs.block<6, 1>(6 * j, traj::kChTheta);
            for (int p = 0; p < panels; ++p)
            {
                const auto r = detail::simpsonPanel(cs, cth, L, double(p) / panels, double(p + 1) / panels, with_grad);
                out.xy += r.value;
                if (!with_grad)
                    continue;
                out.d_cs.middleCols<6>(6 * j) += r.d_cs;
                out.d_cth.middleCols<6>(6 * j) += r.d_cth;
                if (!partial)
                    out.d_T.col(j) += r.d_L;
                else if (!loc.clamped)
                {
                    // t_local = t - sum of earlier durations
                    for (int i = 0; i < j; ++i)
                        out.d_T.col(i) -= r.d_L;
                }
            }
        }
        return out;
    }

    /// Base positions on the uniform sample grid t = (l / K) * T_j of every
    /// segment, accumulated panel by panel (one Simpson panel between
    /// consecutive grid points). Point index j * K + l; the final point
    /// (index M * K) is the trajectory end.
    class FlatGrid
    {
    public:
        void compute(const traj::WholeBodyTrajectory &tr, int K)
        {
            tr_ = &tr;
            K_ = K;
            const int M = tr.pieces();
            pts_.resize(static_cast<std::size_t>(M) * K + 1);
            pts_[0] = Eigen::Vector2d(tr.x0, tr.y0);
            for (int j = 0; j < M; ++j)
            {
                const auto cs = tr.coeffs.block<6, 1>(6 * j, traj::kChS);
                const auto cth = tr.coeffs.block<6, 1>(6 * j, traj::kChTheta);
                for (int l = 0; l < K; ++l)
                {
                    const auto r = detail::simpsonPanel(cs, cth, tr.durations(j), double(l) / K, double(l + 1) / K,
                                                        false);
                    const std::size_t p = static_cast<std::size_t>(j) * K + l;
                    pts_[p + 1] = pts_[p] + r.value;
                }
            }
        }

        int samplesPerSegment() const { return K_; }
        int pointCount() const { return static_cast<int>(pts_.size()); }
        const Eigen::Vector2d &point(int index) const { return pts_[index]; }
        const Eigen::Vector2d &point(int seg, int l) const { return pts_[static_cast<std::size_t>(seg) * K_ + l]; }
        const Eigen::Vector2d &end() const { return pts_.back(); }

        /// Accumulates d J / d(coefficients) and d J / d(durations) given
        /// d J / d(point) for every grid point (2 x pointCount()).
        void backward(const Eigen::Matrix2Xd &g_pts, Eigen::MatrixXd &grad_c, Eigen::VectorXd &grad_T) const
        {
            const auto &tr = *tr_;
            const int M = tr.pieces();
            Eigen::Vector2d after = Eigen::Vector2d::Zero();
            for (int p = M * K_ - 1; p >= 0; --p)
            {
                after += g_pts.col(p + 1);
                if (after.isZero(0.0))
                    continue;
                const int j = p / K_, l = p % K_;
                const auto cs = tr.coeffs.block<6, 1>(6 * j, traj::kChS);
                const auto cth = tr.coeffs.block<6, 1>(6 * j, traj::kChTheta);
                const auto r = detail::simpsonPanel(cs, cth, tr.durations(j), double(l) / K_, double(l + 1) / K_,
                                                    true);
                grad_c.block<6, 1>(6 * j, traj::kChS) += (after.transpose() * r.d_cs).transpose();
                grad_c.block<6, 1>(6 * j, traj::kChTheta) += (after.transpose() * r.d_cth).transpose();
                grad_T(j) += after.dot(r.d_L);
            }
        }

    private:
        const traj::WholeBodyTrajectory *tr_ = nullptr;
        int K_ = 16;
        std::vector<Eigen::Vector2d> pts_;
    };

} // namespace wbp::robot

#endif
