#ifndef WBPLAN_TRAJ_MINCO_HPP
#define WBPLAN_TRAJ_MINCO_HPP

#include "wbplan/traj/trajectory.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace wbp::traj
{
    /// Square banded matrix with in-place LU factorization without pivoting.
    /// Element (i, j) is stored at data[(i - j + upper) * n + j].
    class BandedSystem
    {
    public:
        void create(int n, int lower, int upper)
        {
            n_ = n;
            lower_ = lower;
            upper_ = upper;
            data_.assign(static_cast<std::size_t>(n) * (lower + upper + 1), 0.0);
        }

        void reset() { std::fill(data_.begin(), data_.end(), 0.0); }

        int size() const { return n_; }

        double operator()(int i, int j) const { return data_[offset(i, j)]; }
        double &operator()(int i, int j) { return data_[offset(i, j)]; }

        void factorizeLU()
        {
            for (int k = 0; k <= n_ - 2; ++k)
            {
                const int iM = std::min(k + lower_, n_ - 1);
                const double pivot = (*this)(k, k);
                if (pivot == 0.0)
                    throw std::runtime_error("singular banded system");
                for (int i = k + 1; i <= iM; ++i)
                    if ((*this)(i, k) != 0.0)
                        (*this)(i, k) /= pivot;
                const int jM = std::min(k + upper_, n_ - 1);
                for (int j = k + 1; j <= jM; ++j)
                {
                    const double akj = (*this)(k, j);
                    if (akj == 0.0)
                        continue;
                    for (int i = k + 1; i <= iM; ++i)
                        if ((*this)(i, k) != 0.0)
                            (*this)(i, j) -= (*this)(i, k) * akj;
                }
            }
        }

        // Solves A x = b in place (b is n x m).
        template <typename Mat>
        void solve(Mat &b) const
        {
            for (int j = 0; j < n_; ++j)
            {
                const int iM = std::min(j + lower_, n_ - 1);
                for (int i = j + 1; i <= iM; ++i)
                    if ((*this)(i, j) != 0.0)
                        b.row(i) -= (*this)(i, j) * b.row(j);
            }
            for (int j = n_ - 1; j >= 0; --j)
            {
                b.row(j) /= (*this)(j, j);
                const int iM = std::max(0, j - upper_);
                for (int i = iM; i <= j - 1; ++i)
                    if ((*this)(i, j) != 0.0)
                        b.row(i) -= (*this)(i, j) * b.row(j);
            }
        }

        // Solves A^T x = b in place.
        template <typename Mat>
        void solveAdj(Mat &b) const
        {
            for (int j = 0; j < n_; ++j)
            {
                b.row(j) /= (*this)(j, j);
                const int iM = std::min(j + upper_, n_ - 1);
                for (int i = j + 1; i <= iM; ++i)
                    if ((*this)(j, i) != 0.0)
                        b.row(i) -= (*this)(j, i) * b.row(j);
            }
            for (int j = n_ - 1; j >= 0; --j)
            {
                const int iM = std::max(0, j - lower_);
                for (int i = iM; i <= j - 1; ++i)
                    if ((*this)(j, i) != 0.0)
                        b.row(i) -= (*this)(j, i) * b.row(j);
            }
        }

    private:
        std::size_t offset(int i, int j) const
        {
            return static_cast<std::size_t>(i - j + upper_) * n_ + j;
        }

        int n_ = 0, lower_ = 0, upper_ = 0;
        std::vector<double> data_;
    };

    /// Minimum-jerk piecewise quintic map (c = M(T)^-1 b(P, e)).
    ///
    /// Row layout of the 6M x 6M system: three start rows (value, rate,
    /// acceleration), then per interior junction i the jerk and snap
    /// continuity rows, the waypoint row and value/rate/acceleration
    /// continuity rows, then three end rows. The factorization is shared by
    /// every channel and retained for gradient propagation.
    class MincoJerk
    {
    public:
        // head/tail are D x 3 matrices holding [value, rate, acceleration].
        void generate(const Eigen::MatrixXd &head, const Eigen::MatrixXd &tail, const Eigen::MatrixXd &inner,
                      const Eigen::VectorXd &T)
        {
            const int M = static_cast<int>(T.size());
            const int D = static_cast<int>(head.rows());
            if (M < 1 || inner.cols() != M - 1 || inner.rows() != D || tail.rows() != D)
                throw std::invalid_argument("MincoJerk: inconsistent dimensions");
            if ((T.array() <= 0.0).any())
                throw std::runtime_error("singular banded system: non-positive duration");
            T_ = T;
            A_.create(6 * M, 6, 6);
            b_.setZero(6 * M, D);

            A_(0, 0) = 1.0;
            A_(1, 1) = 1.0;
            A_(2, 2) = 2.0;
            b_.row(0) = head.col(0).transpose();
            b_.row(1) = head.col(1).transpose();
            b_.row(2) = head.col(2).transpose();

            for (int i = 0; i < M - 1; ++i)
            {
                const int r = 6 * i + 3, c = 6 * i;
                setRow(r, c, basisRow(3, T(i)));
                A_(r, c + 9) = -6.0;
                setRow(r + 1, c, basisRow(4, T(i)));
                A_(r + 1, c + 10) = -24.0;
                setRow(r + 2, c, basisRow(0, T(i)));
                setRow(r + 3, c, basisRow(0, T(i)));
                A_(r + 3, c + 6) = -1.0;
                setRow(r + 4, c, basisRow(1, T(i)));
                A_(r + 4, c + 7) = -1.0;
                setRow(r + 5, c, basisRow(2, T(i)));
                A_(r + 5, c + 8) = -2.0;
                b_.row(r + 2) = inner.col(i).transpose();
            }
            const int r = 6 * M - 3, c = 6 * (M - 1);
            for (int o = 0; o < 3; ++o)
            {
                setRow(r + o, c, basisRow(o, T(M - 1)));
                b_.row(r + o) = tail.col(o).transpose();
            }
            A_.factorizeLU();
            A_.solve(b_);
        }

        const Eigen::MatrixXd &coeffs() const { return b_; }
        const Eigen::VectorXd &durations() const { return T_; }

        /// Back-propagates dJ/dc (6M x D) and the direct dJ/dT through the
        /// linear system. Outputs gradients w.r.t. interior waypoints
        /// (D x (M-1)), tail conditions (D x 3) and total dJ/dT.
        void propagateGrad(const Eigen::MatrixXd &grad_c, const Eigen::VectorXd &grad_T_direct,
                           Eigen::MatrixXd &grad_inner, Eigen::MatrixXd &grad_tail, Eigen::VectorXd &grad_T) const
        {
            const int M = static_cast<int>(T_.size());
            const int D = static_cast<int>(b_.cols());
            Eigen::MatrixXd adj = grad_c;
            A_.solveAdj(adj);

            grad_inner.resize(D, M - 1);
            for (int i = 0; i < M - 1; ++i)
                grad_inner.col(i) = adj.row(6 * i + 5).transpose();
            grad_tail.resize(D, 3);
            for (int o = 0; o < 3; ++o)
                grad_tail.col(o) = adj.row(6 * M - 3 + o).transpose();

            // dJ/dT_i = -adj^T (dA/dT_i) c
            grad_T = grad_T_direct;
            for (int i = 0; i < M; ++i)
            {
                const auto ci = b_.middleRows<6>(6 * i);
                const double t = T_(i);
                double g = 0.0;
                if (i < M - 1)
                {
                    const int r = 6 * i + 3;
                    const int orders[6] = {3, 4, 0, 0, 1, 2};
                    for (int k = 0; k < 6; ++k)
                        g += adj.row(r + k).dot(basisRow(orders[k] + 1, t) * ci);
                }
                else
                {
                    const int r = 6 * M - 3;
                    for (int o = 0; o < 3; ++o)
                        g += adj.row(r + o).dot(basisRow(o + 1, t) * ci);
                }
                grad_T(i) -= g;
            }
        }

    private:
        void setRow(int r, int c, const Eigen::Matrix<double, 1, kCoeffs> &row)
        {
            for (int k = 0; k < kCoeffs; ++k)
                if (row(k) != 0.0)
                    A_(r, c + k) = row(k);
        }

        BandedSystem A_;
        Eigen::MatrixXd b_;
        Eigen::VectorXd T_;
    };

    /// Coefficients of the minimum-jerk trajectory through the waypoints.
    inline Eigen::MatrixXd solveCoefficients(const Eigen::MatrixXd &head, const Eigen::MatrixXd &tail,
                                             const Eigen::MatrixXd &inner, const Eigen::VectorXd &T)
    {
        MincoJerk m;
        m.generate(head, tail, inner, T);
        return m.coeffs();
    }

} // namespace wbp::traj

#endif
