#ifndef WBPLAN_TESTS_ORACLES_HPP
#define WBPLAN_TESTS_ORACLES_HPP

// Independent reference computations shared by the unit and acceptance tests.

#include "test_util.hpp"

#include "wbplan/traj/minco.hpp"
#include "wbplan/world/world.hpp"

#include <cmath>
#include <vector>

namespace wbp::test
{
    struct MincoInstance
    {
        Eigen::MatrixXd head, tail, inner;
        Eigen::VectorXd T;
    };

    inline MincoInstance randomMincoInstance(Rng &rng, int M, int D)
    {
        MincoInstance in;
        in.head.resize(D, 3);
        in.tail.resize(D, 3);
        for (int o = 0; o < 3; ++o)
        {
            in.head.col(o) = randomVector(rng, D, -1.0, 1.0);
            in.tail.col(o) = randomVector(rng, D, -1.0, 1.0);
        }
        in.inner.resize(D, M - 1);
        for (int i = 0; i < M - 1; ++i)
            in.inner.col(i) = randomVector(rng, D, -2.0, 2.0);
        in.T = randomVector(rng, M, 0.5, 2.0);
        return in;
    }

    // Dense 6M x 6M system written directly from the interpolation and
    // continuity conditions, solved with a full-pivot LU.
    inline Eigen::MatrixXd denseMincoSolve(const MincoInstance &in)
    {
        const int M = static_cast<int>(in.T.size()), D = static_cast<int>(in.head.rows());
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(6 * M, 6 * M), b = Eigen::MatrixXd::Zero(6 * M, D);
        auto deriv = [](int order, double t)
        {
            Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(6);
            for (int k = order; k < 6; ++k)
            {
                double f = 1.0;
                for (int m = 0; m < order; ++m)
                    f *= k - m;
                r(k) = f * std::pow(t, k - order);
            }
            return r;
        };
        int row = 0;
        for (int o = 0; o < 3; ++o, ++row)
        {
            A.block(row, 0, 1, 6) = deriv(o, 0.0);
            b.row(row) = in.head.col(o).transpose();
        }
        for (int i = 0; i < M - 1; ++i)
        {
            A.block(row, 6 * i, 1, 6) = deriv(0, in.T(i));
            b.row(row++) = in.inner.col(i).transpose();
            for (int o = 0; o <= 4; ++o, ++row)
            {
                A.block(row, 6 * i, 1, 6) = deriv(o, in.T(i));
                A.block(row, 6 * (i + 1), 1, 6) = -deriv(o, 0.0);
            }
        }
        for (int o = 0; o < 3; ++o, ++row)
        {
            A.block(row, 6 * (M - 1), 1, 6) = deriv(o, in.T(M - 1));
            b.row(row) = in.tail.col(o).transpose();
        }
        return A.fullPivLu().solve(b);
    }

    // Distance from p to an oriented rectangle, computed from the four edges.
    inline double rectDistanceOracle(const Eigen::Vector2d &p, const world::Footprint &f)
    {
        const auto c = f.corners();
        // inside test with edge normals (corners are counter-clockwise)
        bool inside = true;
        double best = kInf;
        for (int k = 0; k < 4; ++k)
        {
            const Eigen::Vector2d a = c[k], b = c[(k + 1) % 4];
            const Eigen::Vector2d e = b - a;
            const double cross = e.x() * (p - a).y() - e.y() * (p - a).x();
            if (cross < 0.0)
                inside = false;
            const double t = std::clamp((p - a).dot(e) / e.squaredNorm(), 0.0, 1.0);
            best = std::min(best, (a + t * e - p).norm());
        }
        return inside ? 0.0 : best;
    }

    // O(n^2) signed distance over cell centers.
    inline std::vector<double> bruteForceEsdf(const world::Scenario &sc, double res, double inflation, int w, int h)
    {
        std::vector<char> occ(static_cast<std::size_t>(w) * h, 0);
        auto center = [&](int i, int j)
        { return Eigen::Vector2d(sc.room.xmin + (i + 0.5) * res, sc.room.ymin + (j + 0.5) * res); };
        for (int j = 0; j < h; ++j)
            for (int i = 0; i < w; ++i)
                for (const auto &b : sc.obstacles)
                    if (rectDistanceOracle(center(i, j), world::footprintOf(b)) <= inflation)
                        occ[j * w + i] = 1;
        std::vector<double> out(occ.size());
        const double cap = std::hypot(double(w), double(h)) * res;
        for (int j = 0; j < h; ++j)
            for (int i = 0; i < w; ++i)
            {
                double d_other = kInf;
                for (int jj = 0; jj < h; ++jj)
                    for (int ii = 0; ii < w; ++ii)
                        if (occ[jj * w + ii] != occ[j * w + i])
                            d_other = std::min(d_other, (center(i, j) - center(ii, jj)).norm());
                if (d_other == kInf)
                    d_other = cap;
                out[j * w + i] = occ[j * w + i] ? -d_other : d_other;
            }
        return out;
    }

    // Random trajectory with rates of the order of the default limits
    // (about 1 m/s and 1 rad/s).
    inline traj::WholeBodyTrajectory randomFlatTrajectory(Rng &rng, int M, int dof = 0)
    {
        traj::WholeBodyTrajectory tr;
        tr.durations = randomVector(rng, M, 0.5, 1.5);
        const int D = 2 + dof;
        Eigen::MatrixXd head = Eigen::MatrixXd::Zero(D, 3), tail = Eigen::MatrixXd::Zero(D, 3);
        head.col(0) = randomVector(rng, D, -1.0, 1.0);
        head(0, 0) = 0.0;
        head.col(1) = randomVector(rng, D, -0.5, 0.5);
        Eigen::MatrixXd inner(D, M - 1);
        Eigen::VectorXd cur = head.col(0);
        for (int i = 0; i < M; ++i)
        {
            cur += tr.durations(i) * randomVector(rng, D, -1.0, 1.0);
            cur(0) = head(0, 0) + std::abs(cur(0) - head(0, 0));
            if (i < M - 1)
                inner.col(i) = cur;
        }
        tail.col(0) = cur;
        tr.coeffs = traj::solveCoefficients(head, tail, inner, tr.durations);
        tr.x0 = rng.uniform(-1.0, 1.0);
        tr.y0 = rng.uniform(-1.0, 1.0);
        return tr;
    }

    // Composite Simpson with `n` panels per segment, evaluated through eval().
    inline Eigen::Vector2d fineQuadrature(const traj::WholeBodyTrajectory &tr, double t, int n)
    {
        Eigen::Vector2d xy(tr.x0, tr.y0);
        double t0 = 0.0;
        for (int j = 0; j < tr.pieces() && t0 < t; ++j)
        {
            const double L = std::min(tr.durations(j), t - t0);
            auto f = [&](double tl)
            {
                const Eigen::VectorXd v = tr.evalLocal(j, tl, 1), p = tr.evalLocal(j, tl, 0);
                return Eigen::Vector2d(v(0) * std::cos(p(1)), v(0) * std::sin(p(1)));
            };
            const double h = L / n;
            for (int k = 0; k < n; ++k)
                xy += h / 6.0 * (f(k * h) + 4.0 * f((k + 0.5) * h) + f((k + 1) * h));
            t0 += tr.durations(j);
        }
        return xy;
    }

} // namespace wbp::test

#endif
