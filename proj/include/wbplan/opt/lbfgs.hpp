#ifndef WBPLAN_OPT_LBFGS_HPP
#define WBPLAN_OPT_LBFGS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace wbp::opt
{
    struct LbfgsParams
    {
        // Number of correction pairs kept for the inverse Hessian estimate.
        int memory = 16;
        // Stop when ||g||_inf / max(1, ||x||_inf) < g_epsilon.
        double g_epsilon = 1e-6;
        // Stop when (f_past - f) / max(1, |f|) < delta over `past` iterations.
        int past = 3;
        double delta = 1e-9;
        int max_iterations = 1000;
        // Objective evaluations allowed, 0 = unlimited.
        int max_evaluations = 0;
        int max_linesearch = 64;
        // Armijo and weak-Wolfe curvature coefficients.
        double c1 = 1e-4;
        double c2 = 0.9;
        double min_step = 1e-20;
        double max_step = 1e20;
    };

    enum class LbfgsStatus
    {
        Converged,       // gradient tolerance met
        Stalled,         // relative decrease below delta
        MaxIterations,
        LineSearchFailed // best iterate returned
    };

    inline const char *toString(LbfgsStatus s)
    {
        switch (s)
        {
        case LbfgsStatus::Converged:
            return "converged";
        case LbfgsStatus::Stalled:
            return "stalled";
        case LbfgsStatus::MaxIterations:
            return "max_iterations";
        case LbfgsStatus::LineSearchFailed:
            return "line_search_failed";
        }
        return "unknown";
    }

    struct LbfgsResult
    {
        double value = 0.0;
        LbfgsStatus status = LbfgsStatus::MaxIterations;
        int iterations = 0;
        int evaluations = 0;
        double grad_norm_inf = 0.0;
    };

    // Objective: returns f(x) and writes the gradient into g.
    using Objective = std::function<double(const Eigen::VectorXd &x, Eigen::VectorXd &g)>;

    namespace detail
    {
        // Lewis-Overton bracketing line search for the weak Wolfe
        // conditions; tolerates kinks in piecewise-smooth objectives.
        inline bool weakWolfe(const Objective &f, Eigen::VectorXd &x, double &fx, Eigen::VectorXd &g, double &step,
                              const Eigen::VectorXd &d, const Eigen::VectorXd &xp, const Eigen::VectorXd &gp,
                              const LbfgsParams &prm, int &evals)
        {
            const double f0 = fx;
            const double dg0 = gp.dot(d);
            if (!(dg0 < 0.0))
                return false;
            double lo = 0.0, hi = prm.max_step;
            bool bracketed = false;
            for (int count = 0; count < prm.max_linesearch; ++count)
            {
                x = xp + step * d;
                fx = f(x, g);
                ++evals;
                if (!std::isfinite(fx))
                {
                    hi = step;
                    bracketed = true;
                }
                else if (fx > f0 + prm.c1 * step * dg0)
                {
                    hi = step;
                    bracketed = true;
                }
                else if (g.dot(d) < prm.c2 * dg0)
                {
                    lo = step;
                }
                else
                {
                    return true;
                }
                if (bracketed && (hi - lo) < std::numeric_limits<double>::epsilon() * hi)
                    return false;
                step = bracketed ? 0.5 * (lo + hi) : 2.0 * step;
                if (step < prm.min_step || step > prm.max_step)
                    return false;
            }
            return false;
        }
    } // namespace detail

    /// Limited-memory BFGS. Returns the best iterate found in x, also when the
    /// line search fails.
    inline LbfgsResult lbfgsMinimize(const Objective &f, Eigen::VectorXd &x, const LbfgsParams &prm = {})
    {
        const Eigen::Index n = x.size();
        const int m = std::max(1, prm.memory);
        LbfgsResult res;
        Eigen::VectorXd g(n);
        double fx = f(x, g);
        res.evaluations = 1;
        res.value = fx;
        res.grad_norm_inf = n ? g.cwiseAbs().maxCoeff() : 0.0;
        if (n == 0 || res.grad_norm_inf / std::max(1.0, x.cwiseAbs().maxCoeff()) < prm.g_epsilon)
        {
            res.status = LbfgsStatus::Converged;
            return res;
        }

        Eigen::MatrixXd S(n, m), Y(n, m);
        Eigen::VectorXd rho(m), alpha(m);
        std::vector<double> hist(std::max(1, prm.past), fx);
        Eigen::VectorXd d = -g, xp(n), gp(n);
        double step = 1.0 / std::max(1e-12, d.norm());
        int head = 0, count = 0;

        for (int k = 1; k <= prm.max_iterations; ++k)
        {
            xp = x;
            gp = g;
            const double fprev = fx;
            if (!detail::weakWolfe(f, x, fx, g, step, d, xp, gp, prm, res.evaluations))
            {
                if (!(std::isfinite(fx) && fx <= fprev))
                {
                    x = xp;
                    g = gp;
                    fx = fprev;
                }
                res.status = LbfgsStatus::LineSearchFailed;
                res.iterations = k;
                break;
            }
            res.iterations = k;

            const double gn = g.cwiseAbs().maxCoeff();
            if (gn / std::max(1.0, x.cwiseAbs().maxCoeff()) < prm.g_epsilon)
            {
                res.status = LbfgsStatus::Converged;
                break;
            }
            if (prm.past > 0)
            {
                const int idx = k % prm.past;
                if (k >= prm.past && (hist[idx] - fx) / std::max(1.0, std::abs(fx)) < prm.delta)
                {
                    res.status = LbfgsStatus::Stalled;
                    break;
                }
                hist[idx] = fx;
            }

            // update correction pairs; skip if curvature is not positive
            const Eigen::VectorXd s = x - xp, y = g - gp;
            const double ys = y.dot(s);
            if (ys > 1e-16 * std::max(1.0, y.squaredNorm()))
            {
                S.col(head) = s;
                Y.col(head) = y;
                rho(head) = 1.0 / ys;
                head = (head + 1) % m;
                count = std::min(count + 1, m);
            }

            // two-loop recursion
            d = -g;
            int j = head;
            for (int i = 0; i < count; ++i)
            {
                j = (j + m - 1) % m;
                alpha(j) = rho(j) * S.col(j).dot(d);
                d -= alpha(j) * Y.col(j);
            }
            if (count > 0)
            {
                const int last = (head + m - 1) % m;
                d *= 1.0 / (rho(last) * Y.col(last).squaredNorm());
            }
            for (int i = 0; i < count; ++i)
            {
                const double beta = rho(j) * Y.col(j).dot(d);
                d += S.col(j) * (alpha(j) - beta);
                j = (j + 1) % m;
            }
            if (!(d.dot(g) < 0.0))
            {
                d = -g;
                count = 0;
                step = 1.0 / std::max(1e-12, d.norm());
            }
            else
            {
                step = 1.0;
            }
            if (k == prm.max_iterations ||
                (prm.max_evaluations > 0 && res.evaluations >= prm.max_evaluations))
            {
                res.status = LbfgsStatus::MaxIterations;
                break;
            }
        }
        res.value = fx;
        res.grad_norm_inf = g.cwiseAbs().maxCoeff();
        return res;
    }

} // namespace wbp::opt

#endif
