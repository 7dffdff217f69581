#ifndef WBPLAN_OPT_ALM_HPP
#define WBPLAN_OPT_ALM_HPP

#include "wbplan/opt/config.hpp"
#include "wbplan/opt/lbfgs.hpp"
#include "wbplan/opt/problem.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <functional>
#include <limits>

namespace wbp::opt
{
    // Equality-constrained problem seen by the outer loop.
    struct AlmFunctions
    {
        // f(x) + lambda^T r(x) + sigma / 2 |r(x)|^2 and its gradient
        std::function<double(const Eigen::VectorXd &x, const Eigen::VectorXd &lambda, double sigma,
                             Eigen::VectorXd &g)>
            augmented;
        std::function<Eigen::VectorXd(const Eigen::VectorXd &x)> residual;
        // Optional, only used for diagnostics.
        std::function<double(const Eigen::VectorXd &x)> penalty;
        int n_eq = 0;
    };

    enum class AlmStatus
    {
        Converged,
        MaxOuterIterations,
        BudgetExhausted,
        NonFinite
    };

    inline const char *toString(AlmStatus s)
    {
        switch (s)
        {
        case AlmStatus::Converged:
            return "converged";
        case AlmStatus::MaxOuterIterations:
            return "max_outer_iterations";
        case AlmStatus::BudgetExhausted:
            return "budget_exhausted";
        case AlmStatus::NonFinite:
            return "non_finite";
        }
        return "unknown";
    }

    struct AlmIteration
    {
        int outer = 0;
        double value = 0.0;
        double residual_inf = 0.0;
        double penalty = 0.0;
        double sigma = 0.0;
        int inner_iterations = 0;
        LbfgsStatus inner_status = LbfgsStatus::Converged;
    };

    struct AlmResult
    {
        AlmStatus status = AlmStatus::MaxOuterIterations;
        Eigen::VectorXd lambda;
        double sigma = 0.0;
        double residual_inf = kInf;
        int outer_iterations = 0;
        int inner_iterations = 0;
        int evaluations = 0;
        LbfgsStatus last_inner = LbfgsStatus::Converged;
    };

    using AlmCallback = std::function<void(const AlmIteration &)>;

    /// PHR augmented Lagrangian: lambda <- lambda + sigma r after each inner
    /// L-BFGS solve, sigma *= gamma whenever |r|_inf did not halve.
    inline AlmResult almSolve(const AlmFunctions &fn, Eigen::VectorXd &x, const AlmParams &prm,
                              const AlmCallback &cb = {})
    {
        AlmResult res;
        res.lambda = Eigen::VectorXd::Constant(fn.n_eq, prm.lambda0);
        res.sigma = prm.sigma0;
        double prev = kInf;
        for (int k = 1; k <= prm.max_outer; ++k)
        {
            const Eigen::VectorXd lam = res.lambda;
            const double sig = res.sigma;
            const Objective obj = [&](const Eigen::VectorXd &z, Eigen::VectorXd &g)
            { return fn.augmented(z, lam, sig, g); };
            LbfgsParams ip = prm.inner;
            if (prm.max_evaluations > 0)
            {
                const int left = prm.max_evaluations - res.evaluations;
                if (left <= 0)
                {
                    res.status = AlmStatus::BudgetExhausted;
                    return res;
                }
                ip.max_evaluations = ip.max_evaluations > 0 ? std::min(ip.max_evaluations, left) : left;
            }
            const auto inner = lbfgsMinimize(obj, x, ip);
            const Eigen::VectorXd r = fn.residual(x);
            const double rn = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
            res.outer_iterations = k;
            res.inner_iterations += inner.iterations;
            res.evaluations += inner.evaluations;
            res.last_inner = inner.status;
            res.residual_inf = rn;
            if (cb)
                cb({k, inner.value, rn, fn.penalty ? fn.penalty(x) : 0.0, sig, inner.iterations, inner.status});
            if (!std::isfinite(inner.value) || !x.allFinite() || !std::isfinite(rn))
            {
                res.status = AlmStatus::NonFinite;
                return res;
            }
            // A failed line search at a point satisfying the constraint
            // is accepted: the hinge kinks make exact stationarity rare.
            if (rn < prm.eps_eq)
            {
                res.status = AlmStatus::Converged;
                return res;
            }
            res.lambda += sig * r;
            if (rn > 0.5 * prev)
                res.sigma = std::min(res.sigma * prm.gamma, prm.sigma_max);
            prev = rn;
        }
        res.status = AlmStatus::MaxOuterIterations;
        return res;
    }

    inline AlmFunctions almFunctions(const TrajectoryProblem &p)
    {
        AlmFunctions fn;
        fn.n_eq = 9;
        fn.augmented = [&p](const Eigen::VectorXd &x, const Eigen::VectorXd &lambda, double sigma, Eigen::VectorXd &g)
        { return p.evaluate(x, lambda, sigma, g); };
        fn.residual = [&p](const Eigen::VectorXd &x) -> Eigen::VectorXd { return p.residual(x); };
        fn.penalty = [&p](const Eigen::VectorXd &x)
        {
            TrajectoryProblem::Breakdown b;
            Eigen::VectorXd g;
            p.evaluate(x, Eigen::VectorXd::Zero(9), 0.0, g, &b, false);
            return b.penalty;
        };
        return fn;
    }

    // JSON-lines diagnostics record.
    inline nlohmann::json toJson(const AlmIteration &it)
    {
        return {{"outer", it.outer},
                {"value", it.value},
                {"residual_inf", it.residual_inf},
                {"penalty", it.penalty},
                {"sigma", it.sigma},
                {"inner_iterations", it.inner_iterations},
                {"inner_status", toString(it.inner_status)}};
    }

} // namespace wbp::opt

#endif
