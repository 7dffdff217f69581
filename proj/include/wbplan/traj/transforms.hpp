#ifndef WBPLAN_TRAJ_TRANSFORMS_HPP
#define WBPLAN_TRAJ_TRANSFORMS_HPP

#include "wbplan/common.hpp"

#include <cmath>
#include <stdexcept>

namespace wbp::traj
{
    // C1 diffeomorphism R -> (0, inf) used for segment durations.
    inline double timeFromTau(double tau)
    {
        if (tau > 0.0)
            return ((0.5 * tau + 1.0) * tau + 1.0);
        const double den = (0.5 * tau - 1.0) * tau + 1.0;
        return 1.0 / den;
    }

    inline double timeFromTauDerivative(double tau)
    {
        if (tau > 0.0)
            return tau + 1.0;
        const double den = (0.5 * tau - 1.0) * tau + 1.0;
        return (1.0 - tau) / (den * den);
    }

    inline double tauFromTime(double T)
    {
        if (!(T > 0.0))
            throw std::domain_error("duration must be positive");
        return T > 1.0 ? std::sqrt(2.0 * T - 1.0) - 1.0 : 1.0 - std::sqrt(2.0 / T - 1.0);
    }

    // Maps an open joint interval (-q_max, q_max) onto R.
    inline double squashJoint(double q, double q_max)
    {
        if (!(std::abs(q) < q_max))
            throw std::domain_error("joint value outside the open limit interval");
        return tauFromTime((q_max + q) / (q_max - q));
    }

    inline double unsquashJoint(double u, double q_max)
    {
        const double r = timeFromTau(u);
        double q = q_max * (1.0 - 2.0 / (r + 1.0));
        if (q >= q_max)
            q = std::nextafter(q_max, 0.0);
        else if (q <= -q_max)
            q = -std::nextafter(q_max, 0.0);
        return q;
    }

    inline double unsquashJointDerivative(double u, double q_max)
    {
        const double r = timeFromTau(u);
        const double k = 1.0 / (r + 1.0);
        return q_max * 2.0 * k * k * timeFromTauDerivative(u);
    }

} // namespace wbp::traj

#endif
