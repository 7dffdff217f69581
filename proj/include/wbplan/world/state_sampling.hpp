#ifndef WBPLAN_WORLD_STATE_SAMPLING_HPP
#define WBPLAN_WORLD_STATE_SAMPLING_HPP

#include "wbplan/robot/kinematics.hpp"
#include "wbplan/world/world.hpp"

#include <algorithm>
#include <optional>

namespace wbp::world
{
    // Smallest margin of each clearance family for one whole-body state.
    // Negative means violated.
    struct StateClearance
    {
        double base = kInf;
        double arm = kInf;
        double self = kInf;
        double floor = kInf;

        double min() const { return std::min({base, arm, self, floor}); }
    };

    inline StateClearance stateClearance(const World &w, const robot::RobotModel &m,
                                         const robot::WholeBodyState &s)
    {
        StateClearance c;
        const auto pts = robot::collisionPoints(m, s.base, s.q);
        const auto e = w.esdf.query(Eigen::Vector2d(s.base.x, s.base.y));
        c.base = e.out_of_bounds ? -1.0 : e.distance - m.collision.base_clearance;
        for (std::size_t k = 1; k < pts.size(); ++k)
        {
            c.arm = std::min(c.arm, w.sdf.query(pts[k].center).distance - pts[k].radius);
            c.floor = std::min(c.floor, pts[k].center.z() - pts[k].radius);
        }
        const Eigen::VectorXd d = robot::selfCollisionDistances(m, s.q);
        if (d.size() > 0)
            c.self = d.minCoeff();
        return c;
    }

    inline bool isStateFree(const World &w, const robot::RobotModel &m, const robot::WholeBodyState &s,
                            double margin)
    {
        const auto c = stateClearance(w, m, s);
        return c.base >= margin && c.arm >= margin && c.self >= margin && c.floor >= 0.0;
    }

    struct FreeStateParams
    {
        double margin = 0.05;
        int max_attempts = 20000;
        // Fraction of the joint range used for uniform joint sampling.
        double joint_range = 1.0;
    };

    /// Uniform rejection sampling of a collision-free whole-body state:
    /// base position over the room, heading over [-pi, pi), joints within
    /// limits. std::nullopt signals sampling exhaustion.
    inline std::optional<robot::WholeBodyState> sampleFreeState(const World &w, const robot::RobotModel &m, Rng &rng,
                                                                const FreeStateParams &prm = {})
    {
        const auto &room = w.scenario.room;
        for (int attempt = 0; attempt < prm.max_attempts; ++attempt)
        {
            robot::WholeBodyState s;
            s.base.x = rng.uniform(room.xmin, room.xmax);
            s.base.y = rng.uniform(room.ymin, room.ymax);
            s.base.theta = rng.uniform(-kPi, kPi);
            s.q.resize(m.dof());
            for (int k = 0; k < m.dof(); ++k)
            {
                const double lim = prm.joint_range * m.limits.q_max(k);
                s.q(k) = rng.uniform(-lim, lim);
            }
            if (w.esdf.query(Eigen::Vector2d(s.base.x, s.base.y)).distance < m.collision.base_clearance + prm.margin)
                continue;
            if (isStateFree(w, m, s, prm.margin))
                return s;
        }
        return std::nullopt;
    }

} // namespace wbp::world

#endif
