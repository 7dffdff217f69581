#ifndef WBPLAN_PIPELINE_VALIDATE_HPP
#define WBPLAN_PIPELINE_VALIDATE_HPP

#include "wbplan/robot/kinematics.hpp"
#include "wbplan/traj/trajectory.hpp"
#include "wbplan/world/world.hpp"

#include <json.hpp>

#include <array>
#include <string>

namespace wbp::pipeline
{
    enum Family
    {
        kVelocity,
        kBaseAcceleration,
        kJointPositionVelocity,
        kJointAcceleration,
        kEnvironmentCollision,
        kSelfCollision,
        kFamilyCount
    };

    inline const char *familyName(int f)
    {
        static const char *names[kFamilyCount] = {"velocity",           "base_acceleration",
                                                  "joint_position_velocity", "joint_acceleration",
                                                  "environment_collision",   "self_collision"};
        return names[f];
    }

    struct ValidationReport
    {
        // Largest violation per family (0 when satisfied). Kinematic families
        // are relative to their limit, collision families are in meters.
        std::array<double, kFamilyCount> max_violation{};
        std::array<double, kFamilyCount> worst_time{};
        double tol = 1e-3;
        int samples = 0;
        bool pass = false;
        // Base pose and joints at the end of the trajectory.
        SE2 end_base;
        Eigen::VectorXd end_q;
    };

    namespace detail
    {
        // Value and first three derivatives of one quintic (Horner form).
        inline std::array<double, 4> quintic(const double *c, int stride, double t)
        {
            std::array<double, 4> d{};
            for (int k = 5; k >= 0; --k)
            {
                d[3] = d[3] * t + d[2];
                d[2] = d[2] * t + d[1];
                d[1] = d[1] * t + d[0];
                d[0] = d[0] * t + c[k * stride];
            }
            // d[i] now holds f^(i) / i!
            d[2] *= 2.0;
            d[3] *= 6.0;
            return d;
        }

        // Five-point Gauss-Legendre nodes and weights on [-1, 1].
        constexpr std::array<double, 5> kGlX = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                                0.9061798459386640};
        constexpr std::array<double, 5> kGlW = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                                0.2369268850561891, 0.2369268850561891};
    } // namespace detail

    /// Independent dense check of a trajectory: `per_segment` uniform samples
    /// per segment plus the end point, base position by Gauss-Legendre
    /// integration between samples, and every constraint evaluated directly
    /// against the unscaled limits.
    inline ValidationReport validateTrajectory(const traj::WholeBodyTrajectory &tr, const world::World &w,
                                               const robot::RobotModel &m, double tol, int per_segment)
    {
        ValidationReport rep;
        rep.tol = tol;
        const int M = tr.pieces(), D = tr.channels(), n = D - 2;
        const auto &L = m.limits;
        const int stride = static_cast<int>(tr.coeffs.outerStride());
        Eigen::Vector2d xy(tr.x0, tr.y0);
        double t0 = 0.0;
        auto note = [&](int fam, double viol, double t)
        {
            if (viol > rep.max_violation[fam])
            {
                rep.max_violation[fam] = viol;
                rep.worst_time[fam] = t;
            }
        };
        auto coeff = [&](int seg, int ch) { return tr.coeffs.data() + ch * stride + 6 * seg; };
        for (int j = 0; j < M; ++j)
        {
            const double Tj = tr.durations(j);
            for (int l = 0; l <= per_segment; ++l)
            {
                const double t = Tj * l / per_segment;
                if (l > 0)
                {
                    // integrate (s' cos theta, s' sin theta) over the previous sub-interval
                    const double a = Tj * (l - 1) / per_segment, h = 0.5 * (t - a);
                    for (int g = 0; g < 5; ++g)
                    {
                        const double tg = a + h * (1.0 + detail::kGlX[g]);
                        const auto s = detail::quintic(coeff(j, traj::kChS), 1, tg);
                        const auto th = detail::quintic(coeff(j, traj::kChTheta), 1, tg);
                        xy += h * detail::kGlW[g] * s[1] * Eigen::Vector2d(std::cos(th[0]), std::sin(th[0]));
                    }
                }
                // segment ends are sampled once, as the start of the next segment
                if (l == per_segment && j < M - 1)
                    break;
                const double tg = t0 + t;
                ++rep.samples;
                const auto s = detail::quintic(coeff(j, traj::kChS), 1, t);
                const auto th = detail::quintic(coeff(j, traj::kChTheta), 1, t);
                const double v = s[1], om = th[1];
                note(kVelocity,
                     std::max(std::abs(om / L.omega_max + v / L.v_max), std::abs(om / L.omega_max - v / L.v_max)) -
                         1.0,
                     tg);
                note(kBaseAcceleration, std::max(std::abs(s[2]) / L.a_max, std::abs(th[2]) / L.beta_max) - 1.0, tg);
                Eigen::VectorXd q(n);
                for (int k = 0; k < n; ++k)
                {
                    const auto d = detail::quintic(coeff(j, traj::kChQ0 + k), 1, t);
                    q(k) = d[0];
                    note(kJointPositionVelocity,
                         std::max(std::abs(d[0]) / L.q_max(k), std::abs(d[1]) / L.dq_max(k)) - 1.0, tg);
                    note(kJointAcceleration, std::abs(d[2]) / L.ddq_max(k) - 1.0, tg);
                }
                const SE2 base{xy.x(), xy.y(), th[0]};
                const auto e = w.esdf.query(xy);
                note(kEnvironmentCollision, e.out_of_bounds ? kInf : m.collision.base_clearance - e.distance, tg);
                const auto pts = robot::collisionPoints(m, base, q);
                for (std::size_t k = 1; k < pts.size(); ++k)
                {
                    note(kEnvironmentCollision, pts[k].radius - w.sdf.query(pts[k].center).distance, tg);
                    note(kEnvironmentCollision, pts[k].radius - pts[k].center.z(), tg);
                }
                const Eigen::VectorXd d = robot::selfCollisionDistances(m, q);
                if (d.size())
                    note(kSelfCollision, -d.minCoeff(), tg);
                if (j == M - 1 && l == per_segment)
                {
                    rep.end_base = base;
                    rep.end_q = q;
                }
            }
            t0 += Tj;
        }
        rep.pass = true;
        for (double v : rep.max_violation)
            rep.pass = rep.pass && v < tol;
        return rep;
    }

    inline nlohmann::json toJson(const ValidationReport &r)
    {
        nlohmann::json fam = nlohmann::json::object();
        for (int f = 0; f < kFamilyCount; ++f)
            fam[familyName(f)] = {{"max_violation", r.max_violation[f]},
                                  {"worst_time", r.worst_time[f]},
                                  {"pass", r.max_violation[f] < r.tol}};
        return {{"pass", r.pass}, {"tol", r.tol}, {"samples", r.samples}, {"families", fam}};
    }

} // namespace wbp::pipeline

#endif
