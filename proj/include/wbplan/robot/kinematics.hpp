#ifndef WBPLAN_ROBOT_KINEMATICS_HPP
#define WBPLAN_ROBOT_KINEMATICS_HPP

#include "wbplan/robot/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <vector>

namespace wbp::robot
{
    struct WholeBodyState
    {
        SE2 base;
        Eigen::VectorXd q;
    };

    // World frames of the serial chain for one whole-body configuration.
    // Jacobian columns are ordered (x, y, theta, q_1 ... q_N).
    class ChainFrames
    {
    public:
        ChainFrames(const RobotModel &m, const SE2 &base, const Eigen::VectorXd &q)
        {
            const int n = m.dof();
            R_.resize(n + 1);
            p_.resize(n + 1);
            axis_.resize(n + 1);
            origin_.resize(n + 1);
            base_p_ = Eigen::Vector3d(base.x, base.y, 0.0);
            Rb_ = rotZ(base.theta);
            const Eigen::Matrix3d &Rb = Rb_;
            R_[0] = Rb * rpyToMatrix(m.mount.rpy);
            p_[0] = base_p_ + Rb * m.mount.xyz;
            for (int k = 1; k <= n; ++k)
            {
                const Joint &jt = m.joints[k - 1];
                const Eigen::Matrix3d Rpre = R_[k - 1] * rpyToMatrix(jt.origin_rpy);
                origin_[k] = p_[k - 1] + R_[k - 1] * jt.origin_xyz;
                axis_[k] = Rpre * jt.axis;
                R_[k] = Rpre * Eigen::AngleAxisd(q(k - 1), jt.axis).toRotationMatrix();
                p_[k] = origin_[k];
            }
            ee_.R = R_[n] * rpyToMatrix(m.ee_offset.rpy);
            ee_.p = p_[n] + R_[n] * m.ee_offset.xyz;
            n_ = n;
        }

        int dof() const { return n_; }
        // Maps base-frame points to the world.
        Eigen::Vector3d baseFrame(const Eigen::Vector3d &local) const { return base_p_ + Rb_ * local; }
        const Eigen::Matrix3d &linkRotation(int link) const { return R_[link]; }
        const Eigen::Vector3d &linkPosition(int link) const { return p_[link]; }
        const SE3Pose &endEffector() const { return ee_; }

        Eigen::Vector3d pointOnLink(int link, const Eigen::Vector3d &offset) const
        {
            return p_[link] + R_[link] * offset;
        }

        // d(world point rigidly attached to `link`) / d(x, y, theta, q).
        Eigen::Matrix<double, 3, Eigen::Dynamic> pointJacobian(int link, const Eigen::Vector3d &world) const
        {
            Eigen::Matrix<double, 3, Eigen::Dynamic> J = Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, 3 + n_);
            J(0, 0) = 1.0;
            J(1, 1) = 1.0;
            const Eigen::Vector3d r = world - base_p_;
            J.col(2) = Eigen::Vector3d(-r.y(), r.x(), 0.0);
            for (int k = 1; k <= link; ++k)
                J.col(2 + k) = axis_[k].cross(world - origin_[k]);
            return J;
        }

        /// row += g^T * pointJacobian(link, world) without forming the Jacobian.
        template <class Row>
        void addPointGradient(int link, const Eigen::Vector3d &world, const Eigen::Vector3d &g, Row &&row) const
        {
            row(0) += g.x();
            row(1) += g.y();
            row(2) += g.y() * (world.x() - base_p_.x()) - g.x() * (world.y() - base_p_.y());
            for (int k = 1; k <= link; ++k)
                row(2 + k) += g.dot(axis_[k].cross(world - origin_[k]));
        }

        // Angular velocity columns of the frame of `link` w.r.t. (x, y, theta, q).
        Eigen::Matrix<double, 3, Eigen::Dynamic> angularJacobian(int link) const
        {
            Eigen::Matrix<double, 3, Eigen::Dynamic> J = Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, 3 + n_);
            J.col(2) = Eigen::Vector3d::UnitZ();
            for (int k = 1; k <= link; ++k)
                J.col(2 + k) = axis_[k];
            return J;
        }

    private:
        int n_ = 0;
        std::vector<Eigen::Matrix3d> R_;
        std::vector<Eigen::Vector3d> p_;
        std::vector<Eigen::Vector3d> axis_;
        std::vector<Eigen::Vector3d> origin_;
        Eigen::Vector3d base_p_;
        Eigen::Matrix3d Rb_;
        SE3Pose ee_;
    };

    inline SE3Pose forwardKinematics(const RobotModel &m, const SE2 &base, const Eigen::VectorXd &q)
    {
        return ChainFrames(m, base, q).endEffector();
    }

    struct CollisionPoint
    {
        Eigen::Vector3d center;
        double radius;
    };

    /// Base cylinder center followed by every arm sphere, in world frame.
    inline std::vector<CollisionPoint> collisionPoints(const RobotModel &m, const SE2 &base, const Eigen::VectorXd &q)
    {
        const ChainFrames f(m, base, q);
        std::vector<CollisionPoint> out;
        out.reserve(m.collision.spheres.size() + 1);
        out.push_back({Eigen::Vector3d(base.x, base.y, 0.0) + rotZ(base.theta) * m.collision.base.center,
                       m.collision.base.radius});
        for (const auto &s : m.collision.spheres)
            out.push_back({f.pointOnLink(s.link, s.offset), s.radius});
        return out;
    }

    namespace detail
    {
        // Closest point on the vertical segment [a, b] (a.z < b.z) to p.
        inline Eigen::Vector3d closestOnVertical(const Eigen::Vector3d &a, double len, const Eigen::Vector3d &p)
        {
            const double t = std::clamp(p.z() - a.z(), 0.0, len);
            return Eigen::Vector3d(a.x(), a.y(), a.z() + t);
        }
    } // namespace detail

    /// Pairwise clearances of the configured self pairs, positive when clear.
    /// When jac is non-null it receives d(clearance)/dq, one row per pair;
    /// rows of pairs with clearance >= jac_below are left zero.
    /// Clearances are invariant to the base pose, so any frames of the
    /// configuration can be reused.
    inline Eigen::VectorXd selfCollisionDistances(const RobotModel &m, const ChainFrames &f,
                                                  Eigen::MatrixXd *jac = nullptr, double jac_below = kInf)
    {
        const auto &C = m.collision;
        const int n = m.dof();
        const int npairs = static_cast<int>(C.self_pairs.size());
        Eigen::VectorXd d(npairs);
        if (jac)
            jac->setZero(npairs, n);

        const Eigen::Vector3d cyl_lo = f.baseFrame(C.base.center) - Eigen::Vector3d(0.0, 0.0, 0.5 * C.base.height);
        auto center = [&](int idx) -> Eigen::Vector3d
        {
            const Sphere &s = C.spheres[idx - 1];
            return f.pointOnLink(s.link, s.offset);
        };

        Eigen::RowVectorXd g(3 + n);
        for (int k = 0; k < npairs; ++k)
        {
            auto [a, b] = C.self_pairs[k];
            if (b == 0)
                std::swap(a, b);
            const Sphere &sb = C.spheres[b - 1];
            const Eigen::Vector3d pb = center(b);
            Eigen::Vector3d diff, pa;
            double ra;
            if (a == 0)
            {
                pa = detail::closestOnVertical(cyl_lo, C.base.height, pb);
                ra = C.base.radius;
            }
            else
            {
                pa = center(a);
                ra = C.spheres[a - 1].radius;
            }
            diff = pb - pa;
            const double dist = diff.norm();
            d(k) = dist - ra - sb.radius;
            if (!jac || dist <= 1e-12 || !(d(k) < jac_below))
                continue;
            const Eigen::Vector3d u = diff / dist;
            g.setZero();
            f.addPointGradient(sb.link, pb, u, g);
            if (a == 0)
            {
                // moving b along z inside the segment range moves the closest point with it
                const double t = pb.z() - cyl_lo.z();
                if (t > 0.0 && t < C.base.height)
                    f.addPointGradient(sb.link, pb, Eigen::Vector3d(0.0, 0.0, -u.z()), g);
            }
            else
                f.addPointGradient(C.spheres[a - 1].link, pa, -u, g);
            jac->row(k) = g.tail(n);
        }
        return d;
    }

    inline Eigen::VectorXd selfCollisionDistances(const RobotModel &m, const Eigen::VectorXd &q,
                                                  Eigen::MatrixXd *jac = nullptr)
    {
        return selfCollisionDistances(m, ChainFrames(m, SE2{}, q), jac);
    }

} // namespace wbp::robot

#endif
