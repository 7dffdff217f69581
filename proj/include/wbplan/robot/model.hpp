#ifndef WBPLAN_ROBOT_MODEL_HPP
#define WBPLAN_ROBOT_MODEL_HPP

#include "wbplan/common.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace wbp::robot
{
    struct Joint
    {
        Eigen::Vector3d origin_xyz = Eigen::Vector3d::Zero();
        Eigen::Vector3d origin_rpy = Eigen::Vector3d::Zero();
        Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
    };

    struct FixedTransform
    {
        Eigen::Vector3d xyz = Eigen::Vector3d::Zero();
        Eigen::Vector3d rpy = Eigen::Vector3d::Zero();
    };

    struct DynamicLimits
    {
        double v_max = 1.0;
        double omega_max = 1.0;
        double a_max = 1.0;
        double beta_max = 1.5;
        Eigen::VectorXd q_max;
        Eigen::VectorXd dq_max;
        Eigen::VectorXd ddq_max;
    };

    struct BaseCylinder
    {
        double radius = 0.3;
        double height = 0.4;
        Eigen::Vector3d center = Eigen::Vector3d(0.0, 0.0, 0.2);
    };

    // Sphere rigidly attached to a link. Link 0 is the arm mount, link k the
    // frame after joint k.
    struct Sphere
    {
        int link = 0;
        Eigen::Vector3d offset = Eigen::Vector3d::Zero();
        double radius = 0.05;
    };

    struct CollisionModel
    {
        BaseCylinder base;
        // Required ESDF clearance of the base center; the ESDF itself is
        // inflated by the cylinder radius.
        double base_clearance = 0.05;
        std::vector<Sphere> spheres;
        // Pairs of collision-point indices; index 0 is the base cylinder,
        // index k >= 1 is spheres[k - 1].
        std::vector<std::pair<int, int>> self_pairs;

        int pointCount() const { return 1 + static_cast<int>(spheres.size()); }

        // Threshold per collision point: base clearance, then sphere radii.
        Eigen::VectorXd rThr() const
        {
            Eigen::VectorXd r(pointCount());
            r(0) = base_clearance;
            for (std::size_t k = 0; k < spheres.size(); ++k)
                r(static_cast<Eigen::Index>(k) + 1) = spheres[k].radius;
            return r;
        }
    };

    struct RobotModel
    {
        std::vector<Joint> joints;
        FixedTransform mount;
        FixedTransform ee_offset;
        DynamicLimits limits;
        CollisionModel collision;
        // Joint configuration used as a compact transport pose.
        Eigen::VectorXd travel_q;

        int dof() const { return static_cast<int>(joints.size()); }

        void validate() const
        {
            const int n = dof();
            if (n < 1)
                throw InputError("robot needs at least one joint");
            const auto &L = limits;
            if (L.q_max.size() != n || L.dq_max.size() != n || L.ddq_max.size() != n)
                throw InputError("robot limits must have one entry per joint");
            if (!(L.v_max > 0 && L.omega_max > 0 && L.a_max > 0 && L.beta_max > 0) ||
                (L.q_max.array() <= 0).any() || (L.dq_max.array() <= 0).any() || (L.ddq_max.array() <= 0).any())
                throw InputError("robot limits must be strictly positive");
            if (!(collision.base.radius > 0 && collision.base.height > 0))
                throw InputError("base cylinder dimensions must be positive");
            for (const auto &s : collision.spheres)
            {
                if (!(s.radius > 0))
                    throw InputError("sphere radius must be positive");
                if (s.link < 0 || s.link > n)
                    throw InputError("sphere link index out of range");
            }
            for (const auto &[a, b] : collision.self_pairs)
                if (a < 0 || b < 0 || a >= collision.pointCount() || b >= collision.pointCount() || a == b)
                    throw InputError("self collision pair index out of range");
            for (const auto &j : joints)
                if (j.axis.norm() < 1e-12)
                    throw InputError("joint axis must be nonzero");
            if (travel_q.size() != n || (travel_q.cwiseAbs().array() >= L.q_max.array()).any())
                throw InputError("travel_q must be strictly inside the joint limits");
        }
    };

    /// Mobile base with a 6-joint arm mounted on the cylinder top, centered
    /// on the base yaw axis. Upright at q = 0.
    inline RobotModel defaultRobot()
    {
        RobotModel m;
        const Eigen::Vector3d Z = Eigen::Vector3d::UnitZ(), Y = Eigen::Vector3d::UnitY();
        auto joint = [](double z, Eigen::Vector3d axis)
        {
            Joint j;
            j.origin_xyz = Eigen::Vector3d(0.0, 0.0, z);
            j.axis = axis;
            return j;
        };
        m.joints = {joint(0.10, Z), joint(0.10, Y), joint(0.40, Y), joint(0.30, Z), joint(0.10, Y), joint(0.08, Z)};
        m.mount.xyz = Eigen::Vector3d(0.0, 0.0, 0.40);
        m.ee_offset.xyz = Eigen::Vector3d(0.0, 0.0, 0.10);

        auto &L = m.limits;
        L.v_max = 1.0;
        L.omega_max = 1.0;
        L.a_max = 1.0;
        L.beta_max = 1.5;
        L.q_max.resize(6);
        L.q_max << 3.0, 2.0, 2.4, 3.0, 2.0, 3.0;
        L.dq_max = Eigen::VectorXd::Constant(6, 1.2);
        L.ddq_max = Eigen::VectorXd::Constant(6, 2.5);

        auto &C = m.collision;
        C.base = BaseCylinder{0.3, 0.4, Eigen::Vector3d(0.0, 0.0, 0.2)};
        C.base_clearance = 0.05;
        C.spheres = {
            {1, Eigen::Vector3d(0.0, 0.0, 0.02), 0.08},  // 1 shoulder
            {2, Eigen::Vector3d(0.0, 0.0, 0.12), 0.07},  // 2 upper arm
            {2, Eigen::Vector3d(0.0, 0.0, 0.30), 0.07},  // 3 upper arm
            {3, Eigen::Vector3d(0.0, 0.0, 0.08), 0.06},  // 4 forearm
            {3, Eigen::Vector3d(0.0, 0.0, 0.24), 0.06},  // 5 forearm
            {5, Eigen::Vector3d(0.0, 0.0, 0.02), 0.055}, // 6 wrist
            {6, Eigen::Vector3d(0.0, 0.0, 0.10), 0.05},  // 7 gripper
        };
        // base vs forearm/wrist/gripper; shoulder and upper arm vs wrist/gripper
        C.self_pairs = {{0, 4}, {0, 5}, {0, 6}, {0, 7}, {1, 5}, {1, 6}, {1, 7}, {2, 6}, {2, 7}};
        m.travel_q = Eigen::VectorXd::Zero(6);
        return m;
    }

    // ---------------------------------------------------------------- JSON

    namespace detail
    {
        inline Eigen::Vector3d vec3(const nlohmann::json &j, const char *what)
        {
            const auto v = j.get<std::vector<double>>();
            if (v.size() != 3)
                throw InputError(std::string(what) + " must have 3 entries");
            return Eigen::Vector3d(v[0], v[1], v[2]);
        }

        inline Eigen::VectorXd vecN(const nlohmann::json &j)
        {
            const auto v = j.get<std::vector<double>>();
            return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
        }

        inline std::vector<double> toStd(const Eigen::VectorXd &v) { return {v.data(), v.data() + v.size()}; }
        inline std::vector<double> toStd(const Eigen::Vector3d &v) { return {v.x(), v.y(), v.z()}; }

        inline nlohmann::json fixedToJson(const FixedTransform &f)
        {
            return {{"xyz", toStd(f.xyz)}, {"rpy", toStd(f.rpy)}};
        }

        inline FixedTransform fixedFromJson(const nlohmann::json &j)
        {
            FixedTransform f;
            if (j.contains("xyz"))
                f.xyz = vec3(j.at("xyz"), "xyz");
            if (j.contains("rpy"))
                f.rpy = vec3(j.at("rpy"), "rpy");
            return f;
        }
    } // namespace detail

    inline nlohmann::json robotToJson(const RobotModel &m)
    {
        using detail::toStd;
        nlohmann::json joints = nlohmann::json::array();
        for (const auto &j : m.joints)
            joints.push_back({{"axis", toStd(j.axis)}, {"origin_xyz", toStd(j.origin_xyz)},
                              {"origin_rpy", toStd(j.origin_rpy)}});
        nlohmann::json spheres = nlohmann::json::array();
        for (const auto &s : m.collision.spheres)
            spheres.push_back({{"link", s.link}, {"offset", toStd(s.offset)}, {"radius", s.radius}});
        nlohmann::json pairs = nlohmann::json::array();
        for (const auto &[a, b] : m.collision.self_pairs)
            pairs.push_back({a, b});
        const auto &L = m.limits;
        return {{"joints", joints},
                {"mount", detail::fixedToJson(m.mount)},
                {"ee_offset", detail::fixedToJson(m.ee_offset)},
                {"limits",
                 {{"v_max", L.v_max},
                  {"omega_max", L.omega_max},
                  {"a_max", L.a_max},
                  {"beta_max", L.beta_max},
                  {"q_max", toStd(L.q_max)},
                  {"dq_max", toStd(L.dq_max)},
                  {"ddq_max", toStd(L.ddq_max)}}},
                {"collision",
                 {{"cylinder",
                   {{"radius", m.collision.base.radius},
                    {"height", m.collision.base.height},
                    {"center", toStd(m.collision.base.center)}}},
                  {"base_clearance", m.collision.base_clearance},
                  {"spheres", spheres},
                  {"self_pairs", pairs}}},
                {"travel_q", toStd(m.travel_q)}};
    }

    inline RobotModel robotFromJson(const nlohmann::json &j)
    {
        RobotModel m;
        try
        {
            for (const auto &jj : j.at("joints"))
            {
                Joint jt;
                jt.axis = detail::vec3(jj.at("axis"), "joint axis").normalized();
                if (jj.contains("origin_xyz"))
                    jt.origin_xyz = detail::vec3(jj.at("origin_xyz"), "origin_xyz");
                if (jj.contains("origin_rpy"))
                    jt.origin_rpy = detail::vec3(jj.at("origin_rpy"), "origin_rpy");
                m.joints.push_back(jt);
            }
            if (j.contains("mount"))
                m.mount = detail::fixedFromJson(j.at("mount"));
            if (j.contains("ee_offset"))
                m.ee_offset = detail::fixedFromJson(j.at("ee_offset"));
            const auto &L = j.at("limits");
            m.limits.v_max = L.at("v_max").get<double>();
            m.limits.omega_max = L.at("omega_max").get<double>();
            m.limits.a_max = L.at("a_max").get<double>();
            m.limits.beta_max = L.at("beta_max").get<double>();
            m.limits.q_max = detail::vecN(L.at("q_max"));
            m.limits.dq_max = detail::vecN(L.at("dq_max"));
            m.limits.ddq_max = detail::vecN(L.at("ddq_max"));
            const auto &C = j.at("collision");
            const auto &cyl = C.at("cylinder");
            m.collision.base.radius = cyl.at("radius").get<double>();
            m.collision.base.height = cyl.at("height").get<double>();
            m.collision.base.center = cyl.contains("center")
                                          ? detail::vec3(cyl.at("center"), "cylinder center")
                                          : Eigen::Vector3d(0.0, 0.0, 0.5 * m.collision.base.height);
            m.collision.base_clearance = C.value("base_clearance", 0.05);
            for (const auto &s : C.at("spheres"))
                m.collision.spheres.push_back(
                    {s.at("link").get<int>(), detail::vec3(s.at("offset"), "sphere offset"), s.at("radius").get<double>()});
            for (const auto &p : C.value("self_pairs", nlohmann::json::array()))
                m.collision.self_pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
            m.travel_q = j.contains("travel_q") ? detail::vecN(j.at("travel_q"))
                                                : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.joints.size()));
        }
        catch (const nlohmann::json::exception &e)
        {
            throw InputError(std::string("robot description: ") + e.what());
        }
        m.validate();
        return m;
    }

} // namespace wbp::robot

#endif
