#ifndef WBPLAN_OPT_CONFIG_HPP
#define WBPLAN_OPT_CONFIG_HPP

#include "wbplan/common.hpp"
#include "wbplan/opt/lbfgs.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <string>

namespace wbp::opt
{
    struct AlmParams
    {
        double lambda0 = 0.0;
        double sigma0 = 1e2;
        double gamma = 5.0;
        double sigma_max = 1e9;
        double eps_eq = 1e-4;
        int max_outer = 20;
        // Total objective evaluations over all inner solves, 0 = unlimited.
        // A deterministic stand-in for a wall-clock budget.
        int max_evaluations = 0;
        LbfgsParams inner;
    };

    struct OptimizerConfig
    {
        // Diagonal jerk weights per channel (s, theta, q...). Empty = all ones.
        Eigen::VectorXd W;
        // Weight of the total duration.
        double rho = 2.0;
        // Penalty weight of the discretized inequality constraints.
        double rho_c = 1e4;
        // Constraint samples per segment.
        int K = 16;
        // Fraction of every dynamic limit used inside the optimizer.
        double limit_scale = 0.92;
        // Extra clearance required by the optimizer beyond r_thr (m).
        double collision_margin = 0.04;
        double self_margin = 0.03;
        // Metric constraint residuals are divided by this length (m).
        double length_scale = 0.1;
        AlmParams alm;

        OptimizerConfig()
        {
            alm.inner.memory = 16;
            alm.inner.c1 = 1e-4;
            alm.inner.c2 = 0.9;
            alm.inner.g_epsilon = 1e-5;
            alm.inner.delta = 1e-5;
            alm.inner.past = 5;
            alm.inner.max_iterations = 600;
        }

        void validate() const
        {
            if (!(rho > 0.0) || !(rho_c > 0.0))
                throw InputError("optimizer weights rho and rho_c must be positive");
            if (K < 4)
                throw InputError("optimizer K must be at least 4");
            if (W.size() > 0 && (W.array() < 0.0).any())
                throw InputError("jerk weights must be non-negative");
            if (!(limit_scale > 0.0 && limit_scale <= 1.0))
                throw InputError("limit_scale must be in (0, 1]");
        }
    };

    // Target end-effector pose with residual weights.
    struct GoalSpec
    {
        SE3Pose pose;
        double position_weight = 1.0;
        double rotation_weight = 1.0;

        void validate() const
        {
            const Eigen::Matrix3d E = pose.R.transpose() * pose.R - Eigen::Matrix3d::Identity();
            if (E.cwiseAbs().maxCoeff() > 1e-6 || std::abs(pose.R.determinant() - 1.0) > 1e-6)
                throw InputError("goal rotation must be orthonormal with det +1");
        }
    };

    inline void to_json(nlohmann::json &j, const LbfgsParams &p)
    {
        j = nlohmann::json{{"memory", p.memory},         {"g_epsilon", p.g_epsilon}, {"past", p.past},
                           {"delta", p.delta},           {"max_iterations", p.max_iterations},
                           {"max_linesearch", p.max_linesearch}, {"c1", p.c1}, {"c2", p.c2}};
    }

    inline void from_json(const nlohmann::json &j, LbfgsParams &p)
    {
        p.memory = j.value("memory", p.memory);
        p.g_epsilon = j.value("g_epsilon", p.g_epsilon);
        p.past = j.value("past", p.past);
        p.delta = j.value("delta", p.delta);
        p.max_iterations = j.value("max_iterations", p.max_iterations);
        p.max_linesearch = j.value("max_linesearch", p.max_linesearch);
        p.c1 = j.value("c1", p.c1);
        p.c2 = j.value("c2", p.c2);
    }

    inline void to_json(nlohmann::json &j, const OptimizerConfig &c)
    {
        j = nlohmann::json{{"W", std::vector<double>(c.W.data(), c.W.data() + c.W.size())},
                           {"rho", c.rho},
                           {"rho_c", c.rho_c},
                           {"K", c.K},
                           {"limit_scale", c.limit_scale},
                           {"collision_margin", c.collision_margin},
                           {"self_margin", c.self_margin},
                           {"length_scale", c.length_scale},
                           {"alm",
                            {{"lambda0", c.alm.lambda0},
                             {"sigma0", c.alm.sigma0},
                             {"gamma", c.alm.gamma},
                             {"sigma_max", c.alm.sigma_max},
                             {"eps_eq", c.alm.eps_eq},
                             {"max_outer", c.alm.max_outer},
                             {"max_evaluations", c.alm.max_evaluations}}},
                           {"lbfgs", c.alm.inner}};
    }

    inline void from_json(const nlohmann::json &j, OptimizerConfig &c)
    {
        if (j.contains("W"))
        {
            const auto w = j.at("W").get<std::vector<double>>();
            c.W = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
        }
        c.rho = j.value("rho", c.rho);
        c.rho_c = j.value("rho_c", c.rho_c);
        c.K = j.value("K", c.K);
        c.limit_scale = j.value("limit_scale", c.limit_scale);
        c.collision_margin = j.value("collision_margin", c.collision_margin);
        c.self_margin = j.value("self_margin", c.self_margin);
        c.length_scale = j.value("length_scale", c.length_scale);
        if (j.contains("alm"))
        {
            const auto &a = j.at("alm");
            c.alm.lambda0 = a.value("lambda0", c.alm.lambda0);
            c.alm.sigma0 = a.value("sigma0", c.alm.sigma0);
            c.alm.gamma = a.value("gamma", c.alm.gamma);
            c.alm.sigma_max = a.value("sigma_max", c.alm.sigma_max);
            c.alm.eps_eq = a.value("eps_eq", c.alm.eps_eq);
            c.alm.max_outer = a.value("max_outer", c.alm.max_outer);
            c.alm.max_evaluations = a.value("max_evaluations", c.alm.max_evaluations);
        }
        if (j.contains("lbfgs"))
            from_json(j.at("lbfgs"), c.alm.inner);
        c.validate();
    }

} // namespace wbp::opt

#endif
