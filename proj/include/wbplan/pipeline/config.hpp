#ifndef WBPLAN_PIPELINE_CONFIG_HPP
#define WBPLAN_PIPELINE_CONFIG_HPP

#include "wbplan/opt/config.hpp"
#include "wbplan/topo/roadmap.hpp"

#include <json.hpp>

namespace wbp::pipeline
{
    struct InitConfig
    {
        // Base sampling step along candidate paths (m).
        double base_interval = 0.5;
        // Largest per-joint change between consecutive arm states (rad).
        double dq_step = 0.6;
        // Clearance every initial whole-body state must keep (m).
        double margin = 0.02;
        int repair_attempts = 200;
        int ik_restarts = 6;
        int ik_max_iterations = 200;
        double ik_position_tol = 1e-3;
        double ik_rotation_tol = 1e-2;
        // Candidate base positions tried around the goal end-effector.
        int goal_base_samples = 64;
        int goal_base_keep = 3;
        double goal_base_rmin = 0.15;
        double goal_base_rmax = 0.9;
        // Segment layout of the initial trajectory.
        double segment_length = 1.0;
        double segment_joint_change = 1.0;
        double turn_threshold = 0.6;
        double reference_speed = 0.5; // fraction of every rate limit
        double min_duration = 1.0;
        int max_pieces = 30;
    };

    struct PlannerConfig
    {
        double esdf_resolution = 0.1;
        // Footprint inflation; negative means the base cylinder radius.
        double esdf_inflation = -1.0;
        topo::TopoConfig topo;
        InitConfig init;
        opt::OptimizerConfig opt;
        // Pass threshold of the independent validator (normalized per family).
        double validation_tol = 1e-3;
        // Validator samples per segment, as a multiple of the optimizer's K.
        int validation_density = 10;
        double goal_position_tol = 1e-3;
        double goal_rotation_tol = 1e-2;
        // Worker threads for candidates, 0 = hardware concurrency.
        int jobs = 0;
        // The time budget is enforced as a per-candidate evaluation cap so
        // that results never depend on machine load.
        double evaluations_per_ms = 1.2;

        PlannerConfig() { setBudget(5000.0); }

        void setBudget(double ms)
        {
            if (!(ms > 0.0))
                throw InputError("budget must be positive");
            opt.alm.max_evaluations = std::max(1, static_cast<int>(std::lround(ms * evaluations_per_ms)));
        }

        void validate() const
        {
            opt.validate();
            if (!(esdf_resolution > 0.0))
                throw InputError("esdf_resolution must be positive");
            if (!(init.base_interval > 0.0))
                throw InputError("base_interval must be positive");
            if (topo.k_max < 1)
                throw InputError("k_max must be at least 1");
            if (validation_density < 1)
                throw InputError("validation_density must be at least 1");
            if (jobs < 0)
                throw InputError("jobs must be non-negative");
        }
    };

    inline void to_json(nlohmann::json &j, const PlannerConfig &c)
    {
        j = nlohmann::json{
            {"esdf_resolution", c.esdf_resolution},
            {"esdf_inflation", c.esdf_inflation},
            {"topo",
             {{"clearance_min", c.topo.clearance_min},
              {"max_samples", c.topo.max_samples},
              {"extra_samples", c.topo.extra_samples},
              {"k_max", c.topo.k_max},
              {"raw_paths", c.topo.raw_paths},
              {"search_budget", c.topo.search_budget},
              {"n_checks", c.topo.n_checks},
              {"detour_ratio", c.topo.detour_ratio}}},
            {"init",
             {{"base_interval", c.init.base_interval},
              {"dq_step", c.init.dq_step},
              {"margin", c.init.margin},
              {"repair_attempts", c.init.repair_attempts},
              {"ik_restarts", c.init.ik_restarts},
              {"goal_base_samples", c.init.goal_base_samples},
              {"goal_base_keep", c.init.goal_base_keep},
              {"segment_length", c.init.segment_length},
              {"reference_speed", c.init.reference_speed},
              {"min_duration", c.init.min_duration},
              {"max_pieces", c.init.max_pieces}}},
            {"optimizer", c.opt},
            {"validation_tol", c.validation_tol},
            {"validation_density", c.validation_density},
            {"goal_position_tol", c.goal_position_tol},
            {"goal_rotation_tol", c.goal_rotation_tol},
            {"jobs", c.jobs},
            {"evaluations_per_ms", c.evaluations_per_ms}};
    }

    inline void from_json(const nlohmann::json &j, PlannerConfig &c)
    {
        c.esdf_resolution = j.value("esdf_resolution", c.esdf_resolution);
        c.esdf_inflation = j.value("esdf_inflation", c.esdf_inflation);
        if (j.contains("topo"))
        {
            const auto &t = j.at("topo");
            c.topo.clearance_min = t.value("clearance_min", c.topo.clearance_min);
            c.topo.max_samples = t.value("max_samples", c.topo.max_samples);
            c.topo.extra_samples = t.value("extra_samples", c.topo.extra_samples);
            c.topo.k_max = t.value("k_max", c.topo.k_max);
            c.topo.raw_paths = t.value("raw_paths", c.topo.raw_paths);
            c.topo.search_budget = t.value("search_budget", c.topo.search_budget);
            c.topo.n_checks = t.value("n_checks", c.topo.n_checks);
            c.topo.detour_ratio = t.value("detour_ratio", c.topo.detour_ratio);
        }
        if (j.contains("init"))
        {
            const auto &t = j.at("init");
            c.init.base_interval = t.value("base_interval", c.init.base_interval);
            c.init.dq_step = t.value("dq_step", c.init.dq_step);
            c.init.margin = t.value("margin", c.init.margin);
            c.init.repair_attempts = t.value("repair_attempts", c.init.repair_attempts);
            c.init.ik_restarts = t.value("ik_restarts", c.init.ik_restarts);
            c.init.goal_base_samples = t.value("goal_base_samples", c.init.goal_base_samples);
            c.init.goal_base_keep = t.value("goal_base_keep", c.init.goal_base_keep);
            c.init.segment_length = t.value("segment_length", c.init.segment_length);
            c.init.reference_speed = t.value("reference_speed", c.init.reference_speed);
            c.init.min_duration = t.value("min_duration", c.init.min_duration);
            c.init.max_pieces = t.value("max_pieces", c.init.max_pieces);
        }
        if (j.contains("optimizer"))
            opt::from_json(j.at("optimizer"), c.opt);
        c.validation_tol = j.value("validation_tol", c.validation_tol);
        c.validation_density = j.value("validation_density", c.validation_density);
        c.goal_position_tol = j.value("goal_position_tol", c.goal_position_tol);
        c.goal_rotation_tol = j.value("goal_rotation_tol", c.goal_rotation_tol);
        c.jobs = j.value("jobs", c.jobs);
        c.evaluations_per_ms = j.value("evaluations_per_ms", c.evaluations_per_ms);
        c.validate();
    }

} // namespace wbp::pipeline

#endif
