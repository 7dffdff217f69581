#ifndef WBPLAN_IO_JSON_IO_HPP
#define WBPLAN_IO_JSON_IO_HPP

#include "wbplan/pipeline/benchmark.hpp"
#include "wbplan/robot/flat.hpp"

#include <json.hpp>

#include <cstdio>
#include <sstream>
#include <string>

namespace wbp::io
{
    using nlohmann::json;

    namespace detail
    {
        inline std::vector<double> toStd(const Eigen::VectorXd &v) { return {v.data(), v.data() + v.size()}; }

        inline Eigen::VectorXd vec(const json &j, const char *what)
        {
            if (!j.is_array())
                throw InputError(std::string(what) + ": expected an array of numbers");
            Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
            for (std::size_t i = 0; i < j.size(); ++i)
            {
                if (!j[i].is_number())
                    throw InputError(std::string(what) + "[" + std::to_string(i) + "]: expected a number");
                v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
            }
            return v;
        }

        inline const json &field(const json &j, const char *key, const char *where)
        {
            if (!j.is_object() || !j.contains(key))
                throw InputError(std::string(where) + ": missing field '" + key + "'");
            return j.at(key);
        }

        inline double number(const json &j, const char *key, const char *where)
        {
            const json &v = field(j, key, where);
            if (!v.is_number())
                throw InputError(std::string(where) + "." + key + ": expected a number");
            return v.get<double>();
        }

        // Fixed formatting so CSV bytes only depend on the values.
        inline std::string fmt(double v)
        {
            if (!std::isfinite(v))
                return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.9g", v);
            return buf;
        }

        inline std::string csvField(const std::string &s)
        {
            if (s.find_first_of(",\"\n") == std::string::npos)
                return s;
            std::string out = "\"";
            for (char c : s)
                out += c == '"' ? std::string("\"\"") : std::string(1, c);
            return out + "\"";
        }
    } // namespace detail

    // ---- trajectory ---------------------------------------------------------

    /// {x0, y0, durations[M], coeffs[M][D][6]}, coefficients ascending in local time.
    inline json trajectoryToJson(const traj::WholeBodyTrajectory &tr)
    {
        json segs = json::array();
        for (int j = 0; j < tr.pieces(); ++j)
        {
            json chans = json::array();
            for (int d = 0; d < tr.channels(); ++d)
            {
                std::vector<double> c(6);
                for (int k = 0; k < 6; ++k)
                    c[k] = tr.coeffs(6 * j + k, d);
                chans.push_back(c);
            }
            segs.push_back(chans);
        }
        return {{"x0", tr.x0}, {"y0", tr.y0}, {"durations", detail::toStd(tr.durations)}, {"coeffs", segs}};
    }

    inline traj::WholeBodyTrajectory trajectoryFromJson(const json &j)
    {
        traj::WholeBodyTrajectory tr;
        tr.x0 = detail::number(j, "x0", "trajectory");
        tr.y0 = detail::number(j, "y0", "trajectory");
        tr.durations = detail::vec(detail::field(j, "durations", "trajectory"), "trajectory.durations");
        const int M = tr.pieces();
        if (M < 1)
            throw InputError("trajectory.durations: needs at least one segment");
        if (!(tr.durations.array() > 0.0).all() || !tr.durations.allFinite())
            throw InputError("trajectory.durations: must be positive and finite");
        const json &c = detail::field(j, "coeffs", "trajectory");
        if (!c.is_array() || static_cast<int>(c.size()) != M)
            throw InputError("trajectory.coeffs: expected one entry per segment");
        const int D = c[0].is_array() ? static_cast<int>(c[0].size()) : 0;
        if (D < 3)
            throw InputError("trajectory.coeffs[0]: expected at least 3 channels");
        tr.coeffs.resize(6 * M, D);
        for (int s = 0; s < M; ++s)
        {
            if (!c[s].is_array() || static_cast<int>(c[s].size()) != D)
                throw InputError("trajectory.coeffs[" + std::to_string(s) + "]: channel count mismatch");
            for (int d = 0; d < D; ++d)
            {
                const std::string where = "trajectory.coeffs[" + std::to_string(s) + "][" + std::to_string(d) + "]";
                const Eigen::VectorXd v = detail::vec(c[s][d], where.c_str());
                if (v.size() != 6)
                    throw InputError(where + ": expected 6 coefficients");
                tr.coeffs.block<6, 1>(6 * s, d) = v;
            }
        }
        return tr;
    }

    /// Uniformly resampled states: t, x, y, theta, s, v, omega, q1..qN.
    inline std::string trajectoryCsv(const traj::WholeBodyTrajectory &tr, double dt)
    {
        std::ostringstream os;
        const int n = tr.dof();
        os << "t,x,y,theta,s,v,omega";
        for (int k = 0; k < n; ++k)
            os << ",q" << k + 1;
        os << '\n';
        const double Tf = tr.totalDuration();
        const int steps = std::max(1, static_cast<int>(std::ceil(Tf / dt - 1e-9)));
        for (int i = 0; i <= steps; ++i)
        {
            const double t = std::min(Tf, i * dt);
            const Eigen::VectorXd p = tr.eval(t, 0), v = tr.eval(t, 1);
            const auto xy = robot::flatPosition(tr, t, 16).xy;
            os << detail::fmt(t) << ',' << detail::fmt(xy.x()) << ',' << detail::fmt(xy.y()) << ','
               << detail::fmt(p(traj::kChTheta)) << ',' << detail::fmt(p(traj::kChS)) << ','
               << detail::fmt(v(traj::kChS)) << ',' << detail::fmt(v(traj::kChTheta));
            for (int k = 0; k < n; ++k)
                os << ',' << detail::fmt(p(traj::kChQ0 + k));
            os << '\n';
        }
        return os.str();
    }

    // ---- requests -----------------------------------------------------------

    inline json poseToJson(const SE3Pose &p)
    {
        json rows = json::array();
        for (int r = 0; r < 3; ++r)
            rows.push_back({p.R(r, 0), p.R(r, 1), p.R(r, 2)});
        return {{"position", {p.p.x(), p.p.y(), p.p.z()}}, {"rotation", rows}};
    }

    /// position [3] plus either rotation (3x3 rows) or rpy [3].
    inline SE3Pose poseFromJson(const json &j, const char *where)
    {
        SE3Pose out;
        const Eigen::VectorXd p = detail::vec(detail::field(j, "position", where), "position");
        if (p.size() != 3)
            throw InputError(std::string(where) + ".position: expected 3 numbers");
        out.p = p;
        if (j.contains("rotation"))
        {
            const json &R = j.at("rotation");
            if (!R.is_array() || R.size() != 3)
                throw InputError(std::string(where) + ".rotation: expected 3 rows");
            for (int r = 0; r < 3; ++r)
            {
                const Eigen::VectorXd row = detail::vec(R[r], "rotation row");
                if (row.size() != 3)
                    throw InputError(std::string(where) + ".rotation: expected 3x3");
                out.R.row(r) = row.transpose();
            }
            if ((out.R.transpose() * out.R - Eigen::Matrix3d::Identity()).norm() > 1e-6 || out.R.determinant() < 0.0)
                throw InputError(std::string(where) + ".rotation: not a rotation matrix");
        }
        else if (j.contains("rpy"))
        {
            const Eigen::VectorXd rpy = detail::vec(j.at("rpy"), "rpy");
            if (rpy.size() != 3)
                throw InputError(std::string(where) + ".rpy: expected 3 numbers");
            out.R = rpyToMatrix(rpy);
        }
        return out;
    }

    inline json requestToJson(const pipeline::PlanRequest &r)
    {
        return {{"start",
                 {{"base", {r.start.base.x, r.start.base.y, r.start.base.theta}}, {"q", detail::toStd(r.start.q)}}},
                {"goal", poseToJson(r.goal.pose)},
                {"seed", r.seed}};
    }

    inline pipeline::PlanRequest requestFromJson(const json &j)
    {
        pipeline::PlanRequest r;
        const json &s = detail::field(j, "start", "request");
        const Eigen::VectorXd b = detail::vec(detail::field(s, "base", "start"), "start.base");
        if (b.size() != 3)
            throw InputError("start.base: expected [x, y, theta]");
        r.start.base = SE2{b(0), b(1), b(2)};
        r.start.q = detail::vec(detail::field(s, "q", "start"), "start.q");
        r.start.v = s.value("v", 0.0);
        r.start.omega = s.value("omega", 0.0);
        const json &g = detail::field(j, "goal", "request");
        r.goal.pose = poseFromJson(g, "goal");
        r.goal.position_weight = g.value("position_weight", r.goal.position_weight);
        r.goal.rotation_weight = g.value("rotation_weight", r.goal.rotation_weight);
        r.seed = j.value("seed", std::uint64_t{0});
        return r;
    }

    // ---- reports ------------------------------------------------------------

    inline json pathToJson(const topo::Path2D &p)
    {
        json pts = json::array();
        for (const auto &w : p.waypoints)
            pts.push_back({w.x(), w.y()});
        return pts;
    }

    /// Timing fields are only emitted with `timing`; everything else is a
    /// pure function of the inputs.
    inline json reportToJson(const pipeline::PlanReport &rep, bool timing = false, bool with_trajectory = true)
    {
        json cands = json::array();
        for (const auto &c : rep.candidates)
        {
            json jc = {{"index", c.index},
                       {"path_length", c.path_length},
                       {"path", pathToJson(c.path)},
                       {"init_ok", c.init_ok},
                       {"pieces", c.pieces},
                       {"opt_status", c.opt_status},
                       {"cost", c.cost},
                       {"evaluations", c.evaluations},
                       {"outer_iterations", c.outer_iterations},
                       {"inner_iterations", c.inner_iterations},
                       {"residual_inf", c.residual_inf},
                       {"goal_position_error", c.goal_position_error},
                       {"goal_rotation_error", c.goal_rotation_error},
                       {"validated", c.validated},
                       {"success", c.success},
                       {"failure_reason", c.failure_reason}};
            if (c.trajectory)
                jc["final_time"] = c.trajectory->totalDuration();
            if (c.validation)
                jc["validation"] = pipeline::toJson(*c.validation);
            if (timing)
                jc["wall_ms"] = c.wall_ms;
            cands.push_back(std::move(jc));
        }
        json j = {{"status", pipeline::toString(rep.status)},
                  {"failure_reason", rep.failure_reason},
                  {"best_index", rep.best_index},
                  {"final_time", rep.finalTime()},
                  {"candidates", cands}};
        if (rep.goal_base)
            j["goal_base"] = {{"base", {rep.goal_base->base.x, rep.goal_base->base.y, rep.goal_base->base.theta}},
                              {"q", detail::toStd(rep.goal_base->q)}};
        if (with_trajectory && rep.best())
            j["trajectory"] = trajectoryToJson(*rep.best()->trajectory);
        if (timing)
        {
            j["wall_ms"] = rep.wall_ms;
            j["setup_ms"] = rep.setup_ms;
            j["critical_path_ms"] = rep.criticalPathMs();
        }
        return j;
    }

    // ---- benchmark ----------------------------------------------------------

    inline json benchmarkSpecToJson(const pipeline::BenchmarkSpec &s)
    {
        json iv = json::array();
        for (const auto &i : s.intervals)
            iv.push_back({i.lo, i.hi});
        return {{"intervals", iv},          {"trials", s.trials},
                {"scenario", s.scenario},   {"seed", s.seed},
                {"budget_ms", s.budget_ms}, {"joint_range", s.joint_range},
                {"state_margin", s.state_margin}, {"planner", s.planner}};
    }

    inline pipeline::BenchmarkSpec benchmarkSpecFromJson(const json &j)
    {
        pipeline::BenchmarkSpec s;
        try
        {
            if (j.contains("intervals"))
            {
                s.intervals.clear();
                for (const auto &i : j.at("intervals"))
                {
                    const Eigen::VectorXd v = detail::vec(i, "intervals[]");
                    if (v.size() != 2)
                        throw InputError("intervals: each entry is [d_min, d_max]");
                    s.intervals.push_back({v(0), v(1)});
                }
            }
            s.trials = j.value("trials", s.trials);
            if (j.contains("scenario"))
                world::from_json(j.at("scenario"), s.scenario);
            s.seed = j.value("seed", s.seed);
            s.budget_ms = j.value("budget_ms", s.budget_ms);
            s.planner.setBudget(s.budget_ms);
            s.joint_range = j.value("joint_range", s.joint_range);
            s.state_margin = j.value("state_margin", s.state_margin);
            s.jobs = j.value("jobs", s.jobs);
            if (j.contains("planner"))
                pipeline::from_json(j.at("planner"), s.planner);
        }
        catch (const json::exception &e)
        {
            throw InputError(std::string("benchmark spec: ") + e.what());
        }
        s.validate();
        return s;
    }

    inline std::string benchmarkCsv(const pipeline::BenchmarkResult &r, bool timing = false)
    {
        std::ostringstream os;
        os << "interval,d_min,d_max,trial,seed,distance,status,success,candidates,best_index,final_time,cost,"
              "failure_reason";
        if (timing)
            os << ",wall_ms,critical_path_ms";
        os << '\n';
        for (const auto &row : r.rows)
        {
            const auto &iv = r.intervals[row.interval].range;
            os << row.interval << ',' << detail::fmt(iv.lo) << ',' << detail::fmt(iv.hi) << ',' << row.trial << ','
               << row.seed << ',' << detail::fmt(row.distance) << ',' << row.status << ',' << (row.success ? 1 : 0)
               << ',' << row.candidates << ',' << row.best_index << ',' << detail::fmt(row.final_time) << ','
               << detail::fmt(row.success ? row.cost : 0.0) << ',' << detail::csvField(row.failure_reason);
            if (timing)
                os << ',' << detail::fmt(row.wall_ms) << ',' << detail::fmt(row.critical_ms);
            os << '\n';
        }
        return os.str();
    }

    /// Per interval: S.R. (%), mean planning time (ms), mean T_f (s) over
    /// successes, failure histogram. Planning times are wall-clock and only
    /// emitted with `timing`.
    inline json benchmarkSummaryJson(const pipeline::BenchmarkResult &r, const pipeline::BenchmarkSpec &spec,
                                     bool timing = false)
    {
        json ivs = json::array();
        for (const auto &s : r.intervals)
        {
            json j = {{"d_min", s.range.lo},
                      {"d_max", s.range.hi},
                      {"trials", s.trials},
                      {"successes", s.successes},
                      {"success_rate", s.successRate()},
                      {"mean_final_time", s.mean_final_time},
                      {"failures", s.failures}};
            if (timing)
            {
                j["mean_planning_ms"] = s.mean_wall_ms;
                j["mean_critical_path_ms"] = s.mean_critical_ms;
                j["over_budget"] = s.over_budget;
            }
            ivs.push_back(std::move(j));
        }
        return {{"seed", spec.seed}, {"budget_ms", spec.budget_ms}, {"intervals", ivs}};
    }

} // namespace wbp::io

#endif
