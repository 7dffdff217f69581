#ifndef WBPLAN_IO_SVG_HPP
#define WBPLAN_IO_SVG_HPP

#include "wbplan/pipeline/planner.hpp"
#include "wbplan/robot/flat.hpp"

#include <cstdio>
#include <sstream>
#include <string>

namespace wbp::io
{
    namespace detail
    {
        inline std::string num(double v)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.4g", v);
            return buf;
        }

        // ESDF value -> grey level; obstacles dark, open space light.
        inline std::string heat(double d, double dmax)
        {
            const double u = std::clamp(d / dmax, -1.0, 1.0);
            int r, g, b;
            if (u <= 0.0)
            {
                r = 90 + static_cast<int>(60 * (1.0 + u));
                g = b = 60;
            }
            else
            {
                r = g = static_cast<int>(170 + 85 * u);
                b = 255;
            }
            char buf[16];
            std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
            return buf;
        }
    } // namespace detail

    /// Top view: ESDF heatmap, obstacle footprints, candidate base paths,
    /// the planned base path and start / goal markers. World y points up.
    inline std::string renderSvg(const world::World &w, const pipeline::PlanRequest *req,
                                 const pipeline::PlanReport *rep, double px_per_m = 40.0)
    {
        using detail::num;
        const auto &room = w.scenario.room;
        const double W = room.width() * px_per_m, H = room.height() * px_per_m;
        std::ostringstream os;
        os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(W) << "\" height=\"" << num(H)
           << "\" viewBox=\"" << num(room.xmin) << ' ' << num(-room.ymax) << ' ' << num(room.width()) << ' '
           << num(room.height()) << "\">\n";
        os << "<g transform=\"scale(1,-1)\">\n";

        // heatmap, subsampled to at most ~20k cells
        const auto &g = w.esdf;
        const int stride = std::max(1, static_cast<int>(std::ceil(std::sqrt(g.width() * double(g.height()) / 2e4))));
        const double cell = g.resolution() * stride;
        os << "<g id=\"esdf\" shape-rendering=\"crispEdges\">\n";
        for (int j = 0; j < g.height(); j += stride)
            for (int i = 0; i < g.width(); i += stride)
            {
                const Eigen::Vector2d c = g.cellCenter(i, j);
                os << "<rect x=\"" << num(c.x() - 0.5 * g.resolution()) << "\" y=\"" << num(c.y() - 0.5 * g.resolution())
                   << "\" width=\"" << num(cell) << "\" height=\"" << num(cell) << "\" fill=\""
                   << detail::heat(g.at(i, j), 2.0) << "\"/>\n";
            }
        os << "</g>\n<g id=\"obstacles\" fill=\"none\" stroke=\"#202020\" stroke-width=\"0.03\">\n";
        for (const auto &b : w.scenario.obstacles)
        {
            const auto c = world::footprintOf(b).corners();
            os << "<polygon points=\"";
            for (const auto &p : c)
                os << num(p.x()) << ',' << num(p.y()) << ' ';
            os << "\"/>\n";
        }
        os << "</g>\n";

        auto polyline = [&os](const std::vector<Eigen::Vector2d> &pts, const char *color, double width)
        {
            os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << num(width) << "\" points=\"";
            for (const auto &p : pts)
                os << num(p.x()) << ',' << num(p.y()) << ' ';
            os << "\"/>\n";
        };
        if (rep)
        {
            os << "<g id=\"candidates\">\n";
            for (const auto &c : rep->candidates)
                polyline(c.path.waypoints, c.success ? "#2a9d8f" : "#e76f51", 0.04);
            os << "</g>\n";
            if (const auto *b = rep->best())
            {
                const auto &tr = *b->trajectory;
                std::vector<Eigen::Vector2d> pts;
                const double Tf = tr.totalDuration();
                const int n = std::max(2, static_cast<int>(Tf / 0.05));
                for (int i = 0; i <= n; ++i)
                    pts.push_back(robot::flatPosition(tr, Tf * i / n, 8).xy);
                os << "<g id=\"solution\">\n";
                polyline(pts, "#1d3557", 0.07);
                os << "</g>\n";
            }
        }
        if (req)
        {
            os << "<circle id=\"start\" cx=\"" << num(req->start.base.x) << "\" cy=\"" << num(req->start.base.y)
               << "\" r=\"0.15\" fill=\"#2b9348\"/>\n";
            os << "<circle id=\"goal\" cx=\"" << num(req->goal.pose.p.x()) << "\" cy=\"" << num(req->goal.pose.p.y())
               << "\" r=\"0.15\" fill=\"#d00000\"/>\n";
        }
        os << "</g>\n</svg>\n";
        return os.str();
    }

} // namespace wbp::io

#endif
