#ifndef WBPLAN_TOPO_PATHS_HPP
#define WBPLAN_TOPO_PATHS_HPP

#include "wbplan/topo/roadmap.hpp"

#include <algorithm>
#include <vector>

namespace wbp::topo
{
    struct Path2D
    {
        std::vector<Eigen::Vector2d> waypoints;

        double length() const { return detail::chainLength(waypoints); }
        // Point at the given fraction of arc length.
        Eigen::Vector2d at(double frac) const { return detail::chainPoint(waypoints, frac); }
    };

    /// Simple start-goal paths of the roadmap by depth-first enumeration
    /// (at most `search_budget` node expansions), the k_max shortest first.
    inline std::vector<Path2D> searchTopoPaths(const Roadmap &r, int k_max, int search_budget = 200000)
    {
        struct Found
        {
            double length;
            std::vector<int> ids;
        };
        std::vector<Found> found;
        std::vector<int> stack{r.start_id};
        std::vector<char> on_path(r.nodes.size(), 0);
        on_path[r.start_id] = 1;
        // per-depth cursor into the adjacency list
        std::vector<std::size_t> cursor{0};
        std::vector<double> len{0.0};
        int budget = search_budget;
        while (!stack.empty() && budget > 0)
        {
            const int u = stack.back();
            if (u == r.goal_id || cursor.back() >= r.adj[u].size())
            {
                if (u == r.goal_id)
                    found.push_back({len.back(), stack});
                on_path[u] = 0;
                stack.pop_back();
                cursor.pop_back();
                len.pop_back();
                continue;
            }
            const Edge e = r.adj[u][cursor.back()++];
            if (on_path[e.to])
                continue;
            --budget;
            on_path[e.to] = 1;
            stack.push_back(e.to);
            cursor.push_back(0);
            len.push_back(len.back() + e.length);
        }
        std::sort(found.begin(), found.end(), [](const Found &a, const Found &b)
                  { return a.length != b.length ? a.length < b.length : a.ids < b.ids; });
        if (static_cast<int>(found.size()) > k_max)
            found.resize(std::max(0, k_max));
        std::vector<Path2D> out;
        for (const auto &f : found)
        {
            Path2D p;
            for (int id : f.ids)
                p.waypoints.push_back(r.nodes[id]);
            out.push_back(std::move(p));
        }
        return out;
    }

    inline bool uvdEquivalent(const Path2D &a, const Path2D &b, const FreeSpace &fs, int n_checks = 32)
    {
        return detail::uvd(a.waypoints, b.waypoints, fs, n_checks);
    }

    /// Greedy line-of-sight shortcutting: from each kept waypoint jump to the
    /// farthest later waypoint that is visible and whose straight segment is
    /// deformable into the skipped subchain.
    inline Path2D shortenPath(const Path2D &p, const FreeSpace &fs, int n_checks = 32)
    {
        const auto &w = p.waypoints;
        if (w.size() <= 2)
            return p;
        Path2D out;
        out.waypoints.push_back(w.front());
        std::size_t i = 0;
        while (i + 1 < w.size())
        {
            std::size_t next = i + 1;
            for (std::size_t j = w.size() - 1; j > i + 1; --j)
            {
                if (!fs.segmentFree(w[i], w[j]))
                    continue;
                const std::vector<Eigen::Vector2d> sub(w.begin() + i, w.begin() + j + 1);
                if (detail::uvd({w[i], w[j]}, sub, fs, n_checks))
                {
                    next = j;
                    break;
                }
            }
            out.waypoints.push_back(w[next]);
            i = next;
        }
        // drop collinear interior points
        std::vector<Eigen::Vector2d> clean{out.waypoints.front()};
        for (std::size_t k = 1; k + 1 < out.waypoints.size(); ++k)
        {
            const Eigen::Vector2d a = out.waypoints[k] - clean.back(), b = out.waypoints[k + 1] - out.waypoints[k];
            if (std::abs(a.x() * b.y() - a.y() * b.x()) > 1e-9 * a.norm() * b.norm() || a.dot(b) < 0.0)
                clean.push_back(out.waypoints[k]);
        }
        clean.push_back(out.waypoints.back());
        out.waypoints = std::move(clean);
        return out;
    }

    /// Keeps the first path of each UVD class (input sorted by length), drops
    /// detours longer than detour_ratio times the shortest, caps at k_max.
    inline std::vector<Path2D> prunePaths(const std::vector<Path2D> &paths, const FreeSpace &fs, const TopoConfig &cfg)
    {
        std::vector<Path2D> out;
        if (paths.empty())
            return out;
        const double shortest = paths.front().length();
        for (const auto &p : paths)
        {
            if (static_cast<int>(out.size()) >= cfg.k_max)
                break;
            if (p.length() > cfg.detour_ratio * shortest)
                continue;
            const bool dup = std::any_of(out.begin(), out.end(),
                                         [&](const Path2D &q) { return uvdEquivalent(p, q, fs, cfg.n_checks); });
            if (!dup)
                out.push_back(p);
        }
        return out;
    }

    /// Roadmap, enumeration, shortening and pruning in one call. Throws
    /// DisconnectedError when no path exists.
    inline std::vector<Path2D> candidatePaths(const world::GridEsdf &g, const Eigen::Vector2d &start,
                                              const Eigen::Vector2d &goal, const TopoConfig &cfg)
    {
        const FreeSpace fs(g, cfg.clearance_min, cfg.step_cells);
        const Roadmap r = buildRoadmap(g, start, goal, cfg);
        auto raw = searchTopoPaths(r, cfg.raw_paths, cfg.search_budget);
        for (auto &p : raw)
            p = shortenPath(p, fs, cfg.n_checks);
        std::stable_sort(raw.begin(), raw.end(),
                         [](const Path2D &a, const Path2D &b) { return a.length() < b.length(); });
        return prunePaths(raw, fs, cfg);
    }

} // namespace wbp::topo

#endif
