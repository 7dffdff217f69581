#ifndef WBPLAN_TOPO_ROADMAP_HPP
#define WBPLAN_TOPO_ROADMAP_HPP

#include "wbplan/common.hpp"
#include "wbplan/world/grid_esdf.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace wbp::topo
{
    class DisconnectedError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    struct TopoConfig
    {
        // ESDF value (already inflated by the base radius) a base center needs.
        double clearance_min = 0.15;
        int max_samples = 1500;
        // further samples drawn while start and goal remain disconnected
        int extra_samples = 6000;
        int k_max = 5;
        // raw simple paths enumerated before shortening and pruning
        int raw_paths = 48;
        int search_budget = 200000;
        int n_checks = 32;
        double detour_ratio = 2.0;
        std::uint64_t seed = 0;
        // collision step along segments, in grid cells
        double step_cells = 0.5;
    };

    // Base-center free space of the grid: interpolated ESDF above the
    // clearance, checked at a fixed step along segments.
    class FreeSpace
    {
    public:
        FreeSpace(const world::GridEsdf &g, double clearance, double step_cells = 0.5)
            : g_(&g), clearance_(clearance), step_(std::max(1e-6, step_cells * g.resolution()))
        {
        }

        bool pointFree(const Eigen::Vector2d &p) const
        {
            const auto e = g_->query(p);
            return !e.out_of_bounds && e.distance > clearance_;
        }

        bool segmentFree(const Eigen::Vector2d &a, const Eigen::Vector2d &b) const
        {
            const double len = (b - a).norm();
            const int n = std::max(1, static_cast<int>(std::ceil(len / step_)));
            for (int i = 0; i <= n; ++i)
                if (!pointFree(a + (b - a) * (double(i) / n)))
                    return false;
            return true;
        }

        const world::GridEsdf &grid() const { return *g_; }
        double clearance() const { return clearance_; }

    private:
        const world::GridEsdf *g_;
        double clearance_;
        double step_;
    };

    // 4-connected components of the free grid cells. Ground truth for
    // whether two base positions can be joined at grid resolution.
    class FreeRegions
    {
    public:
        explicit FreeRegions(const FreeSpace &fs) : fs_(&fs)
        {
            const auto &g = fs.grid();
            w_ = g.width();
            h_ = g.height();
            label_.assign(static_cast<std::size_t>(w_) * h_, -2);
            for (int j = 0; j < h_; ++j)
                for (int i = 0; i < w_; ++i)
                    label_[j * w_ + i] = fs.pointFree(g.cellCenter(i, j)) ? -1 : -2;
            int next = 0;
            std::vector<int> stack;
            for (int c = 0; c < w_ * h_; ++c)
            {
                if (label_[c] != -1)
                    continue;
                label_[c] = next;
                stack.push_back(c);
                while (!stack.empty())
                {
                    const int u = stack.back();
                    stack.pop_back();
                    const int i = u % w_, j = u / w_;
                    const int nb[4][2] = {{i + 1, j}, {i - 1, j}, {i, j + 1}, {i, j - 1}};
                    for (const auto &n : nb)
                    {
                        if (n[0] < 0 || n[1] < 0 || n[0] >= w_ || n[1] >= h_)
                            continue;
                        const int v = n[1] * w_ + n[0];
                        if (label_[v] == -1)
                        {
                            label_[v] = next;
                            stack.push_back(v);
                        }
                    }
                }
                ++next;
            }
            count_ = next;
        }

        // Component of a free point: that of a free cell center among the
        // nine around it that it sees directly; -1 if none.
        int regionOf(const Eigen::Vector2d &p) const
        {
            if (!fs_->pointFree(p))
                return -1;
            const auto &g = fs_->grid();
            const Eigen::Vector2d o = g.cellCenter(0, 0);
            const int ci = static_cast<int>(std::lround((p.x() - o.x()) / g.resolution()));
            const int cj = static_cast<int>(std::lround((p.y() - o.y()) / g.resolution()));
            for (int dj = -1; dj <= 1; ++dj)
                for (int di = -1; di <= 1; ++di)
                {
                    const int i = ci + di, j = cj + dj;
                    if (i < 0 || j < 0 || i >= w_ || j >= h_ || label_[j * w_ + i] < 0)
                        continue;
                    if (fs_->segmentFree(p, g.cellCenter(i, j)))
                        return label_[j * w_ + i];
                }
            return -1;
        }

        bool connected(const Eigen::Vector2d &a, const Eigen::Vector2d &b) const
        {
            const int ra = regionOf(a);
            return ra >= 0 && ra == regionOf(b);
        }

        int count() const { return count_; }

    private:
        const FreeSpace *fs_;
        int w_ = 0, h_ = 0, count_ = 0;
        std::vector<int> label_;
    };

    struct Edge
    {
        int to;
        double length;
    };

    struct Roadmap
    {
        std::vector<Eigen::Vector2d> nodes;
        std::vector<std::vector<Edge>> adj;
        int start_id = 0;
        int goal_id = 1;

        int addNode(const Eigen::Vector2d &p)
        {
            nodes.push_back(p);
            adj.emplace_back();
            return static_cast<int>(nodes.size()) - 1;
        }

        void addEdge(int a, int b)
        {
            const double l = (nodes[a] - nodes[b]).norm();
            adj[a].push_back({b, l});
            adj[b].push_back({a, l});
        }

        void removeEdge(int a, int b)
        {
            std::erase_if(adj[a], [b](const Edge &e) { return e.to == b; });
            std::erase_if(adj[b], [a](const Edge &e) { return e.to == a; });
        }

        bool connected(int a, int b) const
        {
            std::vector<char> seen(nodes.size(), 0);
            std::vector<int> stack{a};
            seen[a] = 1;
            while (!stack.empty())
            {
                const int u = stack.back();
                stack.pop_back();
                if (u == b)
                    return true;
                for (const auto &e : adj[u])
                    if (!seen[e.to])
                    {
                        seen[e.to] = 1;
                        stack.push_back(e.to);
                    }
            }
            return false;
        }
    };

    namespace detail
    {
        inline double chainLength(const std::vector<Eigen::Vector2d> &w)
        {
            double l = 0.0;
            for (std::size_t i = 1; i < w.size(); ++i)
                l += (w[i] - w[i - 1]).norm();
            return l;
        }

        inline Eigen::Vector2d chainPoint(const std::vector<Eigen::Vector2d> &w, double frac)
        {
            const double target = std::clamp(frac, 0.0, 1.0) * chainLength(w);
            double acc = 0.0;
            for (std::size_t i = 1; i < w.size(); ++i)
            {
                const double l = (w[i] - w[i - 1]).norm();
                if (acc + l >= target && l > 0.0)
                    return w[i - 1] + (w[i] - w[i - 1]) * ((target - acc) / l);
                acc += l;
            }
            return w.back();
        }

        // Uniform visibility deformation test between two polylines.
        inline bool uvd(const std::vector<Eigen::Vector2d> &a, const std::vector<Eigen::Vector2d> &b,
                        const FreeSpace &fs, int n_checks)
        {
            for (int i = 0; i <= n_checks; ++i)
            {
                const double f = double(i) / n_checks;
                if (!fs.segmentFree(chainPoint(a, f), chainPoint(b, f)))
                    return false;
            }
            return true;
        }
    } // namespace detail

    /// Visibility roadmap: uniform samples become guards when they see no
    /// existing guard, and connectors when they see two guards whose
    /// existing links are not deformable into the new one (a shorter
    /// equivalent connector replaces the old one). Start and goal are the
    /// first two guards.
    inline Roadmap buildRoadmap(const world::GridEsdf &g, const Eigen::Vector2d &start, const Eigen::Vector2d &goal,
                                const TopoConfig &cfg)
    {
        const FreeSpace fs(g, cfg.clearance_min, cfg.step_cells);
        if (!fs.pointFree(start) || !fs.pointFree(goal))
            throw DisconnectedError("start or goal lacks base clearance");
        Roadmap r;
        r.start_id = r.addNode(start);
        r.goal_id = r.addNode(goal);
        std::vector<int> guards{r.start_id, r.goal_id};
        // connectors keyed by the guard pair they join
        struct Connector
        {
            int node, a, b;
        };
        std::vector<Connector> connectors;
        // union-find over node ids
        std::vector<int> comp{0, 1};
        auto find = [&comp](int v)
        {
            while (comp[v] != v)
                v = comp[v] = comp[comp[v]];
            return v;
        };

        if (fs.segmentFree(start, goal))
        {
            comp[1] = 0;
            r.addEdge(r.start_id, r.goal_id);
            connectors.push_back({-1, r.start_id, r.goal_id});
        }

        Rng rng(mixSeed(cfg.seed, 0x70b0));
        const Eigen::Vector2d lo = g.cellCenter(0, 0), hi = g.cellCenter(g.width() - 1, g.height() - 1);
        const int limit = cfg.max_samples + std::max(0, cfg.extra_samples);
        for (int s = 0; s < limit; ++s)
        {
            if (s >= cfg.max_samples && find(r.start_id) == find(r.goal_id))
                break;
            const Eigen::Vector2d p(rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y()));
            if (!fs.pointFree(p))
                continue;
            std::vector<int> seen;
            for (int gd : guards)
                if (fs.segmentFree(p, r.nodes[gd]))
                    seen.push_back(gd);
            if (seen.empty())
            {
                comp.push_back(static_cast<int>(comp.size()));
                guards.push_back(r.addNode(p));
                continue;
            }
            if (seen.size() < 2)
                continue;
            // join two components when the sample sees both, else the first two guards
            int a = seen[0], b = seen[1];
            for (std::size_t k = 1; k < seen.size(); ++k)
                if (find(seen[k]) != find(a))
                {
                    b = seen[k];
                    break;
                }
            const std::vector<Eigen::Vector2d> fresh{r.nodes[a], p, r.nodes[b]};
            bool redundant = false;
            for (auto &c : connectors)
            {
                if (!((c.a == a && c.b == b) || (c.a == b && c.b == a)))
                    continue;
                std::vector<Eigen::Vector2d> old{r.nodes[c.a]};
                if (c.node >= 0)
                    old.push_back(r.nodes[c.node]);
                old.push_back(r.nodes[c.b]);
                if (c.a != a)
                    std::reverse(old.begin(), old.end());
                if (!detail::uvd(fresh, old, fs, cfg.n_checks))
                    continue;
                redundant = true;
                // keep the shorter representative
                if (c.node >= 0 && detail::chainLength(fresh) < detail::chainLength(old))
                {
                    r.removeEdge(c.node, c.a);
                    r.removeEdge(c.node, c.b);
                    r.nodes[c.node] = p;
                    r.addEdge(c.node, c.a);
                    r.addEdge(c.node, c.b);
                }
                break;
            }
            if (redundant)
                continue;
            const int id = r.addNode(p);
            comp.push_back(static_cast<int>(comp.size()));
            r.addEdge(id, a);
            r.addEdge(id, b);
            comp[find(id)] = find(a);
            comp[find(b)] = find(a);
            connectors.push_back({id, a, b});
        }
        if (!r.connected(r.start_id, r.goal_id))
            throw DisconnectedError("start and goal lie in separate roadmap components");
        return r;
    }

} // namespace wbp::topo

#endif
