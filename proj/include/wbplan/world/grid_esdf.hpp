#ifndef WBPLAN_WORLD_GRID_ESDF_HPP
#define WBPLAN_WORLD_GRID_ESDF_HPP

#include "wbplan/world/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

namespace wbp::world
{
    struct EsdfSample
    {
        double distance = 0.0;
        Eigen::Vector2d gradient = Eigen::Vector2d::Zero();
        bool out_of_bounds = false;
    };

    // Signed distance of the base footprint world sampled on cell centers.
    // Cell (i, j) has its center at origin + ((i + 0.5) * res, (j + 0.5) * res).
    class GridEsdf
    {
    public:
        GridEsdf() = default;
        GridEsdf(Eigen::Vector2d origin, double resolution, int width, int height)
            : origin_(origin), res_(resolution), w_(width), h_(height),
              dist_(static_cast<std::size_t>(width) * height, 0.0),
              occ_(static_cast<std::size_t>(width) * height, 0)
        {
        }

        const Eigen::Vector2d &origin() const { return origin_; }
        double resolution() const { return res_; }
        int width() const { return w_; }
        int height() const { return h_; }

        double at(int i, int j) const { return dist_[index(i, j)]; }
        double &at(int i, int j) { return dist_[index(i, j)]; }
        bool occupied(int i, int j) const { return occ_[index(i, j)] != 0; }
        void setOccupied(int i, int j, bool v) { occ_[index(i, j)] = v ? 1 : 0; }

        Eigen::Vector2d cellCenter(int i, int j) const
        {
            return origin_ + Eigen::Vector2d((i + 0.5) * res_, (j + 0.5) * res_);
        }

        bool contains(const Eigen::Vector2d &p) const
        {
            const Eigen::Vector2d u = (p - origin_) / res_;
            return u.x() >= 0.0 && u.y() >= 0.0 && u.x() <= w_ && u.y() <= h_;
        }

        /// Bilinear interpolation between the four surrounding cell centers.
        /// The gradient is the exact gradient of the bilinear patch. Queries
        /// outside the lattice of cell centers clamp to the border.
        EsdfSample query(const Eigen::Vector2d &p) const
        {
            EsdfSample out;
            out.out_of_bounds = !contains(p);
            const double ux = (p.x() - origin_.x()) / res_ - 0.5;
            const double uy = (p.y() - origin_.y()) / res_ - 0.5;

            auto axis = [](double u, int n, int &i0, int &i1, double &f, bool &clamped)
            {
                clamped = false;
                if (n == 1 || u <= 0.0)
                {
                    i0 = i1 = 0;
                    f = 0.0;
                    clamped = true;
                    return;
                }
                if (u >= n - 1)
                {
                    i0 = i1 = n - 1;
                    f = 0.0;
                    clamped = true;
                    return;
                }
                i0 = static_cast<int>(std::floor(u));
                i1 = i0 + 1;
                f = u - i0;
            };

            int x0, x1, y0, y1;
            double fx, fy;
            bool cx, cy;
            axis(ux, w_, x0, x1, fx, cx);
            axis(uy, h_, y0, y1, fy, cy);

            const double v00 = at(x0, y0), v10 = at(x1, y0), v01 = at(x0, y1), v11 = at(x1, y1);
            out.distance = (1.0 - fx) * (1.0 - fy) * v00 + fx * (1.0 - fy) * v10 + (1.0 - fx) * fy * v01 +
                           fx * fy * v11;
            if (!cx)
                out.gradient.x() = ((1.0 - fy) * (v10 - v00) + fy * (v11 - v01)) / res_;
            if (!cy)
                out.gradient.y() = ((1.0 - fx) * (v01 - v00) + fx * (v11 - v10)) / res_;
            return out;
        }

        // Row-major CSV, top row = largest y.
        void dumpCsv(std::ostream &os) const
        {
            for (int j = h_ - 1; j >= 0; --j)
            {
                for (int i = 0; i < w_; ++i)
                {
                    if (i)
                        os << ',';
                    os << at(i, j);
                }
                os << '\n';
            }
        }

    private:
        std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * w_ + i; }

        Eigen::Vector2d origin_ = Eigen::Vector2d::Zero();
        double res_ = 0.1;
        int w_ = 0, h_ = 0;
        std::vector<double> dist_;
        std::vector<unsigned char> occ_;
    };

    namespace detail
    {
        // 1D squared distance transform (lower envelope of parabolas).
        inline void edt1d(const double *f, double *d, int n, int *v, double *z)
        {
            int k = 0;
            v[0] = 0;
            z[0] = -kInf;
            z[1] = kInf;
            for (int q = 1; q < n; ++q)
            {
                if (f[q] == kInf)
                    continue;
                if (f[v[k]] == kInf)
                {
                    v[k] = q;
                    continue;
                }
                double s;
                while (true)
                {
                    s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
                    if (s <= z[k] && k > 0)
                        --k;
                    else
                        break;
                }
                ++k;
                v[k] = q;
                z[k] = s;
                z[k + 1] = kInf;
            }
            k = 0;
            for (int q = 0; q < n; ++q)
            {
                while (z[k + 1] < q)
                    ++k;
                const double dq = q - v[k];
                d[q] = f[v[k]] == kInf ? kInf : dq * dq + f[v[k]];
            }
        }

        // Squared distance (in cells) from every cell to the nearest cell with
        // mask == target. Cells with no such target anywhere get +inf.
        inline std::vector<double> squaredEdt(const std::vector<unsigned char> &mask, unsigned char target,
                                              int w, int h)
        {
            std::vector<double> g(mask.size());
            for (std::size_t k = 0; k < mask.size(); ++k)
                g[k] = mask[k] == target ? 0.0 : kInf;
            const int n = std::max(w, h);
            std::vector<double> f(n), d(n), z(n + 1);
            std::vector<int> v(n);
            for (int i = 0; i < w; ++i)
            {
                for (int j = 0; j < h; ++j)
                    f[j] = g[static_cast<std::size_t>(j) * w + i];
                edt1d(f.data(), d.data(), h, v.data(), z.data());
                for (int j = 0; j < h; ++j)
                    g[static_cast<std::size_t>(j) * w + i] = d[j];
            }
            for (int j = 0; j < h; ++j)
            {
                for (int i = 0; i < w; ++i)
                    f[i] = g[static_cast<std::size_t>(j) * w + i];
                edt1d(f.data(), d.data(), w, v.data(), z.data());
                for (int i = 0; i < w; ++i)
                    g[static_cast<std::size_t>(j) * w + i] = d[i];
            }
            return g;
        }

        // Distance from p to an oriented rectangle (0 inside).
        inline double pointRectDistance(const Eigen::Vector2d &p, const Footprint &f)
        {
            const double c = std::cos(f.yaw), s = std::sin(f.yaw);
            const Eigen::Vector2d d = p - f.center;
            const Eigen::Vector2d local(c * d.x() + s * d.y(), -s * d.x() + c * d.y());
            const Eigen::Vector2d q = (local.cwiseAbs() - f.half).cwiseMax(0.0);
            return q.norm();
        }
    } // namespace detail

    /// Rasterizes the inflated obstacle footprints and runs an exact
    /// Euclidean distance transform on cell centers in both directions:
    /// signed distance = distance to nearest occupied cell - distance to
    /// nearest free cell. Only obstacles whose bottom lies below max_z are
    /// rasterized.
    inline GridEsdf buildGridEsdf(const Scenario &sc, double resolution, double inflation, double max_z = kInf)
    {
        if (!(resolution > 0.0))
            throw InputError("ESDF resolution must be positive");
        if (inflation < 0.0)
            throw InputError("ESDF inflation must be non-negative");
        const int w = std::max(1, static_cast<int>(std::ceil(sc.room.width() / resolution - 1e-9)));
        const int h = std::max(1, static_cast<int>(std::ceil(sc.room.height() / resolution - 1e-9)));
        GridEsdf g(Eigen::Vector2d(sc.room.xmin, sc.room.ymin), resolution, w, h);

        std::vector<unsigned char> occ(static_cast<std::size_t>(w) * h, 0);
        for (const auto &b : sc.obstacles)
        {
            if (b.center.z() - b.half_extents.z() >= max_z)
                continue;
            const Footprint f = footprintOf(b);
            double xmin = kInf, xmax = -kInf, ymin = kInf, ymax = -kInf;
            for (const auto &c : f.corners())
            {
                xmin = std::min(xmin, c.x());
                xmax = std::max(xmax, c.x());
                ymin = std::min(ymin, c.y());
                ymax = std::max(ymax, c.y());
            }
            const int i0 = std::max(0, static_cast<int>(std::floor((xmin - inflation - sc.room.xmin) / resolution)) - 1);
            const int i1 = std::min(w - 1, static_cast<int>(std::ceil((xmax + inflation - sc.room.xmin) / resolution)) + 1);
            const int j0 = std::max(0, static_cast<int>(std::floor((ymin - inflation - sc.room.ymin) / resolution)) - 1);
            const int j1 = std::min(h - 1, static_cast<int>(std::ceil((ymax + inflation - sc.room.ymin) / resolution)) + 1);
            for (int j = j0; j <= j1; ++j)
                for (int i = i0; i <= i1; ++i)
                    if (detail::pointRectDistance(g.cellCenter(i, j), f) <= inflation)
                        occ[static_cast<std::size_t>(j) * w + i] = 1;
        }

        const auto to_occ = detail::squaredEdt(occ, 1, w, h);
        const auto to_free = detail::squaredEdt(occ, 0, w, h);
        const double cap = std::hypot(double(w), double(h));
        for (int j = 0; j < h; ++j)
            for (int i = 0; i < w; ++i)
            {
                const std::size_t k = static_cast<std::size_t>(j) * w + i;
                const double out = to_occ[k] == kInf ? cap : std::sqrt(to_occ[k]);
                const double in = to_free[k] == kInf ? cap : std::sqrt(to_free[k]);
                g.setOccupied(i, j, occ[k] != 0);
                g.at(i, j) = (occ[k] ? -in : out) * resolution;
            }
        return g;
    }

} // namespace wbp::world

#endif
