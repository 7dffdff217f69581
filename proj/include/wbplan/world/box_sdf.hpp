#ifndef WBPLAN_WORLD_BOX_SDF_HPP
#define WBPLAN_WORLD_BOX_SDF_HPP

#include "wbplan/world/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace wbp::world
{
    struct SdfSample
    {
        double distance = kInf;
        Eigen::Vector3d gradient = Eigen::Vector3d::Zero();
        int obstacle = -1;
    };

    // Exact signed distance to one yaw-rotated box.
    inline SdfSample boxSignedDistance(const BoxObstacle &b, const Eigen::Vector3d &p)
    {
        const double c = std::cos(b.yaw), s = std::sin(b.yaw);
        const Eigen::Vector3d d = p - b.center;
        const Eigen::Vector3d local(c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z());
        const Eigen::Vector3d q = local.cwiseAbs() - b.half_extents;
        Eigen::Vector3d g_local = Eigen::Vector3d::Zero();
        SdfSample out;
        if ((q.array() > 0.0).any())
        {
            const Eigen::Vector3d v = q.cwiseMax(0.0);
            out.distance = v.norm();
            for (int k = 0; k < 3; ++k)
                g_local(k) = (local(k) < 0.0 ? -1.0 : 1.0) * v(k) / out.distance;
        }
        else
        {
            int k;
            out.distance = q.maxCoeff(&k);
            g_local(k) = local(k) < 0.0 ? -1.0 : 1.0;
        }
        out.gradient = Eigen::Vector3d(c * g_local.x() - s * g_local.y(), s * g_local.x() + c * g_local.y(),
                                       g_local.z());
        return out;
    }

    /// Analytic signed distance over all box primitives of a scenario.
    /// Immutable after construction. A coarse 2D bucket index over footprint
    /// bounding boxes serves the cutoff-limited queries used in the optimizer.
    class BoxSdf
    {
    public:
        BoxSdf() = default;

        explicit BoxSdf(const Scenario &sc, double bucket_size = 1.0)
            : boxes_(sc.obstacles), bucket_(bucket_size)
        {
            lo_ = Eigen::Vector2d(sc.room.xmin, sc.room.ymin);
            for (const auto &b : boxes_)
            {
                for (const auto &c : footprintOf(b).corners())
                    lo_ = lo_.cwiseMin(c);
            }
            Eigen::Vector2d hi(sc.room.xmax, sc.room.ymax);
            for (const auto &b : boxes_)
                for (const auto &c : footprintOf(b).corners())
                    hi = hi.cwiseMax(c);
            nx_ = std::max(1, static_cast<int>(std::ceil((hi.x() - lo_.x()) / bucket_)));
            ny_ = std::max(1, static_cast<int>(std::ceil((hi.y() - lo_.y()) / bucket_)));
            cells_.assign(static_cast<std::size_t>(nx_) * ny_, {});
            for (int k = 0; k < static_cast<int>(boxes_.size()); ++k)
            {
                Eigen::Vector2d bmin = Eigen::Vector2d::Constant(kInf), bmax = -bmin;
                for (const auto &c : footprintOf(boxes_[k]).corners())
                {
                    bmin = bmin.cwiseMin(c);
                    bmax = bmax.cwiseMax(c);
                }
                const int i0 = cellX(bmin.x()), i1 = cellX(bmax.x());
                const int j0 = cellY(bmin.y()), j1 = cellY(bmax.y());
                for (int j = j0; j <= j1; ++j)
                    for (int i = i0; i <= i1; ++i)
                        cells_[static_cast<std::size_t>(j) * nx_ + i].push_back(k);
            }
        }

        const std::vector<BoxObstacle> &boxes() const { return boxes_; }

        /// Minimum over every obstacle; ties keep the lowest index.
        SdfSample query(const Eigen::Vector3d &p) const
        {
            SdfSample best;
            for (int k = 0; k < static_cast<int>(boxes_.size()); ++k)
            {
                SdfSample s = boxSignedDistance(boxes_[k], p);
                if (s.distance < best.distance)
                {
                    best = s;
                    best.obstacle = k;
                }
            }
            return best;
        }

        /// Exact whenever the true distance is below cutoff. Otherwise returns
        /// a distance >= cutoff with obstacle = -1 and zero gradient.
        SdfSample queryNear(const Eigen::Vector3d &p, double cutoff) const
        {
            SdfSample best;
            best.distance = cutoff;
            const int i0 = cellX(p.x() - cutoff), i1 = cellX(p.x() + cutoff);
            const int j0 = cellY(p.y() - cutoff), j1 = cellY(p.y() + cutoff);
            for (int j = j0; j <= j1; ++j)
                for (int i = i0; i <= i1; ++i)
                    for (int k : cells_[static_cast<std::size_t>(j) * nx_ + i])
                    {
                        SdfSample s = boxSignedDistance(boxes_[k], p);
                        if (s.distance < best.distance ||
                            (s.distance == best.distance && best.obstacle >= 0 && k < best.obstacle))
                        {
                            best = s;
                            best.obstacle = k;
                        }
                    }
            return best;
        }

    private:
        int cellX(double x) const
        {
            return std::clamp(static_cast<int>(std::floor((x - lo_.x()) / bucket_)), 0, nx_ - 1);
        }
        int cellY(double y) const
        {
            return std::clamp(static_cast<int>(std::floor((y - lo_.y()) / bucket_)), 0, ny_ - 1);
        }

        std::vector<BoxObstacle> boxes_;
        double bucket_ = 1.0;
        Eigen::Vector2d lo_ = Eigen::Vector2d::Zero();
        int nx_ = 1, ny_ = 1;
        std::vector<std::vector<int>> cells_;
    };

} // namespace wbp::world

#endif
