#ifndef WBPLAN_WORLD_SCENARIO_HPP
#define WBPLAN_WORLD_SCENARIO_HPP

#include "wbplan/common.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace wbp::world
{
    enum class ObstacleKind
    {
        DeskTop,
        DeskLeg,
        Cuboid,
        Wall
    };

    inline const char *toString(ObstacleKind k)
    {
        switch (k)
        {
        case ObstacleKind::DeskTop:
            return "desk_top";
        case ObstacleKind::DeskLeg:
            return "desk_leg";
        case ObstacleKind::Cuboid:
            return "cuboid";
        case ObstacleKind::Wall:
            return "wall";
        }
        return "cuboid";
    }

    inline ObstacleKind kindFromString(const std::string &s)
    {
        if (s == "desk_top")
            return ObstacleKind::DeskTop;
        if (s == "desk_leg")
            return ObstacleKind::DeskLeg;
        if (s == "cuboid")
            return ObstacleKind::Cuboid;
        if (s == "wall")
            return ObstacleKind::Wall;
        throw InputError("unknown obstacle kind '" + s + "'");
    }

    // Box rotated about the vertical axis by yaw.
    struct BoxObstacle
    {
        Eigen::Vector3d center = Eigen::Vector3d::Zero();
        Eigen::Vector3d half_extents = Eigen::Vector3d::Constant(0.5);
        double yaw = 0.0;
        ObstacleKind kind = ObstacleKind::Cuboid;
    };

    struct Room
    {
        double xmin = 0.0, ymin = 0.0, xmax = 35.0, ymax = 15.0;

        double width() const { return xmax - xmin; }
        double height() const { return ymax - ymin; }
    };

    struct Scenario
    {
        Room room;
        std::vector<BoxObstacle> obstacles;
        std::uint64_t seed = 0;
    };

    struct Range
    {
        double lo = 0.0, hi = 0.0;
    };

    struct ScenarioParams
    {
        double room_width = 35.0;
        double room_height = 15.0;
        int desk_grids = 30;
        int cuboids = 60;
        Range desk_size{0.75, 1.25};
        Range desk_height{0.5, 1.5};
        Range cuboid_size{0.2, 0.8};
        Range cuboid_height{0.4, 1.5};
        int max_desks_per_row = 3;
        double desk_top_thickness = 0.04;
        double desk_leg_size = 0.05;
        double wall_thickness = 0.2;
        double wall_height = 2.0;
        // Minimum free gap between footprints of distinct grids/cuboids.
        double min_gap = 0.0;
        // Rejection-sampling attempts per placed object.
        int max_attempts = 2000;
    };

    class PlacementError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Oriented rectangle in the plane (obstacle footprint).
    struct Footprint
    {
        Eigen::Vector2d center;
        Eigen::Vector2d half;
        double yaw = 0.0;

        std::array<Eigen::Vector2d, 4> corners() const
        {
            const double c = std::cos(yaw), s = std::sin(yaw);
            const Eigen::Vector2d ax(c, s), ay(-s, c);
            return {center + half.x() * ax + half.y() * ay, center - half.x() * ax + half.y() * ay,
                    center - half.x() * ax - half.y() * ay, center + half.x() * ax - half.y() * ay};
        }
    };

    inline Footprint footprintOf(const BoxObstacle &b)
    {
        return {b.center.head<2>(), b.half_extents.head<2>(), b.yaw};
    }

    // Signed penetration depth along the best separating axis; positive means
    // the interiors overlap.
    inline double footprintOverlap(const Footprint &a, const Footprint &b)
    {
        double best = kInf;
        for (const Footprint *f : {&a, &b})
        {
            const double c = std::cos(f->yaw), s = std::sin(f->yaw);
            for (const Eigen::Vector2d axis : {Eigen::Vector2d(c, s), Eigen::Vector2d(-s, c)})
            {
                double amin = kInf, amax = -kInf, bmin = kInf, bmax = -kInf;
                for (const auto &p : a.corners())
                {
                    const double d = axis.dot(p);
                    amin = std::min(amin, d);
                    amax = std::max(amax, d);
                }
                for (const auto &p : b.corners())
                {
                    const double d = axis.dot(p);
                    bmin = std::min(bmin, d);
                    bmax = std::max(bmax, d);
                }
                best = std::min(best, std::min(amax, bmax) - std::max(amin, bmin));
            }
        }
        return best;
    }

    namespace detail
    {
        inline bool insideInterior(const Footprint &f, const Room &room, double margin)
        {
            for (const auto &p : f.corners())
            {
                if (p.x() < room.xmin + margin || p.x() > room.xmax - margin ||
                    p.y() < room.ymin + margin || p.y() > room.ymax - margin)
                    return false;
            }
            return true;
        }

        inline void addDesk(std::vector<BoxObstacle> &out, const Eigen::Vector2d &c, double sx, double sy,
                            double h, const ScenarioParams &prm)
        {
            const double t = prm.desk_top_thickness;
            const double leg = prm.desk_leg_size;
            BoxObstacle top;
            top.center = Eigen::Vector3d(c.x(), c.y(), h - 0.5 * t);
            top.half_extents = Eigen::Vector3d(0.5 * sx, 0.5 * sy, 0.5 * t);
            top.kind = ObstacleKind::DeskTop;
            out.push_back(top);
            const double lx = 0.5 * sx - 0.5 * leg, ly = 0.5 * sy - 0.5 * leg;
            const double lh = 0.5 * (h - t);
            for (const auto &[ox, oy] : {std::pair{1.0, 1.0}, {-1.0, 1.0}, {-1.0, -1.0}, {1.0, -1.0}})
            {
                BoxObstacle b;
                b.center = Eigen::Vector3d(c.x() + ox * lx, c.y() + oy * ly, lh);
                b.half_extents = Eigen::Vector3d(0.5 * leg, 0.5 * leg, lh);
                b.kind = ObstacleKind::DeskLeg;
                out.push_back(b);
            }
        }
    } // namespace detail

    inline std::vector<BoxObstacle> makeWalls(const Room &room, double thickness, double height)
    {
        std::vector<BoxObstacle> walls;
        const double cx = 0.5 * (room.xmin + room.xmax), cy = 0.5 * (room.ymin + room.ymax);
        const double hw = 0.5 * room.width() + thickness, hh = 0.5 * room.height() + thickness;
        const double ht = 0.5 * thickness, hz = 0.5 * height;
        auto wall = [&](double x, double y, double ax, double ay)
        {
            BoxObstacle b;
            b.center = Eigen::Vector3d(x, y, hz);
            b.half_extents = Eigen::Vector3d(ax, ay, hz);
            b.kind = ObstacleKind::Wall;
            walls.push_back(b);
        };
        wall(cx, room.ymin, hw, ht);
        wall(cx, room.ymax, hw, ht);
        wall(room.xmin, cy, ht, hh);
        wall(room.xmax, cy, ht, hh);
        return walls;
    }

    /// Procedurally builds a walled room cluttered with desk grids and
    /// cuboids. Desk grids are one or two rows (or columns) of side-by-side
    /// desks sharing one size; each desk is a top slab on four legs.
    /// Placement uses rejection sampling on 2D footprints so that no two
    /// grids/cuboids overlap and nothing sits under a desk top.
    inline Scenario generateScenario(const ScenarioParams &prm, std::uint64_t seed)
    {
        if (prm.room_width <= 0.0 || prm.room_height <= 0.0)
            throw InputError("room dimensions must be positive");
        Scenario sc;
        sc.seed = seed;
        sc.room = Room{0.0, 0.0, prm.room_width, prm.room_height};
        sc.obstacles = makeWalls(sc.room, prm.wall_thickness, prm.wall_height);

        Rng rng(seed);
        std::vector<Footprint> placed;
        const double wall_margin = 0.5 * prm.wall_thickness;

        auto collides = [&](const Footprint &f)
        {
            for (const auto &p : placed)
                if (footprintOverlap(f, p) > -prm.min_gap + 1e-9)
                    return true;
            return false;
        };

        for (int g = 0; g < prm.desk_grids; ++g)
        {
            bool ok = false;
            for (int attempt = 0; attempt < prm.max_attempts && !ok; ++attempt)
            {
                const int rows = rng.uniformInt(1, 2);
                const int per_row = rng.uniformInt(1, prm.max_desks_per_row);
                const bool along_x = rng.uniform() < 0.5;
                const double sx = rng.uniform(prm.desk_size.lo, prm.desk_size.hi);
                const double sy = rng.uniform(prm.desk_size.lo, prm.desk_size.hi);
                const double h = rng.uniform(prm.desk_height.lo, prm.desk_height.hi);
                const int nx = along_x ? per_row : rows;
                const int ny = along_x ? rows : per_row;
                Footprint f;
                f.half = Eigen::Vector2d(0.5 * nx * sx, 0.5 * ny * sy);
                f.center = Eigen::Vector2d(rng.uniform(sc.room.xmin, sc.room.xmax),
                                           rng.uniform(sc.room.ymin, sc.room.ymax));
                if (!detail::insideInterior(f, sc.room, wall_margin) || collides(f))
                    continue;
                for (int ix = 0; ix < nx; ++ix)
                    for (int iy = 0; iy < ny; ++iy)
                    {
                        const Eigen::Vector2d c(f.center.x() - f.half.x() + (ix + 0.5) * sx,
                                                f.center.y() - f.half.y() + (iy + 0.5) * sy);
                        detail::addDesk(sc.obstacles, c, sx, sy, h, prm);
                    }
                placed.push_back(f);
                ok = true;
            }
            if (!ok)
                throw PlacementError("desk grid placement exceeded retry cap");
        }

        for (int k = 0; k < prm.cuboids; ++k)
        {
            bool ok = false;
            for (int attempt = 0; attempt < prm.max_attempts && !ok; ++attempt)
            {
                BoxObstacle b;
                b.kind = ObstacleKind::Cuboid;
                const double sx = rng.uniform(prm.cuboid_size.lo, prm.cuboid_size.hi);
                const double sy = rng.uniform(prm.cuboid_size.lo, prm.cuboid_size.hi);
                const double sz = rng.uniform(prm.cuboid_height.lo, prm.cuboid_height.hi);
                b.yaw = rng.uniform(-kPi, kPi);
                b.half_extents = Eigen::Vector3d(0.5 * sx, 0.5 * sy, 0.5 * sz);
                b.center = Eigen::Vector3d(rng.uniform(sc.room.xmin, sc.room.xmax),
                                           rng.uniform(sc.room.ymin, sc.room.ymax), 0.5 * sz);
                const Footprint f = footprintOf(b);
                if (!detail::insideInterior(f, sc.room, wall_margin) || collides(f))
                    continue;
                sc.obstacles.push_back(b);
                placed.push_back(f);
                ok = true;
            }
            if (!ok)
                throw PlacementError("cuboid placement exceeded retry cap");
        }
        return sc;
    }

    // ---------------------------------------------------------------- JSON

    inline void to_json(nlohmann::json &j, const BoxObstacle &b)
    {
        j = nlohmann::json{{"center", {b.center.x(), b.center.y(), b.center.z()}},
                           {"half_extents", {b.half_extents.x(), b.half_extents.y(), b.half_extents.z()}},
                           {"yaw", b.yaw},
                           {"kind", toString(b.kind)}};
    }

    inline void from_json(const nlohmann::json &j, BoxObstacle &b)
    {
        const auto c = j.at("center").get<std::vector<double>>();
        const auto h = j.at("half_extents").get<std::vector<double>>();
        if (c.size() != 3 || h.size() != 3)
            throw InputError("obstacle center/half_extents must have 3 entries");
        b.center = Eigen::Vector3d(c[0], c[1], c[2]);
        b.half_extents = Eigen::Vector3d(h[0], h[1], h[2]);
        if ((b.half_extents.array() <= 0.0).any())
            throw InputError("obstacle half_extents must be positive");
        b.yaw = j.value("yaw", 0.0);
        b.kind = kindFromString(j.value("kind", std::string("cuboid")));
    }

    inline void to_json(nlohmann::json &j, const Scenario &s)
    {
        j = nlohmann::json{{"room", {s.room.xmin, s.room.ymin, s.room.xmax, s.room.ymax}},
                           {"obstacles", s.obstacles},
                           {"seed", s.seed}};
    }

    inline void from_json(const nlohmann::json &j, Scenario &s)
    {
        const auto r = j.at("room").get<std::vector<double>>();
        if (r.size() != 4 || !(r[2] > r[0]) || !(r[3] > r[1]))
            throw InputError("room must be [xmin, ymin, xmax, ymax] with positive extent");
        s.room = Room{r[0], r[1], r[2], r[3]};
        s.obstacles = j.at("obstacles").get<std::vector<BoxObstacle>>();
        s.seed = j.value("seed", std::uint64_t{0});
    }

    inline void to_json(nlohmann::json &j, const ScenarioParams &p)
    {
        j = nlohmann::json{{"room_width", p.room_width},
                           {"room_height", p.room_height},
                           {"desk_grids", p.desk_grids},
                           {"cuboids", p.cuboids},
                           {"desk_size", {p.desk_size.lo, p.desk_size.hi}},
                           {"desk_height", {p.desk_height.lo, p.desk_height.hi}},
                           {"cuboid_size", {p.cuboid_size.lo, p.cuboid_size.hi}},
                           {"cuboid_height", {p.cuboid_height.lo, p.cuboid_height.hi}},
                           {"max_desks_per_row", p.max_desks_per_row},
                           {"min_gap", p.min_gap},
                           {"max_attempts", p.max_attempts}};
    }

    inline void from_json(const nlohmann::json &j, ScenarioParams &p)
    {
        auto range = [&](const char *key, Range &r)
        {
            if (!j.contains(key))
                return;
            const auto v = j.at(key).get<std::vector<double>>();
            if (v.size() != 2 || v[0] > v[1])
                throw InputError(std::string("scenario param '") + key + "' must be [lo, hi]");
            r = Range{v[0], v[1]};
        };
        p.room_width = j.value("room_width", p.room_width);
        p.room_height = j.value("room_height", p.room_height);
        p.desk_grids = j.value("desk_grids", p.desk_grids);
        p.cuboids = j.value("cuboids", p.cuboids);
        range("desk_size", p.desk_size);
        range("desk_height", p.desk_height);
        range("cuboid_size", p.cuboid_size);
        range("cuboid_height", p.cuboid_height);
        p.max_desks_per_row = j.value("max_desks_per_row", p.max_desks_per_row);
        p.min_gap = j.value("min_gap", p.min_gap);
        p.max_attempts = j.value("max_attempts", p.max_attempts);
    }

} // namespace wbp::world

#endif
