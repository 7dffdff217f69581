#ifndef WBPLAN_WORLD_WORLD_HPP
#define WBPLAN_WORLD_WORLD_HPP

#include "wbplan/world/box_sdf.hpp"
#include "wbplan/world/grid_esdf.hpp"
#include "wbplan/world/scenario.hpp"

namespace wbp::world
{
    // Immutable bundle of a scenario and its derived distance fields.
    struct World
    {
        Scenario scenario;
        GridEsdf esdf;
        BoxSdf sdf;

        static World build(const Scenario &sc, double resolution, double inflation)
        {
            World w;
            w.scenario = sc;
            w.esdf = buildGridEsdf(sc, resolution, inflation);
            w.sdf = BoxSdf(sc);
            return w;
        }
    };

} // namespace wbp::world

#endif
