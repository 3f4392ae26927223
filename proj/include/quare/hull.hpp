#pragma once

#include <vector>

namespace quare::geometry {

struct HullVolume {
    double volume = 0.0;
    bool degenerate = false;
};

// Volume of the convex hull of `points` in R^d via incremental
// beneath-beyond construction: start from a d-simplex of affinely
// independent points, then add the volume of the pyramid over every facet
// visible from each inserted point while rebuilding the horizon.
//
// Fewer than d+1 distinct points, or an affinely dependent set, yields
// (0, degenerate=true). Points on the current hull boundary contribute no
// volume and are skipped.
HullVolume convex_hull_volume(const std::vector<std::vector<double>>& points, int dim);

} // namespace quare::geometry
