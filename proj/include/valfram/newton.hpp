// Newton polygons: lower convex hulls of (s, value) point sets.
#pragma once

#include "valfram/rational.hpp"
#include "valfram/value.hpp"

#include <utility>
#include <vector>

namespace valfram {

struct NewtonPolygon {
    struct Side {
        Rat slope;
        long s0;
        Rat v0;
        long s1;
        Rat v1;
    };

    std::vector<std::pair<long, Val>> points;  // one per abscissa; +inf allowed
    std::vector<std::pair<long, Rat>> hull;    // vertices, increasing abscissa
    std::vector<Side> sides;                   // increasing slope
};

// Lower convex hull of the finite points.
inline NewtonPolygon newton_polygon_from_points(std::vector<std::pair<long, Val>> pts) {
    NewtonPolygon np;
    np.points = std::move(pts);
    std::vector<std::pair<long, Rat>> fin;
    for (const auto& [s, v] : np.points)
        if (v.is_finite()) fin.emplace_back(s, v.rat());
    if (fin.empty()) return np;
    // monotone chain, keeping only the lower hull
    for (const auto& pt : fin) {
        while (np.hull.size() >= 2) {
            const auto& a = np.hull[np.hull.size() - 2];
            const auto& b = np.hull[np.hull.size() - 1];
            // drop b if it lies on or above segment a->pt
            Rat lhs = (b.second - a.second) * Rat(pt.first - a.first);
            Rat rhs = (pt.second - a.second) * Rat(b.first - a.first);
            if (lhs >= rhs)
                np.hull.pop_back();
            else
                break;
        }
        np.hull.push_back(pt);
    }
    for (std::size_t i = 0; i + 1 < np.hull.size(); ++i) {
        const auto& a = np.hull[i];
        const auto& b = np.hull[i + 1];
        Rat slope = (b.second - a.second) / Rat(b.first - a.first);
        np.sides.push_back({slope, a.first, a.second, b.first, b.second});
    }
    return np;
}

// True when the whole finite polygon is a single side of slope -lambda.
inline bool one_sided(const NewtonPolygon& np, const Rat& lambda) {
    return np.sides.size() == 1 && np.sides[0].slope == -lambda;
}

}  // namespace valfram
