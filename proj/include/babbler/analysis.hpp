#pragma once

// Formant-space geometry for comparing learned vowels with ambient speech.

#include "babbler/speaker.hpp"

#include <span>
#include <vector>

namespace babbler {

/// Counter-clockwise convex hull (monotone chain); collinear points dropped.
std::vector<formant_pair> convex_hull(std::vector<formant_pair> points);

/// Each hull vertex moved away from the vertex centroid by `factor` (0.2 = +20%).
std::vector<formant_pair> expand_polygon(std::span<const formant_pair> hull, double factor);

/// True when p lies inside or on the boundary of a convex counter-clockwise polygon.
/// One- and two-point hulls degrade to point / segment membership.
bool polygon_contains(std::span<const formant_pair> polygon, const formant_pair& p, double eps = 1e-9);

}  // namespace babbler
