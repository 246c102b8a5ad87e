#include "babbler/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace babbler {

namespace {

double cross(const formant_pair& o, const formant_pair& a, const formant_pair& b)
{
    return (a.f1 - o.f1) * (b.f2 - o.f2) - (a.f2 - o.f2) * (b.f1 - o.f1);
}

}  // namespace

std::vector<formant_pair> convex_hull(std::vector<formant_pair> pts)
{
    std::sort(pts.begin(), pts.end(), [](const formant_pair& a, const formant_pair& b) {
        return a.f1 < b.f1 || (a.f1 == b.f1 && a.f2 < b.f2);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const formant_pair& a, const formant_pair& b) { return a.f1 == b.f1 && a.f2 == b.f2; }),
              pts.end());
    if (pts.size() < 3)
        return pts;

    std::vector<formant_pair> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0)
            --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0)
            --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

std::vector<formant_pair> expand_polygon(std::span<const formant_pair> hull, double factor)
{
    if (hull.empty())
        return {};
    formant_pair c{0.0, 0.0};
    for (const auto& p : hull) {
        c.f1 += p.f1;
        c.f2 += p.f2;
    }
    c.f1 /= static_cast<double>(hull.size());
    c.f2 /= static_cast<double>(hull.size());
    std::vector<formant_pair> out;
    for (const auto& p : hull)
        out.push_back({c.f1 + (1.0 + factor) * (p.f1 - c.f1), c.f2 + (1.0 + factor) * (p.f2 - c.f2)});
    return out;
}

bool polygon_contains(std::span<const formant_pair> poly, const formant_pair& p, double eps)
{
    if (poly.empty())
        return false;
    if (poly.size() == 1)
        return std::abs(poly[0].f1 - p.f1) <= eps && std::abs(poly[0].f2 - p.f2) <= eps;
    if (poly.size() == 2) {
        const auto& a = poly[0];
        const auto& b = poly[1];
        const double len = std::hypot(b.f1 - a.f1, b.f2 - a.f2);
        if (std::abs(cross(a, b, p)) > eps * std::max(1.0, len))
            return false;
        const double t = ((p.f1 - a.f1) * (b.f1 - a.f1) + (p.f2 - a.f2) * (b.f2 - a.f2)) / (len * len);
        return t >= -eps && t <= 1.0 + eps;
    }
    for (std::size_t i = 0; i < poly.size(); ++i)
        if (cross(poly[i], poly[(i + 1) % poly.size()], p) < -eps)
            return false;
    return true;
}

}  // namespace babbler
