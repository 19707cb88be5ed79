#include "fracnls/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "fracnls/errors.hpp"
#include "fracnls/kernels.hpp"

namespace fracnls {

double cube_distance(const Point& p, const Cube& cube) {
    double acc = 0.0;
    for (int d = 0; d < 3; ++d) {
        const double excess = std::abs(p[d] - cube.center[d]) - cube.half_width;
        if (excess > 0.0) acc += excess * excess;
    }
    return std::sqrt(acc);
}

double depth_in_cube(const Point& p, const Cube& cube, int dim) {
    if (cube_distance(p, cube) > 0.0) return 0.0;
    double depth = cube.half_width;
    for (int d = 0; d < dim; ++d) {
        depth = std::min(depth, cube.half_width - std::abs(p[d] - cube.center[d]));
    }
    return depth;
}

Point barycenter(const Field& u) {
    const auto m = kernels::moments(u.grid, u.span());
    if (!(m[0] > 0.0)) throw Error(ErrorKind::TrivialComponent, "barycenter: field vanishes");
    Point out{0.0, 0.0, 0.0};
    for (int d = 0; d < u.grid.dim; ++d) out[d] = m[d + 1] / m[0];
    return out;
}

BarycenterReport locate(const Field& u) {
    BarycenterReport r;
    r.point = barycenter(u);
    const auto& g = u.grid;
    double edge = 0.0, total = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double m = u[i] * u[i];
        total += m;
        const auto idx = g.unflatten(i);
        for (int d = 0; d < g.dim; ++d)
            if (idx[d] <= 1 || idx[d] >= g.points_per_dim - 1) {
                edge += m;
                break;
            }
    }
    r.boundary_mass_fraction = edge / total;
    r.reliable = r.boundary_mass_fraction <= 1e-3;
    return r;
}

std::pair<Point, double> separation(const Field& u, const Field& v) {
    require_same_grid(u, v, "separation");
    const Point h = barycenter(u) - barycenter(v);
    return {h, norm(h)};
}

double concentration_mass(const Field& u, const Point& center, double R, double eps, double power) {
    const auto& g = u.grid;
    const double radius = eps * R;
    for (int d = 0; d < g.dim; ++d)
        if (center[d] - radius < -g.half_width || center[d] + radius > g.half_width)
            throw Error(ErrorKind::BallOutsideBox, "concentration_mass: ball leaves the grid box");
    const double h = g.spacing;
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double x = std::max(u[i], 0.0);
        if (x == 0.0) continue;
        const double r = norm(g.node(i) - center);
        const double weight = std::clamp((radius - r) / h + 0.5, 0.0, 1.0);
        if (weight > 0.0) acc += weight * std::pow(x, power);
    }
    return acc * g.cell_volume() / std::pow(eps, g.dim);
}

}  // namespace fracnls
