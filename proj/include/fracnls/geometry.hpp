#pragma once

#include <utility>

#include "fracnls/grid.hpp"

namespace fracnls {

// Open cube prod (c_n - s, c_n + s); coordinates past the grid dimension are ignored.
struct Cube {
    Point center{0.0, 0.0, 0.0};
    double half_width = 1.0;
};

// Euclidean distance from p to the closed cube; 0 iff p is inside.
double cube_distance(const Point& p, const Cube& cube);
// Distance from an interior point to the cube boundary (0 outside).
double depth_in_cube(const Point& p, const Cube& cube, int dim);

// Mass center int x u^2 / int u^2 in grid coordinates.
Point barycenter(const Field& u);

struct BarycenterReport {
    Point point{0.0, 0.0, 0.0};
    double boundary_mass_fraction = 0.0;  // mass within one cell of the box boundary
    bool reliable = true;                 // boundary_mass_fraction <= 1e-3
};
BarycenterReport locate(const Field& u);

// h = Phi(u) - Phi(v) and |h|.
std::pair<Point, double> separation(const Field& u, const Field& v);

// eps^{-N} int_{B(center, eps R)} (u+)^power dx, with the ball edge resolved to first order per node.
double concentration_mass(const Field& u, const Point& center, double R, double eps, double power);

}  // namespace fracnls
