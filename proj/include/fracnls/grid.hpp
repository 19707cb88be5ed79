#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fracnls {

// Points always carry three coordinates; entries past GridSpec::dim are zero.
using Point = std::array<double, 3>;

inline double norm(const Point& p) { return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]); }
inline Point operator+(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Point operator-(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Point operator*(double s, const Point& a) { return {s * a[0], s * a[1], s * a[2]}; }

// Uniform periodic tensor grid on [-L, L)^N.
struct GridSpec {
    int dim = 1;
    double half_width = 1.0;
    int points_per_dim = 16;
    double spacing = 0.125;

    std::size_t size() const;
    double cell_volume() const { return std::pow(spacing, dim); }
    double box_measure() const { return std::pow(2.0 * half_width, dim); }
    double coordinate(int index) const { return -half_width + spacing * index; }
    // Multi-index of flat node `flat` (row-major, first axis slowest).
    std::array<int, 3> unflatten(std::size_t flat) const;
    Point node(std::size_t flat) const;

    bool operator==(const GridSpec&) const = default;
};

GridSpec make_grid(int dim, double half_width, int points_per_dim);

// Real grid function; values are row-major over the grid axes.
struct Field {
    GridSpec grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const GridSpec& g) : grid(g), values(g.size(), 0.0) {}
    Field(const GridSpec& g, double fill) : grid(g), values(g.size(), fill) {}

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::span<double> span() { return values; }
    std::span<const double> span() const { return values; }

    static Field from_function(const GridSpec& g, const std::function<double(const Point&)>& f);

    Field& operator+=(const Field& other);
    Field& operator-=(const Field& other);
    Field& operator*=(double s);

    double max_value() const;
    double min_value() const;
    double max_abs() const;
    bool all_finite() const;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

// Throws GridMismatch unless both fields live on `a.grid`.
void require_same_grid(const Field& a, const Field& b, const char* where);

}  // namespace fracnls
