#include "fracnls/grid.hpp"

#include <algorithm>
#include <string>

#include "fracnls/errors.hpp"

namespace fracnls {

std::size_t GridSpec::size() const {
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(points_per_dim);
    return total;
}

std::array<int, 3> GridSpec::unflatten(std::size_t flat) const {
    std::array<int, 3> idx{0, 0, 0};
    const auto n = static_cast<std::size_t>(points_per_dim);
    for (int d = dim - 1; d >= 0; --d) {
        idx[d] = static_cast<int>(flat % n);
        flat /= n;
    }
    return idx;
}

Point GridSpec::node(std::size_t flat) const {
    const auto idx = unflatten(flat);
    Point p{0.0, 0.0, 0.0};
    for (int d = 0; d < dim; ++d) p[d] = coordinate(idx[d]);
    return p;
}

GridSpec make_grid(int dim, double half_width, int points_per_dim) {
    if (dim < 1 || dim > 3)
        throw Error(ErrorKind::InvalidGrid, "dim must be 1, 2 or 3 (got " + std::to_string(dim) + ")");
    if (!(half_width > 0.0) || !std::isfinite(half_width))
        throw Error(ErrorKind::InvalidGrid, "half_width must be positive and finite");
    const bool pow2 = points_per_dim > 0 && (points_per_dim & (points_per_dim - 1)) == 0;
    if (points_per_dim < 16 || !pow2)
        throw Error(ErrorKind::InvalidGrid, "points_per_dim must be a power of two >= 16 (got " +
                                                std::to_string(points_per_dim) + ")");
    GridSpec g;
    g.dim = dim;
    g.half_width = half_width;
    g.points_per_dim = points_per_dim;
    // n is a power of two, so 2L/n is exact and spacing * n == 2L holds bitwise.
    g.spacing = 2.0 * half_width / points_per_dim;
    return g;
}

Field Field::from_function(const GridSpec& g, const std::function<double(const Point&)>& f) {
    Field out(g);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = f(g.node(i));
    return out;
}

void require_same_grid(const Field& a, const Field& b, const char* where) {
    if (!(a.grid == b.grid)) throw Error(ErrorKind::GridMismatch, std::string(where) + ": fields live on different grids");
}

Field& Field::operator+=(const Field& other) {
    require_same_grid(*this, other, "Field::operator+=");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += other.values[i];
    return *this;
}

Field& Field::operator-=(const Field& other) {
    require_same_grid(*this, other, "Field::operator-=");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= other.values[i];
    return *this;
}

Field& Field::operator*=(double s) {
    for (auto& v : values) v *= s;
    return *this;
}

double Field::max_value() const { return *std::max_element(values.begin(), values.end()); }
double Field::min_value() const { return *std::min_element(values.begin(), values.end()); }

double Field::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

bool Field::all_finite() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

}  // namespace fracnls
