#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "fracnls/errors.hpp"
#include "fracnls/spectral.hpp"

using namespace fracnls;
using std::numbers::pi;

namespace {

// O(n^2) DFT of a 1-D field; returns sum_k |xi_k|^{2a} |c_k|^2 * 2L / n^2 with the
// Nyquist mode included, i.e. the same discrete seminorm by a different route.
double seminorm_direct_1d(const Field& u, double a) {
    const int n = u.grid.points_per_dim;
    const double L = u.grid.half_width;
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
        std::complex<double> c = 0.0;
        for (int m = 0; m < n; ++m) c += u[m] * std::polar(1.0, -2.0 * pi * k * m / n);
        const int kk = k <= n / 2 ? k : k - n;
        const double xi = pi * kk / L;
        total += std::pow(std::abs(xi), 2 * a) * std::norm(c);
    }
    return total * (2.0 * L) / (double(n) * n);
}

}  // namespace

TEST_CASE("plane waves are eigenfunctions with eigenvalue |xi|^{2 alpha}") {
    for (double a : {0.25, 0.5, 0.8}) {
        const GridSpec g = make_grid(1, 10.0, 64);
        const SpectralOperator op(g, a);
        const int k = 5;
        const double xi = pi * k / g.half_width;
        const Field u = Field::from_function(g, [&](const Point& x) { return std::cos(xi * x[0]); });
        const Field lu = op.apply(u);
        double err = 0.0;
        for (std::size_t m = 0; m < g.size(); ++m) err = std::max(err, std::abs(lu[m] - std::pow(xi, 2 * a) * u[m]));
        CHECK(err < 1e-13);
    }
}

TEST_CASE("2-D plane wave picks up |xi|^{2 alpha} of the full wave vector") {
    const GridSpec g = make_grid(2, 4.0, 32);
    const SpectralOperator op(g, 0.6);
    const double k1 = pi * 3 / 4.0, k2 = pi * 2 / 4.0;
    const Field u = Field::from_function(g, [&](const Point& x) { return std::sin(k1 * x[0] + k2 * x[1]); });
    const Field lu = op.apply(u);
    const double lam = std::pow(k1 * k1 + k2 * k2, 0.6);
    double err = 0.0;
    for (std::size_t m = 0; m < g.size(); ++m) err = std::max(err, std::abs(lu[m] - lam * u[m]));
    CHECK(err < 1e-12);
}

TEST_CASE("seminorm matches a direct DFT sum") {
    const GridSpec g = make_grid(1, 6.0, 64);
    const Field u = Field::from_function(g, [](const Point& x) { return std::exp(-x[0] * x[0]) * (1 + 0.3 * x[0]); });
    for (double a : {0.3, 0.5, 0.9}) {
        const SpectralOperator op(g, a);
        CHECK(seminorm_alpha_sq(op, u) == doctest::Approx(seminorm_direct_1d(u, a)).epsilon(1e-12));
    }
}

TEST_CASE("alpha = 1 seminorm of a gaussian equals the gradient energy") {
    // int |u'|^2 for exp(-x^2) is sqrt(pi/2).
    const GridSpec g = make_grid(1, 12.0, 256);
    const SpectralOperator op(g, 1.0);
    const Field u = Field::from_function(g, [](const Point& x) { return std::exp(-x[0] * x[0]); });
    CHECK(seminorm_alpha_sq(op, u) == doctest::Approx(std::sqrt(pi / 2)).epsilon(1e-12));
}

TEST_CASE("derivative and translation are spectrally exact on band-limited data") {
    const GridSpec g = make_grid(1, pi, 32);
    const SpectralOperator op(g, 0.5);
    const Field u = Field::from_function(g, [](const Point& x) { return std::sin(3 * x[0]); });
    const Field du = op.derivative(u, 0);
    const Field tu = op.translate(u, {0.37, 0, 0});
    for (std::size_t m = 0; m < g.size(); ++m) {
        const double x = g.node(m)[0];
        CHECK(du[m] == doctest::Approx(3 * std::cos(3 * x)).epsilon(1e-12).scale(1));
        CHECK(tu[m] == doctest::Approx(std::sin(3 * (x - 0.37))).epsilon(1e-12).scale(1));
    }
}

TEST_CASE("operator rejects fields on another grid") {
    const SpectralOperator op(make_grid(1, 1.0, 16), 0.5);
    CHECK_THROWS_AS(op.apply(Field(make_grid(1, 1.0, 32))), Error);
}
