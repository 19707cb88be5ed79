#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fracnls/errors.hpp"
#include "fracnls/geometry.hpp"
#include "fracnls/spectral.hpp"

using namespace fracnls;
using std::numbers::pi;

TEST_CASE("cube distance against a sampling oracle") {
    const Cube cube{{0.5, -1.0, 2.0}, 0.75};
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> pos(-4, 4), unit(-1, 1);
    for (int trial = 0; trial < 30; ++trial) {
        const Point p{pos(rng), pos(rng), pos(rng)};
        // Dense sampling of the closed cube; the minimum over samples is an upper bound that
        // converges from above.
        double best = INFINITY;
        const int m = 40;
        for (int a = 0; a <= m; ++a)
            for (int b = 0; b <= m; ++b)
                for (int c = 0; c <= m; ++c) {
                    const Point q{cube.center[0] + cube.half_width * (2.0 * a / m - 1),
                                  cube.center[1] + cube.half_width * (2.0 * b / m - 1),
                                  cube.center[2] + cube.half_width * (2.0 * c / m - 1)};
                    best = std::min(best, norm(p - q));
                }
        const double d = cube_distance(p, cube);
        CHECK(d <= best + 1e-12);
        CHECK(d >= best - 2 * cube.half_width / m * std::sqrt(3.0));
    }
    CHECK(cube_distance(cube.center, cube) == 0.0);
}

TEST_CASE("barycenter is equivariant under grid translations") {
    const GridSpec g = make_grid(2, 10.0, 64);
    const Field u = Field::from_function(g, [](const Point& x) {
        return std::exp(-((x[0] - 1) * (x[0] - 1) + 2 * (x[1] + 0.5) * (x[1] + 0.5)));
    });
    const Point c0 = barycenter(u);
    const int shift = 7;
    Field w(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto idx = g.unflatten(k);
        const int i = (idx[0] - shift + 64) % 64;
        w[k] = u[static_cast<std::size_t>(i) * 64 + idx[1]];
    }
    const Point c1 = barycenter(w);
    CHECK(c1[0] - c0[0] == doctest::Approx(shift * g.spacing).epsilon(1e-13));
    CHECK(c1[1] == doctest::Approx(c0[1]).epsilon(1e-13));
    CHECK_THROWS_AS(barycenter(Field(g)), Error);
}

TEST_CASE("barycenter of a symmetric gaussian and separation") {
    const GridSpec g = make_grid(1, 20.0, 512);
    const Field u = Field::from_function(g, [](const Point& x) { return std::exp(-(x[0] - 2) * (x[0] - 2)); });
    const Field v = Field::from_function(g, [](const Point& x) { return std::exp(-(x[0] + 1) * (x[0] + 1)); });
    CHECK(barycenter(u)[0] == doctest::Approx(2.0).epsilon(1e-12));
    const auto [h, len] = separation(u, v);
    CHECK(h[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(len == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(locate(u).reliable);
}

TEST_CASE("mass near the box edge makes the barycenter unreliable") {
    const GridSpec g = make_grid(1, 10.0, 256);
    const Field u = Field::from_function(g, [](const Point& x) { return std::exp(-(x[0] + 10) * (x[0] + 10)); });
    CHECK_FALSE(locate(u).reliable);
}

TEST_CASE("concentration mass against a quadrature oracle") {
    // int_{-a}^{a} sech^4(y) dy = 2 (tanh a - tanh^3 a / 3); with eps the ball radius scales.
    const GridSpec g = make_grid(1, 30.0, 4096);
    for (double eps : {1.0, 0.5}) {
        const Field u = Field::from_function(g, [&](const Point& x) { return 1 / std::cosh(x[0] / eps); });
        const double R = 2.0, a = R;
        const double exact = 2 * (std::tanh(a) - std::pow(std::tanh(a), 3) / 3);
        CHECK(concentration_mass(u, {0, 0, 0}, R, eps, 4.0) == doctest::Approx(exact).epsilon(1e-4));
    }
    CHECK_THROWS_AS(concentration_mass(Field(g, 1.0), {0, 0, 0}, 40.0, 1.0, 4.0), Error);
}

TEST_CASE("depth inside a cube") {
    const Cube c{{0, 0, 0}, 1.0};
    CHECK(depth_in_cube({0.25, 0, 0}, c, 1) == doctest::Approx(0.75));
    CHECK(depth_in_cube({0.25, 0.9, 0}, c, 2) == doctest::Approx(0.1));
    CHECK(depth_in_cube({1.5, 0, 0}, c, 1) == 0.0);
}
