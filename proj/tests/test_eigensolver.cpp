#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fracnls/eigensolver.hpp"

using namespace fracnls;

namespace {

// Symmetric tridiagonal Toeplitz matrix (b on the diagonal, c off it) with
// eigenvalues b + 2c cos(k pi / (n+1)).
LinearMap toeplitz(double b, double c) {
    return [b, c](std::span<const double> x, std::span<double> y) {
        const std::size_t n = x.size();
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = b * x[i];
            if (i > 0) y[i] += c * x[i - 1];
            if (i + 1 < n) y[i] += c * x[i + 1];
        }
    };
}

}  // namespace

TEST_CASE("MINRES solves an indefinite system") {
    const std::size_t n = 200;
    const auto a = toeplitz(0.3, 1.0);  // eigenvalues straddle zero
    std::vector<double> x(n), b(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(0.1 * i) + 0.01 * i;
    toeplitz(0.3, 1.0)(x, b);
    const auto res = minres(a, b, 1e-12, 2000);
    CHECK(res.converged);
    double err = 0.0, nx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        err = std::max(err, std::abs(res.x[i] - x[i]));
        nx = std::max(nx, std::abs(x[i]));
    }
    CHECK(err / nx < 1e-8);
}

TEST_CASE("Lanczos recovers the extreme eigenvalues of a Toeplitz matrix") {
    const std::size_t n = 300;
    const auto res = lanczos_largest(toeplitz(0.0, 1.0), n, 3, 300, 1e-10);
    CHECK(res.converged);
    REQUIRE(res.pairs.size() >= 3);
    std::vector<double> exact;
    for (std::size_t k = 1; k <= n; ++k) exact.push_back(2 * std::cos(k * M_PI / (n + 1)));
    std::sort(exact.begin(), exact.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
    // The spectrum is symmetric, so the top two magnitudes are +-lambda_max.
    CHECK(std::abs(res.pairs[0].value) == doctest::Approx(std::abs(exact[0])).epsilon(1e-9));
    CHECK(std::abs(res.pairs[1].value) == doctest::Approx(std::abs(exact[1])).epsilon(1e-9));
    CHECK(std::abs(res.pairs[2].value) == doctest::Approx(std::abs(exact[2])).epsilon(1e-9));
}
