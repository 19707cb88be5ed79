#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fracnls/energy.hpp"
#include "fracnls/errors.hpp"
#include "fracnls/groundstate.hpp"
#include "fracnls/nehari.hpp"

using namespace fracnls;
using std::numbers::pi;

namespace {

ModelSpec coupled(double c0) {
    ModelSpec m;
    m.grid = make_grid(1, 20.0, 256);
    m.q = 0.3;
    m.potential1.family = PotentialFamily::multi_well_product;
    m.potential1.amplitude = 1.0;
    m.potential1.wells = {Well{{0, 0, 0}, 1.0}};
    m.potential2 = m.potential1;
    m.coupling.family = CouplingFamily::constant_negative;
    m.coupling.c0 = c0;
    return m;
}

}  // namespace

TEST_CASE("scalar projection matches a bisection on the fibering derivative") {
    const ModelSpec m = coupled(0.0);
    const auto pb = make_problem(m);
    const Field u = Field::from_function(m.grid, [](const Point& x) { return 0.2 * std::exp(-x[0] * x[0] / 4); });
    const double s = project_single(*pb, u, pb->fields.v1, m.mu1);
    // Independent: d/ds of s^2/2 |u|^2 - mu s^{2p+2}/(2p+2) A vanishes where |u|^2 = mu s^{2p} A.
    const PairCache c = compute_cache(*pb, u, u);
    auto fprime = [&](double t) { return t * c.norm_u_sq - m.mu1 * std::pow(t, 2 * m.p + 1) * c.A; };
    double lo = 1e-3, hi = 1e3;
    for (int k = 0; k < 200; ++k) {
        const double mid = std::sqrt(lo * hi);
        (fprime(mid) > 0 ? lo : hi) = mid;
    }
    CHECK(s == doctest::Approx(lo).epsilon(1e-12));
    CHECK(scalar_nehari_scale(c.norm_u_sq, c.A, m.mu1, m.p) == doctest::Approx(lo).epsilon(1e-12));
}

TEST_CASE("pair projection lands on both constraints and reports the determinant") {
    const ModelSpec m = coupled(0.3);
    const auto pb = make_problem(m);
    const PairState st(pb, Field::from_function(m.grid, [](const Point& x) { return 0.5 * std::exp(-x[0] * x[0]); }),
                       Field::from_function(m.grid, [](const Point& x) { return 2.0 / (1 + (x[0] - 0.3) * (x[0] - 0.3)); }));
    const NehariScales sc = project_pair(*pb, st);
    const PairState on = st.scaled(sc.s, sc.t);
    const auto [r1, r2] = nehari_residuals(*pb, on);
    CHECK(std::abs(r1) <= 1e-12 * on.cache().norm_u_sq);
    CHECK(std::abs(r2) <= 1e-12 * on.cache().norm_v_sq);
    const ConstraintJacobian jac = constraint_jacobian(m, on.cache());
    CHECK(sc.jacobian_det == doctest::Approx(jac.det));
    CHECK(jac.det > 0.0);
    CHECK(on.cache().L < 0.0);
}

TEST_CASE("Gamma identity K1 K2 - (q+1)^2 L^2 on the manifold") {
    const ModelSpec m = coupled(0.2);
    const auto pb = make_problem(m);
    const PairState st(pb, Field::from_function(m.grid, [](const Point& x) { return std::exp(-x[0] * x[0]); }),
                       Field::from_function(m.grid, [](const Point& x) { return std::exp(-(x[0] - 1) * (x[0] - 1)); }));
    const NehariScales sc = project_pair(*pb, st);
    const PairCache c = st.scaled(sc.s, sc.t).cache();
    const ConstraintJacobian jac = constraint_jacobian(m, c);
    // On N_eps: ||u||^2 = mu1 A + L, so F1 derivative along u is 2||u||^2 - (2p+2) mu1 A - (q+1) L.
    const double p = m.p, q = m.q;
    const double k1 = (2 * p + 2) * m.mu1 * c.A + (q + 1) * c.L - 2 * c.norm_u_sq;
    const double k2 = (2 * p + 2) * m.mu2 * c.B + (q + 1) * c.L - 2 * c.norm_v_sq;
    CHECK(std::abs(jac.K1) == doctest::Approx(std::abs(k1)).epsilon(1e-10));
    CHECK(std::abs(jac.K2) == doctest::Approx(std::abs(k2)).epsilon(1e-10));
    CHECK(jac.det == doctest::Approx(jac.K1 * jac.K2 - (q + 1) * (q + 1) * jac.Lb * jac.Lb).epsilon(1e-12));
}

TEST_CASE("constraint derivative matches finite differences") {
    const ModelSpec m = coupled(0.2);
    const auto pb = make_problem(m);
    const PairState st(pb, Field::from_function(m.grid, [](const Point& x) { return std::exp(-x[0] * x[0]); }),
                       Field::from_function(m.grid, [](const Point& x) { return 0.7 * std::exp(-(x[0] - 1) * (x[0] - 1)); }));
    const FieldPair d{Field::from_function(m.grid, [](const Point& x) { return std::sin(x[0]) * std::exp(-x[0] * x[0] / 8); }),
                      Field::from_function(m.grid, [](const Point& x) { return std::exp(-x[0] * x[0] / 2); })};
    const auto [psi1, psi2] = constraint_derivative(*pb, st, d);
    const double h = 1e-6;
    const PairState plus(pb, st.u() + h * d.u, st.v() + h * d.v);
    const PairState minus(pb, st.u() - h * d.u, st.v() - h * d.v);
    const auto [p1, p2] = nehari_residuals(*pb, plus);
    const auto [m1, m2] = nehari_residuals(*pb, minus);
    CHECK(psi1 == doctest::Approx((p1 - m1) / (2 * h)).epsilon(1e-7));
    CHECK(psi2 == doctest::Approx((p2 - m2) / (2 * h)).epsilon(1e-7));
}

TEST_CASE("energy gap delta-bar against the closed-form soliton constants") {
    // BO soliton U = 2/(1+x^2): int U^3 = 3 pi, ||U||^2 = 3 pi, alpha_hat = pi/2, S = (3 pi)^{1/3}.
    const double S = std::cbrt(3 * pi);
    GapInputs in{0.5, 1.0, 1.0, S, S, pi / 2, pi / 2};
    for (double sigma : {0.005, 0.5, 2.0, 4.5}) {
        const double ratio = 0.5 * std::pow(S, 1.5) / std::sqrt(6 * (pi / 2) + sigma);
        const double expect = sigma / 3 * std::min(1.0, ratio);
        CHECK(energy_gap_delta(in, sigma) == doctest::Approx(expect).epsilon(1e-14));
    }
    CHECK_THROWS_AS(energy_gap_delta(in, 0.0), Error);
    CHECK_THROWS_AS(energy_gap_delta(in, 3 * pi / 2 + 1e-9), Error);
}

TEST_CASE("Sobolev constant of the computed soliton") {
    const auto rec = solve_scalar(1, 1, 0.5, 0.5, make_grid(1, 200.0, 4096));
    CHECK(sobolev_constant(&rec) == doctest::Approx(std::cbrt(3 * pi)).epsilon(1e-4));
    CHECK_THROWS_AS(sobolev_constant(nullptr), Error);
}

TEST_CASE("projection fails loudly when the constraint system has no solution") {
    // Identical components with beta = -1.5: mu A + L < 0, so no (s, t) exists.
    ModelSpec m = coupled(0.0);
    m.q = 0.5;
    m.coupling.c0 = 1.5;
    const auto pb = make_problem(m);
    const Field w = Field::from_function(m.grid, [](const Point& x) { return std::exp(-x[0] * x[0]); });
    CHECK_THROWS_AS(project_pair(*pb, PairState(pb, w, w)), Error);
}
