#pragma once

// Pointwise maps and reductions over grid values. These are the data-parallel
// inner loops of every energy, gradient and diagnostic evaluation.
//
// The default namespace runs them with OpenMP over fixed-size blocks whose
// partial sums are combined in block order, so results are bitwise identical
// for any thread count. `kernels::serial` holds the plain single-loop
// reference versions used by the tests and the benchmark.

#include <array>
#include <span>

#include "fracnls/grid.hpp"

namespace fracnls::kernels {

struct PairSums {
    double a = 0.0;         // sum (u+)^{2p+2}
    double b = 0.0;         // sum (v+)^{2p+2}
    double coupling = 0.0;  // sum beta (u+)^{q+1} (v+)^{q+1}
};

// Moments of u^2: [sum u^2, sum x_1 u^2, sum x_2 u^2, sum x_3 u^2].
using Moments = std::array<double, 4>;

double dot(std::span<const double> a, std::span<const double> b);
double weighted_sq(std::span<const double> w, std::span<const double> u);
double positive_power(std::span<const double> u, double power);
PairSums pair_sums(std::span<const double> u, std::span<const double> v, std::span<const double> beta,
                   double p, double q);
// out_u = mu1 (u+)^{2p+1} + beta (u+)^q (v+)^{q+1}, and symmetrically for out_v.
void pair_forces(std::span<const double> u, std::span<const double> v, std::span<const double> beta,
                 double mu1, double mu2, double p, double q, std::span<double> out_u, std::span<double> out_v);
Moments moments(const GridSpec& grid, std::span<const double> u);

namespace serial {
double dot(std::span<const double> a, std::span<const double> b);
double weighted_sq(std::span<const double> w, std::span<const double> u);
double positive_power(std::span<const double> u, double power);
PairSums pair_sums(std::span<const double> u, std::span<const double> v, std::span<const double> beta,
                   double p, double q);
void pair_forces(std::span<const double> u, std::span<const double> v, std::span<const double> beta,
                 double mu1, double mu2, double p, double q, std::span<double> out_u, std::span<double> out_v);
Moments moments(const GridSpec& grid, std::span<const double> u);
}  // namespace serial

}  // namespace fracnls::kernels
