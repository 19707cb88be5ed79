#include "fracnls/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace fracnls::kernels {

namespace {

constexpr std::ptrdiff_t kBlock = 2048;

inline double pos(double x) { return x > 0.0 ? x : 0.0; }

inline double pos_pow(double x, double power) { return x > 0.0 ? std::pow(x, power) : 0.0; }

template <class Term>
double block_reduce(std::size_t n, Term term) {
    const auto total = static_cast<std::ptrdiff_t>(n);
    const std::ptrdiff_t blocks = (total + kBlock - 1) / kBlock;
    std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < blocks; ++b) {
        const std::ptrdiff_t end = std::min(total, (b + 1) * kBlock);
        double s = 0.0;
        for (std::ptrdiff_t i = b * kBlock; i < end; ++i) s += term(static_cast<std::size_t>(i));
        partial[static_cast<std::size_t>(b)] = s;
    }
    double s = 0.0;
    for (double x : partial) s += x;
    return s;
}

template <int K, class Term>
std::array<double, K> block_reduce_n(std::size_t n, Term term) {
    const auto total = static_cast<std::ptrdiff_t>(n);
    const std::ptrdiff_t blocks = (total + kBlock - 1) / kBlock;
    std::vector<std::array<double, K>> partial(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < blocks; ++b) {
        const std::ptrdiff_t end = std::min(total, (b + 1) * kBlock);
        std::array<double, K> s{};
        for (std::ptrdiff_t i = b * kBlock; i < end; ++i) term(static_cast<std::size_t>(i), s);
        partial[static_cast<std::size_t>(b)] = s;
    }
    std::array<double, K> s{};
    for (const auto& blk : partial)
        for (int k = 0; k < K; ++k) s[k] += blk[k];
    return s;
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
    return block_reduce(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

double weighted_sq(std::span<const double> w, std::span<const double> u) {
    return block_reduce(u.size(), [&](std::size_t i) { return w[i] * u[i] * u[i]; });
}

double positive_power(std::span<const double> u, double power) {
    return block_reduce(u.size(), [&](std::size_t i) { return pos_pow(u[i], power); });
}

PairSums pair_sums(std::span<const double> u, std::span<const double> v, std::span<const double> beta,
                   double p, double q) {
    const double e_self = 2.0 * p + 2.0;
    const double e_cross = q + 1.0;
    const auto s = block_reduce_n<3>(u.size(), [&](std::size_t i, std::array<double, 3>& acc) {
        const double up = pos(u[i]);
        const double vp = pos(v[i]);
        if (up > 0.0) acc[0] += std::pow(up, e_self);
        if (vp > 0.0) acc[1] += std::pow(vp, e_self);
        if (up > 0.0 && vp > 0.0 && beta[i] != 0.0) acc[2] += beta[i] * std::pow(up * vp, e_cross);
    });
    return {s[0], s[1], s[2]};
}

void pair_forces(std::span<const double> u, std::span<const double> v, std::span<const double> beta,
                 double mu1, double mu2, double p, double q, std::span<double> out_u, std::span<double> out_v) {
    const auto n = static_cast<std::ptrdiff_t>(u.size());
    const double e_self = 2.0 * p + 1.0;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        const auto i = static_cast<std::size_t>(k);
        const double up = pos(u[i]);
        const double vp = pos(v[i]);
        double fu = up > 0.0 ? mu1 * std::pow(up, e_self) : 0.0;
        double fv = vp > 0.0 ? mu2 * std::pow(vp, e_self) : 0.0;
        if (up > 0.0 && vp > 0.0 && beta[i] != 0.0) {
            const double uq = std::pow(up, q);
            const double vq = std::pow(vp, q);
            fu += beta[i] * uq * vq * vp;
            fv += beta[i] * vq * uq * up;
        }
        out_u[i] = fu;
        out_v[i] = fv;
    }
}

Moments moments(const GridSpec& grid, std::span<const double> u) {
    return block_reduce_n<4>(u.size(), [&](std::size_t i, std::array<double, 4>& acc) {
        const double w = u[i] * u[i];
        const Point x = grid.node(i);
        acc[0] += w;
        acc[1] += x[0] * w;
        acc[2] += x[1] * w;
        acc[3] += x[2] * w;
    });
}

namespace serial {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double weighted_sq(std::span<const double> w, std::span<const double> u) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += w[i] * u[i] * u[i];
    return s;
}

double positive_power(std::span<const double> u, double power) {
    double s = 0.0;
    for (double x : u) s += pos_pow(x, power);
    return s;
}

PairSums pair_sums(std::span<const double> u, std::span<const double> v, std::span<const double> beta,
                   double p, double q) {
    PairSums s;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double up = pos(u[i]);
        const double vp = pos(v[i]);
        s.a += pos_pow(up, 2.0 * p + 2.0);
        s.b += pos_pow(vp, 2.0 * p + 2.0);
        s.coupling += beta[i] * pos_pow(up, q + 1.0) * pos_pow(vp, q + 1.0);
    }
    return s;
}

void pair_forces(std::span<const double> u, std::span<const double> v, std::span<const double> beta,
                 double mu1, double mu2, double p, double q, std::span<double> out_u, std::span<double> out_v) {
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double up = pos(u[i]);
        const double vp = pos(v[i]);
        out_u[i] = mu1 * pos_pow(up, 2.0 * p + 1.0) + beta[i] * pos_pow(up, q) * pos_pow(vp, q + 1.0);
        out_v[i] = mu2 * pos_pow(vp, 2.0 * p + 1.0) + beta[i] * pos_pow(vp, q) * pos_pow(up, q + 1.0);
    }
}

Moments moments(const GridSpec& grid, std::span<const double> u) {
    Moments m{};
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double w = u[i] * u[i];
        const Point x = grid.node(i);
        m[0] += w;
        for (int d = 0; d < 3; ++d) m[d + 1] += x[d] * w;
    }
    return m;
}

}  // namespace serial

}  // namespace fracnls::kernels
