#include "fracnls/eigensolver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "fracnls/kernels.hpp"

namespace fracnls {

namespace {

double nrm(std::span<const double> x) { return std::sqrt(kernels::dot(x, x)); }

}  // namespace

MinresResult minres(const LinearMap& a, std::span<const double> b, double rel_tol, int max_iter) {
    const std::size_t n = b.size();
    MinresResult out;
    out.x.assign(n, 0.0);
    const double beta1 = nrm(b);
    if (beta1 == 0.0) {
        out.converged = true;
        return out;
    }
    std::vector<double> r1(b.begin(), b.end()), r2 = r1, y = r1, v(n), w(n, 0.0), w1(n), w2(n, 0.0);
    double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1, cs = -1.0, sn = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        const double s = 1.0 / beta;
        for (std::size_t i = 0; i < n; ++i) v[i] = s * y[i];
        a(v, y);
        if (it >= 2)
            for (std::size_t i = 0; i < n; ++i) y[i] -= (beta / oldb) * r1[i];
        const double alfa = kernels::dot(v, y);
        for (std::size_t i = 0; i < n; ++i) y[i] -= (alfa / beta) * r2[i];
        r1.swap(r2);
        r2 = y;
        oldb = beta;
        beta = nrm(r2);
        const double oldeps = epsln;
        const double delta = cs * dbar + sn * alfa;
        const double gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        const double gamma = std::max(std::hypot(gbar, beta), std::numeric_limits<double>::min());
        cs = gbar / gamma;
        sn = beta / gamma;
        const double phi = cs * phibar;
        phibar = sn * phibar;
        w1.swap(w2);
        w2.swap(w);
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
            out.x[i] += phi * w[i];
        }
        out.iterations = it;
        out.residual = phibar / beta1;
        if (out.residual <= rel_tol || beta == 0.0) {
            out.converged = true;
            break;
        }
    }
    return out;
}

LanczosResult lanczos_largest(const LinearMap& a, std::size_t n, int k, int max_iter, double rel_tol,
                              std::uint64_t seed) {
    LanczosResult out;
    max_iter = std::min<int>(max_iter, static_cast<int>(n));
    k = std::min(k, max_iter);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::vector<std::vector<double>> basis;
    std::vector<double> alphas, betas;
    std::vector<double> q(n);
    for (auto& x : q) x = gauss(rng);
    double qn = nrm(q);
    for (auto& x : q) x /= qn;
    basis.push_back(q);
    std::vector<double> w(n);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    std::vector<int> order;
    auto solve_tridiagonal = [&](int m) {
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            t(i, i) = alphas[i];
            if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = betas[i];
        }
        es.compute(t);
        order.resize(m);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int x, int y) {
            return std::abs(es.eigenvalues()[x]) > std::abs(es.eigenvalues()[y]);
        });
    };

    int m = 0;
    for (int j = 0; j < max_iter; ++j) {
        a(basis[j], w);
        const double alpha = kernels::dot(basis[j], w);
        alphas.push_back(alpha);
        for (std::size_t i = 0; i < n; ++i) w[i] -= alpha * basis[j][i];
        if (j > 0)
            for (std::size_t i = 0; i < n; ++i) w[i] -= betas[j - 1] * basis[j - 1][i];
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) {
                const double c = kernels::dot(b, w);
                for (std::size_t i = 0; i < n; ++i) w[i] -= c * b[i];
            }
        const double beta = nrm(w);
        m = j + 1;
        out.iterations = m;
        const bool exhausted = beta <= 1e-14 * std::abs(alpha) || m == max_iter;
        if (m >= k && (m % 5 == 0 || exhausted)) {
            solve_tridiagonal(m);
            bool ok = true;
            for (int i = 0; i < k; ++i) {
                const int c = order[i];
                const double est = std::abs(beta * es.eigenvectors()(m - 1, c));
                if (est > rel_tol * std::abs(es.eigenvalues()[c])) ok = false;
            }
            if (ok || exhausted) {
                out.converged = ok || beta <= 1e-14 * std::abs(alpha);
                break;
            }
        }
        betas.push_back(beta);
        std::vector<double> next(n);
        for (std::size_t i = 0; i < n; ++i) next[i] = w[i] / beta;
        basis.push_back(std::move(next));
    }
    if (static_cast<int>(order.size()) != m) solve_tridiagonal(m);
    const double last_beta = m - 1 < static_cast<int>(betas.size()) ? betas[m - 1] : nrm(w);
    for (int i = 0; i < k && i < m; ++i) {
        const int c = order[i];
        RitzPair rp;
        rp.value = es.eigenvalues()[c];
        rp.residual_estimate = std::abs(last_beta * es.eigenvectors()(m - 1, c));
        rp.vector.assign(n, 0.0);
        for (int j = 0; j < m; ++j) {
            const double coef = es.eigenvectors()(j, c);
            for (std::size_t r = 0; r < n; ++r) rp.vector[r] += coef * basis[j][r];
        }
        const double vn = nrm(rp.vector);
        for (auto& x : rp.vector) x /= vn;
        out.pairs.push_back(std::move(rp));
    }
    return out;
}

}  // namespace fracnls
