#include "fracnls/groundstate.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "fracnls/eigensolver.hpp"
#include "fracnls/errors.hpp"
#include "fracnls/kernels.hpp"
#include "fracnls/model.hpp"
#include "fracnls/spectral.hpp"

namespace fracnls {

namespace {

struct ScalarProblem {
    const SpectralOperator& op;
    double lambda, mu, p;

    double norm_sq(const Field& w) const { return op.seminorm_sq(w) + lambda * inner(w, w); }
    double power_integral(const Field& w) const {
        return w.grid.cell_volume() * kernels::positive_power(w.span(), 2.0 * p + 2.0);
    }
    // Rescales w onto the scalar Nehari manifold; returns the level p/(2p+2) ||w||^2.
    double project(Field& w) const {
        const double n = norm_sq(w);
        const double a = power_integral(w);
        if (!(a > 0.0)) throw Error(ErrorKind::NoConvergence, "solve_scalar: iterate lost its positive part");
        const double s = std::pow(n / (mu * a), 1.0 / (2.0 * p));
        w *= s;
        return p / (2.0 * p + 2.0) * n * s * s;
    }
    Field nonlinearity(const Field& w) const {
        Field out(w.grid);
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double x = std::max(w[i], 0.0);
            out[i] = x > 0.0 ? mu * std::pow(x, 2.0 * p + 1.0) : 0.0;
        }
        return out;
    }
};

Field seed_field(const GridSpec& grid, std::uint64_t seed) {
    Point center{0.0, 0.0, 0.0};
    double width = 1.0;
    if (seed != 0) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> shift(-2.0, 2.0), wid(0.7, 1.5);
        for (int d = 0; d < grid.dim; ++d) center[d] = shift(rng);
        width = wid(rng);
    }
    const double mass = std::pow(std::numbers::pi * width * width, 0.5 * grid.dim);
    return Field::from_function(grid, [&](const Point& x) {
        const Point y = x - center;
        return std::exp(-(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) / (width * width)) / mass;
    });
}

// Center of symmetry per axis from the phase of the first Fourier mode.
Point symmetry_center(const Field& w) {
    const auto& g = w.grid;
    const double kappa = std::numbers::pi / g.half_width;
    Point c{0.0, 0.0, 0.0};
    for (int d = 0; d < g.dim; ++d) {
        std::complex<double> acc = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double x = g.coordinate(g.unflatten(i)[d]);
            acc += w[i] * std::polar(1.0, -kappa * x);
        }
        c[d] = -std::arg(acc) / kappa;
    }
    return c;
}

double boundary_max(const Field& w) {
    const auto& g = w.grid;
    double out = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto idx = g.unflatten(i);
        for (int d = 0; d < g.dim; ++d)
            if (idx[d] == 0 || idx[d] == g.points_per_dim - 1) {
                out = std::max(out, std::abs(w[i]));
                break;
            }
    }
    return out;
}

}  // namespace

GroundStateRecord solve_scalar(double lambda, double mu, double p, double alpha, const GridSpec& grid,
                               const ScalarSolveOptions& opts) {
    if (!(lambda > 0.0) || !(mu > 0.0)) throw Error(ErrorKind::InvalidModel, "solve_scalar: lambda and mu must be positive");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorKind::InvalidModel, "solve_scalar: alpha must lie in (0, 1]");
    if (!(p > 0.0) || !(2.0 * p + 2.0 < critical_exponent(grid.dim, alpha)))
        throw Error(ErrorKind::HypothesisViolation, "solve_scalar: exponent is not subcritical");

    const SpectralOperator op(grid, alpha);
    const ScalarProblem sp{op, lambda, mu, p};
    const auto precond = op.multiplier_from_symbol([&](double s) { return 1.0 / (s + lambda); });

    GroundStateRecord rec;
    rec.lambda = lambda;
    rec.mu = mu;
    rec.p = p;
    rec.alpha = alpha;

    Field w = seed_field(grid, opts.rng_seed);
    double level = sp.project(w);
    double tau = 1.0;
    double gmax = 0.0;
    bool converged = false;
    int it = 0;
    for (; it < opts.max_iter; ++it) {
        const Field nl = sp.nonlinearity(w);
        Field g = op.apply(w);
        gmax = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            g[i] += lambda * w[i] - nl[i];
            gmax = std::max(gmax, std::abs(g[i]));
        }
        if (gmax <= opts.tol_grad * lambda * w.max_abs()) {
            converged = true;
            break;
        }
        // w - tau P grad = (1 - tau) w + tau P N(w).
        const Field pn = op.apply_multiplier(nl, precond);
        for (;;) {
            Field cand = (1.0 - tau) * w + tau * pn;
            const double cand_level = sp.project(cand);
            if (cand_level <= level * (1.0 + 1e-12) || tau < 1.0 / 64.0) {
                w = std::move(cand);
                level = cand_level;
                tau = std::min(1.0, 2.0 * tau);
                break;
            }
            tau *= 0.5;
        }
    }
    if (!converged)
        throw Error(ErrorKind::NoConvergence, "solve_scalar: gradient max-norm " + std::to_string(gmax) +
                                                  " after " + std::to_string(it) + " iterations");

    Point c = symmetry_center(w);
    if (norm(c) > 0.0) {
        w = op.translate(w, -1.0 * c);
        sp.project(w);
    }
    rec.omega = std::move(w);
    rec.alpha_hat = p / (2.0 * p + 2.0) * sp.norm_sq(rec.omega);
    rec.iterations = it;
    rec.grad_norm = gmax;
    if (boundary_max(rec.omega) > opts.truncation_fraction * rec.omega.max_abs())
        rec.warnings.push_back("TruncationWarning: boundary amplitude exceeds " +
                               std::to_string(opts.truncation_fraction) + " of the peak");
    return rec;
}

std::pair<double, double> check_decay(GroundStateRecord& record, double envelope_ratio_max) {
    const Field& w = record.omega;
    if (w.size() == 0) throw Error(ErrorKind::DecayCheckFailed, "check_decay: empty record");
    const auto& g = w.grid;
    const double lo = 0.25 * g.half_width, hi = 0.8 * g.half_width;
    const double power = g.dim + 2.0 * record.alpha;
    double c1 = INFINITY, c2 = -INFINITY;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double r = norm(g.node(i));
        if (r < lo || r > hi) continue;
        const double val = w[i] * (1.0 + std::pow(r, power));
        c1 = std::min(c1, val);
        c2 = std::max(c2, val);
    }
    if (!(c1 > 0.0) || !std::isfinite(c2) || c2 / c1 > envelope_ratio_max)
        throw Error(ErrorKind::DecayCheckFailed, "check_decay: envelope constants (" + std::to_string(c1) + ", " +
                                                     std::to_string(c2) + ") outside the admissible range");
    record.decay_fit = std::make_pair(c1, c2);
    return {c1, c2};
}

NondegeneracyReport check_nondegeneracy(GroundStateRecord& record, const NondegeneracyOptions& opts) {
    const Field& w = record.omega;
    if (w.size() == 0) throw Error(ErrorKind::MissingGroundState, "check_nondegeneracy: empty record");
    const auto& g = w.grid;
    const std::size_t n = w.size();
    const SpectralOperator op(g, record.alpha);
    const double base = record.lambda + opts.lambda_shift;
    std::vector<double> potential(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::max(w[i], 0.0);
        potential[i] = base - (2.0 * record.p + 1.0) * record.mu * (x > 0.0 ? std::pow(x, 2.0 * record.p) : 0.0);
    }
    auto apply_l0 = [&](std::span<const double> x, std::span<double> y) {
        Field f(g);
        std::copy(x.begin(), x.end(), f.values.begin());
        const Field lf = op.apply(f);
        for (std::size_t i = 0; i < n; ++i) y[i] = lf[i] + potential[i] * x[i];
    };

    // Shift-invert around sigma; inner solves use the symmetric split with (|xi|^{2 alpha} + lambda)^{-1/2}.
    const double sigma = -0.05 * record.lambda;
    const auto half = op.multiplier_from_symbol([&](double s) { return 1.0 / std::sqrt(s + record.lambda); });
    auto apply_half = [&](std::span<const double> x) {
        Field f(g);
        std::copy(x.begin(), x.end(), f.values.begin());
        return op.apply_multiplier(f, half);
    };
    LinearMap split = [&](std::span<const double> x, std::span<double> y) {
        const Field hx = apply_half(x);
        std::vector<double> t(n);
        apply_l0(hx.values, t);
        for (std::size_t i = 0; i < n; ++i) t[i] -= sigma * hx[i];
        const Field ht = apply_half(t);
        std::copy(ht.values.begin(), ht.values.end(), y.begin());
    };
    bool inner_failed = false;
    LinearMap shift_invert = [&](std::span<const double> x, std::span<double> y) {
        const Field hb = apply_half(x);
        const auto sol = minres(split, hb.values, 1e-13, 5000);
        if (!sol.converged && sol.residual > 1e-9) inner_failed = true;
        const Field hx = apply_half(sol.x);
        std::copy(hx.values.begin(), hx.values.end(), y.begin());
    };
    const auto lz = lanczos_largest(shift_invert, n, opts.k_eig, opts.max_lanczos, 1e-10);
    if (inner_failed || lz.pairs.empty()) throw Error(ErrorKind::EigSolverFailure, "check_nondegeneracy: inner solve failed");

    struct Pair {
        double theta;
        double residual;
        std::vector<double> vec;
    };
    std::vector<Pair> pairs;
    std::vector<double> lx(n);
    for (const auto& rp : lz.pairs) {
        const double theta = sigma + 1.0 / rp.value;
        apply_l0(rp.vector, lx);
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i) res += std::pow(lx[i] - theta * rp.vector[i], 2);
        pairs.push_back({theta, std::sqrt(res), rp.vector});
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return std::abs(a.theta) < std::abs(b.theta); });
    if (pairs.front().residual > 1e-6 * std::max(1.0, std::abs(pairs.front().theta)))
        throw Error(ErrorKind::EigSolverFailure, "check_nondegeneracy: smallest eigenpair did not converge (residual " +
                                                     std::to_string(pairs.front().residual) + ")");

    // Orthonormal basis of span{d omega / dx_n}.
    std::vector<std::vector<double>> modes;
    for (int d = 0; d < g.dim; ++d) {
        std::vector<double> m = op.derivative(w, d).values;
        for (const auto& e : modes) {
            const double c = kernels::dot(e, m);
            for (std::size_t i = 0; i < n; ++i) m[i] -= c * e[i];
        }
        const double mn = std::sqrt(kernels::dot(m, m));
        if (mn > 0.0) {
            for (auto& x : m) x /= mn;
            modes.push_back(std::move(m));
        }
    }

    NondegeneracyReport rep;
    for (const auto& pr : pairs) {
        rep.eigenvalues.push_back(pr.theta);
        rep.residuals.push_back(pr.residual);
        if (std::abs(pr.theta) <= opts.kernel_tol) {
            ++rep.kernel_dim;
            double ov = 0.0;
            for (const auto& e : modes) ov += std::pow(kernels::dot(e, pr.vec), 2);
            rep.kernel_overlaps.push_back(std::sqrt(ov));
        }
    }
    rep.smallest_abs_eigenvalue = std::abs(pairs.front().theta);
    record.kernel_dim = rep.kernel_dim;
    record.smallest_abs_eigenvalue = rep.smallest_abs_eigenvalue;
    return rep;
}

double scalar_norm_sq(const GroundStateRecord& record) {
    const SpectralOperator op(record.omega.grid, record.alpha);
    return op.seminorm_sq(record.omega) + record.lambda * inner(record.omega, record.omega);
}

RadialProfile::RadialProfile(const GroundStateRecord& record, int upsample) {
    const auto& g = record.omega.grid;
    const int n = g.points_per_dim;
    const std::size_t stride_line = g.size() / n;  // first axis is slowest
    std::size_t offset = 0;
    for (int d = 1; d < g.dim; ++d) offset = offset * n + n / 2;
    const GridSpec line_grid = make_grid(1, g.half_width, n);
    Field line(line_grid);
    for (int i = 0; i < n; ++i) line[i] = record.omega[i * stride_line + offset];
    const SpectralOperator coarse(line_grid, record.alpha);
    auto spec = coarse.forward(line);
    const int fine_n = n * upsample;
    const GridSpec fine_grid = make_grid(1, g.half_width, fine_n);
    const SpectralOperator fine(fine_grid, record.alpha);
    std::vector<std::complex<double>> fine_spec(fine.spectrum_size(), 0.0);
    for (int k = 0; k < n / 2; ++k) fine_spec[k] = spec[k];
    fine_spec[n / 2] = 0.5 * spec[n / 2];
    Field f = fine.inverse(std::move(fine_spec));
    f *= static_cast<double>(upsample);
    step_ = fine_grid.spacing;
    table_.assign(f.values.begin() + fine_n / 2, f.values.end());
    max_radius_ = step_ * (table_.size() - 1);
    decay_power_ = g.dim + 2.0 * record.alpha;
}

double RadialProfile::operator()(double r) const {
    r = std::abs(r);
    if (r >= max_radius_) return table_.back() * std::pow(max_radius_ / r, decay_power_);
    const double t = r / step_;
    const std::size_t i = static_cast<std::size_t>(t);
    const double f = t - i;
    auto at = [&](long k) {
        if (k < 0) return table_[static_cast<std::size_t>(-k)];
        return table_[std::min<std::size_t>(static_cast<std::size_t>(k), table_.size() - 1)];
    };
    const double p0 = at(static_cast<long>(i) - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
    return p1 + 0.5 * f * (p2 - p0 + f * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + f * (3.0 * (p1 - p2) + p3 - p0)));
}

LimitPair::LimitPair(GroundStateRecord a, GroundStateRecord b)
    : w1(std::move(a)), w2(std::move(b)), profile1(w1), profile2(w2) {}

}  // namespace fracnls
