#include "fracnls/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>

#include "fracnls/errors.hpp"
#include "fracnls/kernels.hpp"

namespace fracnls {

namespace {

// FFTW's planner is not re-entrant; execution with the new-array interface is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct RealBuffer {
    explicit RealBuffer(std::size_t n) : data(fftw_alloc_real(n)) {}
    ~RealBuffer() { fftw_free(data); }
    RealBuffer(const RealBuffer&) = delete;
    RealBuffer& operator=(const RealBuffer&) = delete;
    double* data;
};

struct ComplexBuffer {
    explicit ComplexBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {}
    ~ComplexBuffer() { fftw_free(data); }
    ComplexBuffer(const ComplexBuffer&) = delete;
    ComplexBuffer& operator=(const ComplexBuffer&) = delete;
    fftw_complex* data;
};

int signed_index(int j, int n) { return j <= n / 2 ? j : j - n; }

}  // namespace

struct SpectralOperator::Plans {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
    std::size_t real_size = 0;
    std::size_t complex_size = 0;

    explicit Plans(const GridSpec& g) {
        const int n = g.points_per_dim;
        int dims[3] = {n, n, n};
        real_size = g.size();
        complex_size = real_size / static_cast<std::size_t>(n) * static_cast<std::size_t>(n / 2 + 1);
        RealBuffer in(real_size);
        ComplexBuffer out(complex_size);
        std::lock_guard lock(planner_mutex());
        r2c = fftw_plan_dft_r2c(g.dim, dims, in.data, out.data, FFTW_ESTIMATE);
        c2r = fftw_plan_dft_c2r(g.dim, dims, out.data, in.data, FFTW_ESTIMATE);
    }
    ~Plans() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(r2c);
        fftw_destroy_plan(c2r);
    }
    Plans(const Plans&) = delete;
    Plans& operator=(const Plans&) = delete;
};

SpectralOperator::SpectralOperator(const GridSpec& grid, double alpha)
    : grid_(make_grid(grid.dim, grid.half_width, grid.points_per_dim)), alpha_(alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorKind::InvalidModel, "alpha must lie in (0, 1]");
    plans_ = std::make_shared<const Plans>(grid_);
    const int n = grid_.points_per_dim;
    const std::size_t m = plans_->complex_size;
    symbol_.resize(m);
    parseval_weight_.resize(m);
    for (std::size_t mode = 0; mode < m; ++mode) {
        double k2 = 0.0;
        for (int axis = 0; axis < grid_.dim; ++axis) {
            const double xi = wavenumber(mode, axis);
            k2 += xi * xi;
        }
        symbol_[mode] = k2 == 0.0 ? 0.0 : (alpha_ == 1.0 ? k2 : std::pow(k2, alpha_));
        const int last = static_cast<int>(mode % static_cast<std::size_t>(n / 2 + 1));
        parseval_weight_[mode] = (last == 0 || last == n / 2) ? 1.0 : 2.0;
    }
}

double SpectralOperator::wavenumber(std::size_t mode, int axis) const {
    const int n = grid_.points_per_dim;
    const auto half = static_cast<std::size_t>(n / 2 + 1);
    const double base = std::numbers::pi / grid_.half_width;
    if (axis >= grid_.dim) return 0.0;
    if (axis == grid_.dim - 1) return base * static_cast<double>(mode % half);
    std::size_t rest = mode / half;
    // axes 0 .. dim-2 are full length, row-major.
    for (int a = grid_.dim - 2; a > axis; --a) rest /= static_cast<std::size_t>(n);
    const int j = static_cast<int>(rest % static_cast<std::size_t>(n));
    return base * signed_index(j, n);
}

void SpectralOperator::require_grid(const Field& u, const char* where) const {
    if (!(u.grid == grid_)) throw Error(ErrorKind::GridMismatch, std::string(where) + ": field grid differs from operator grid");
}

std::vector<std::complex<double>> SpectralOperator::forward(const Field& u) const {
    require_grid(u, "SpectralOperator::forward");
    RealBuffer in(plans_->real_size);
    ComplexBuffer out(plans_->complex_size);
    std::memcpy(in.data, u.values.data(), sizeof(double) * plans_->real_size);
    fftw_execute_dft_r2c(plans_->r2c, in.data, out.data);
    std::vector<std::complex<double>> spec(plans_->complex_size);
    std::memcpy(static_cast<void*>(spec.data()), out.data, sizeof(fftw_complex) * plans_->complex_size);
    return spec;
}

Field SpectralOperator::inverse(std::vector<std::complex<double>> spectrum) const {
    ComplexBuffer in(plans_->complex_size);
    RealBuffer out(plans_->real_size);
    std::memcpy(in.data, spectrum.data(), sizeof(fftw_complex) * plans_->complex_size);
    fftw_execute_dft_c2r(plans_->c2r, in.data, out.data);
    Field result(grid_);
    const double scale = 1.0 / static_cast<double>(plans_->real_size);
    for (std::size_t i = 0; i < plans_->real_size; ++i) result.values[i] = out.data[i] * scale;
    return result;
}

Field SpectralOperator::apply(const Field& u) const { return apply_multiplier(u, symbol_); }

Field SpectralOperator::apply_multiplier(const Field& u, std::span<const double> m) const {
    auto spec = forward(u);
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= m[k];
    return inverse(std::move(spec));
}

std::vector<double> SpectralOperator::multiplier_from_symbol(const std::function<double(double)>& f) const {
    std::vector<double> m(symbol_.size());
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = f(symbol_[k]);
    return m;
}

double SpectralOperator::quadratic_form(const Field& u, std::span<const double> m) const {
    const auto spec = forward(u);
    double s = 0.0;
    for (std::size_t k = 0; k < spec.size(); ++k) s += parseval_weight_[k] * m[k] * std::norm(spec[k]);
    return s * grid_.cell_volume() / static_cast<double>(plans_->real_size);
}

double SpectralOperator::seminorm_sq(const Field& u) const { return quadratic_form(u, symbol_); }

Field SpectralOperator::derivative(const Field& u, int axis) const {
    auto spec = forward(u);
    const int n = grid_.points_per_dim;
    const double nyquist = std::numbers::pi / grid_.half_width * (n / 2);
    for (std::size_t k = 0; k < spec.size(); ++k) {
        const double xi = wavenumber(k, axis);
        spec[k] *= std::abs(xi) == nyquist ? std::complex<double>(0.0) : std::complex<double>(0.0, xi);
    }
    return inverse(std::move(spec));
}

Field SpectralOperator::translate(const Field& u, const Point& shift) const {
    auto spec = forward(u);
    for (std::size_t k = 0; k < spec.size(); ++k) {
        double phase = 0.0;
        for (int axis = 0; axis < grid_.dim; ++axis) phase += wavenumber(k, axis) * shift[axis];
        spec[k] *= std::polar(1.0, -phase);
    }
    return inverse(std::move(spec));
}

Field frac_laplacian_apply(const SpectralOperator& op, const Field& u) { return op.apply(u); }

double seminorm_alpha_sq(const SpectralOperator& op, const Field& u) { return op.seminorm_sq(u); }

double weighted_l2(const Field& u, const Field& w) {
    require_same_grid(u, w, "weighted_l2");
    return u.grid.cell_volume() * kernels::weighted_sq(w.span(), u.span());
}

double inner(const Field& u, const Field& v) {
    require_same_grid(u, v, "inner");
    return u.grid.cell_volume() * kernels::dot(u.span(), v.span());
}

}  // namespace fracnls
