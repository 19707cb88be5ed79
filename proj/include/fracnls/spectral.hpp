#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "fracnls/grid.hpp"

namespace fracnls {

// Fourier-multiplier representation of (-Delta)^alpha on a periodic grid.
//
// The half spectrum follows FFTW's r2c layout (last axis stores n/2+1 modes).
// Frequencies use the standard FFT ordering with the Nyquist mode kept;
// xi = pi k / L. The symbol |xi|^{2 alpha} is exactly zero at k = 0.
//
// Transform plans are created once and shared read-only between copies, so a
// SpectralOperator may be used concurrently from several threads.
class SpectralOperator {
public:
    SpectralOperator(const GridSpec& grid, double alpha);

    const GridSpec& grid() const { return grid_; }
    double alpha() const { return alpha_; }
    std::size_t spectrum_size() const { return symbol_.size(); }
    // |xi_k|^{2 alpha} on the half spectrum.
    std::span<const double> multiplier() const { return symbol_; }
    // Wavenumber component xi_axis of half-spectrum mode `mode`.
    double wavenumber(std::size_t mode, int axis) const;

    std::vector<std::complex<double>> forward(const Field& u) const;
    Field inverse(std::vector<std::complex<double>> spectrum) const;

    Field apply(const Field& u) const;
    Field apply_multiplier(const Field& u, std::span<const double> m) const;
    // Multiplier f(|xi|^{2 alpha}) evaluated on the half spectrum.
    std::vector<double> multiplier_from_symbol(const std::function<double(double)>& f) const;
    // Approximates the integral of u * (M u) through Parseval.
    double quadratic_form(const Field& u, std::span<const double> m) const;
    double seminorm_sq(const Field& u) const;
    Field derivative(const Field& u, int axis) const;
    // Band-limited translation: returns x -> u(x - shift).
    Field translate(const Field& u, const Point& shift) const;

private:
    struct Plans;

    void require_grid(const Field& u, const char* where) const;

    GridSpec grid_;
    double alpha_;
    std::shared_ptr<const Plans> plans_;
    std::vector<double> symbol_;
    std::vector<double> parseval_weight_;
};

// Field with Fourier coefficients multiplied by |xi_k|^{2 alpha}.
Field frac_laplacian_apply(const SpectralOperator& op, const Field& u);
// Approximation of the integral of |(-Delta)^{alpha/2} u|^2 (no epsilon factor).
double seminorm_alpha_sq(const SpectralOperator& op, const Field& u);
// Rectangle rule h^N sum w u^2.
double weighted_l2(const Field& u, const Field& w);
// Rectangle rule h^N sum u v.
double inner(const Field& u, const Field& v);

}  // namespace fracnls
