#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fracnls/grid.hpp"

namespace fracnls {

// Positive radial ground state of (-Delta)^alpha w + lambda w = mu |w|^{2p} w.
struct GroundStateRecord {
    Field omega;
    double alpha_hat = 0.0;  // p/(2p+2) ||omega||^2_lambda
    double lambda = 1.0;
    double mu = 1.0;
    double p = 0.5;
    double alpha = 0.5;
    int iterations = 0;
    double grad_norm = 0.0;  // max-norm of the gradient at the returned field
    std::optional<std::pair<double, double>> decay_fit;  // (C1, C2)
    int kernel_dim = -1;                                  // -1: not computed
    double smallest_abs_eigenvalue = 0.0;
    std::vector<std::string> warnings;
};

struct ScalarSolveOptions {
    double tol_grad = 1e-10;  // on max|g| / (lambda max|w|)
    int max_iter = 5000;
    std::uint64_t rng_seed = 0;  // 0: canonical centered gaussian seed
    double truncation_fraction = 1e-3;
};

GroundStateRecord solve_scalar(double lambda, double mu, double p, double alpha, const GridSpec& grid,
                               const ScalarSolveOptions& opts = {});

// (C1, C2) = (min, max) of omega(x)(1 + |x|^{N+2 alpha}) over 0.25L <= |x| <= 0.8L.
// Throws DecayCheckFailed unless 0 < C1 <= C2 and C2/C1 <= envelope_ratio_max.
std::pair<double, double> check_decay(GroundStateRecord& record, double envelope_ratio_max = 50.0);

struct NondegeneracyOptions {
    int k_eig = 4;
    double kernel_tol = 1e-6;
    double lambda_shift = 0.0;  // adds a constant to L0 (contrast case)
    int max_lanczos = 600;
};

struct NondegeneracyReport {
    std::vector<double> eigenvalues;  // k_eig smallest in magnitude, sorted by |value|
    std::vector<double> residuals;
    int kernel_dim = 0;
    // For each near-zero eigenvector, the norm of its projection onto span{d omega / dx_n}.
    std::vector<double> kernel_overlaps;
    double smallest_abs_eigenvalue = 0.0;
};

// Linearized operator L0 = (-Delta)^alpha + lambda - (2p+1) mu omega^{2p}, matrix free.
NondegeneracyReport check_nondegeneracy(GroundStateRecord& record, const NondegeneracyOptions& opts = {});

// ||omega||^2_lambda = [omega]^2_alpha + lambda |omega|^2_2.
double scalar_norm_sq(const GroundStateRecord& record);

// Radial profile r -> omega(r) obtained by band-limited interpolation along x_1.
class RadialProfile {
public:
    explicit RadialProfile(const GroundStateRecord& record, int upsample = 8);
    double operator()(double r) const;
    double max_radius() const { return max_radius_; }

private:
    std::vector<double> table_;
    double step_ = 0.0;
    double max_radius_ = 0.0;
    double decay_power_ = 1.0;
};

// The two limit ground states used to build trial functions for a model.
struct LimitPair {
    GroundStateRecord w1;
    GroundStateRecord w2;
    RadialProfile profile1;
    RadialProfile profile2;

    LimitPair(GroundStateRecord a, GroundStateRecord b);
    double alpha_sum() const { return w1.alpha_hat + w2.alpha_hat; }
};

}  // namespace fracnls
