#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace fracnls {

// y = A x for a symmetric operator on R^n.
using LinearMap = std::function<void(std::span<const double> x, std::span<double> y)>;

struct MinresResult {
    std::vector<double> x;
    int iterations = 0;
    double residual = 0.0;  // relative to |b|
    bool converged = false;
};

MinresResult minres(const LinearMap& a, std::span<const double> b, double rel_tol, int max_iter);

struct RitzPair {
    double value = 0.0;
    std::vector<double> vector;
    double residual_estimate = 0.0;
};

struct LanczosResult {
    std::vector<RitzPair> pairs;  // sorted by decreasing |value|
    int iterations = 0;
    bool converged = false;
};

// Lanczos with full reorthogonalization for the k eigenvalues of largest magnitude.
LanczosResult lanczos_largest(const LinearMap& a, std::size_t n, int k, int max_iter, double rel_tol,
                              std::uint64_t seed = 1);

}  // namespace fracnls
