#pragma once

#include <memory>
#include <utility>

#include "fracnls/model.hpp"
#include "fracnls/spectral.hpp"

namespace fracnls {

// A validated model together with its sampled potentials and the spectral
// operator for its grid. Shared read-only by every state built on it.
struct Problem {
    ModelSpec model;
    SpectralOperator op;
    SampledPotentials fields;
    double seminorm_coef = 1.0;  // eps^{2 alpha} (physical frame) or 1 (rescaled)
    double node_measure = 1.0;   // physical volume carried by one grid node
    std::vector<double> precond1;  // (coef |xi|^{2 alpha} + lambda_1)^{-1}
    std::vector<double> precond2;

    explicit Problem(const ModelSpec& m);

    const GridSpec& grid() const { return model.grid; }
    double lambda1() const { return model.potential1.lambda_floor; }
    double lambda2() const { return model.potential2.lambda_floor; }
    double eps_n() const { return std::pow(model.epsilon, model.dim()); }
};

using ProblemPtr = std::shared_ptr<const Problem>;
ProblemPtr make_problem(const ModelSpec& model);

struct FieldPair {
    Field u;
    Field v;
};

// Cached quantities, all in physical units.
struct PairCache {
    double norm_u_sq = 0.0;  // ||u||^2_{V1} with eps^{2 alpha} on the seminorm
    double norm_v_sq = 0.0;
    double A = 0.0;          // integral of (u+)^{2p+2}
    double B = 0.0;
    double L = 0.0;          // integral of beta (u+)^{q+1} (v+)^{q+1}
};

// Candidate (u, v). The cache is recomputed eagerly on construction and on
// every write, so concurrent readers always see consistent values.
class PairState {
public:
    PairState(ProblemPtr problem, Field u, Field v);

    const Field& u() const { return u_; }
    const Field& v() const { return v_; }
    const PairCache& cache() const { return cache_; }
    const ProblemPtr& problem() const { return problem_; }
    double norm_h_sq() const { return cache_.norm_u_sq + cache_.norm_v_sq; }

    void set(Field u, Field v);
    void set_u(Field u);
    void set_v(Field v);
    // (s u, t v); the cache is rescaled by homogeneity rather than recomputed.
    PairState scaled(double s, double t) const;

private:
    void recompute();

    ProblemPtr problem_;
    Field u_;
    Field v_;
    PairCache cache_;
};

PairCache compute_cache(const Problem& problem, const Field& u, const Field& v);

// J_eps(u, v) in physical units.
double energy(const Problem& problem, const PairState& state);
// eps^{-N} J_eps(u, v); equals the rescaled functional of (u(eps .), v(eps .)).
double scaled_energy(const Problem& problem, const PairState& state);
double energy_from_cache(const ModelSpec& model, const PairCache& c);

// Pointwise L2 gradient of J_eps in frame units: the derivative in direction
// (phi, psi) is pair_inner(problem, gradient, (phi, psi)).
FieldPair gradient(const Problem& problem, const PairState& state);
// Physical-measure inner product sum over both components.
double pair_inner(const Problem& problem, const FieldPair& a, const FieldPair& b);
double field_inner(const Problem& problem, const Field& a, const Field& b);

// (r1, r2) = (||u||^2 - mu1 A - L, ||v||^2 - mu2 B - L); TrivialComponent if A or B is 0.
std::pair<double, double> nehari_residuals(const Problem& problem, const PairState& state);

// Nehari identity value p/(2p+2) ||(u,v)||_H^2 + (q-p)/((p+1)(q+1)) L.
double nehari_energy_identity(const ModelSpec& model, const PairCache& c);

}  // namespace fracnls
