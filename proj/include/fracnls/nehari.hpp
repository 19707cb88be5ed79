#pragma once

#include "fracnls/energy.hpp"
#include "fracnls/groundstate.hpp"

namespace fracnls {

struct NehariScales {
    double s = 1.0;
    double t = 1.0;
    double jacobian_det = 0.0;  // K1 K2 - (q+1)^2 L^2 at the projected state
    int iterations = 0;
};

struct ProjectionOptions {
    int max_iter = 50;
    double det_tol = 1e-12;  // relative to (||u||^2 ||v||^2)
    double tol = 1e-14;      // relative residual
};

// s with s^{2p} = ||w||^2 / (mu * int (w+)^{2p+2}).
double scalar_nehari_scale(double norm_sq, double power_integral, double mu, double p);

// Scalar retraction for a single equation with potential `potential`.
double project_single(const Problem& problem, const Field& u, const Field& potential, double mu);

// Solves F1 = F2 = 0 for (s, t) by damped Newton in (log s, log t), starting
// from the decoupled scalar projections.
NehariScales project_pair(const Problem& problem, const PairState& state, const ProjectionOptions& opts = {});

struct ConstraintJacobian {
    double K1 = 0.0;
    double K2 = 0.0;
    double Lb = 0.0;
    double Gamma = 0.0;
    double det = 0.0;  // K1 K2 - (q+1)^2 Lb^2
};

ConstraintJacobian constraint_jacobian(const ModelSpec& model, const PairCache& cache);

// Directional derivatives (Psi1, Psi2) of the two Nehari constraint functions.
std::pair<double, double> constraint_derivative(const Problem& problem, const PairState& state,
                                                const FieldPair& direction);

// Rayleigh quotient ||w||^2_lambda / (int (w+)^{2p+2})^{1/(p+1)} of the ground state.
double sobolev_constant(const GroundStateRecord* record);
double rayleigh_quotient(const GroundStateRecord& record, const Field& w);

struct GapInputs {
    double p = 0.5;
    double mu1 = 1.0;
    double mu2 = 1.0;
    double S1 = 1.0;
    double S2 = 1.0;
    double alpha_hat1 = 1.0;
    double alpha_hat2 = 1.0;
};

// Energy gap delta-bar(sigma) for 0 < sigma < (2p+2) sqrt(alpha_hat1 alpha_hat2).
double energy_gap_delta(const GapInputs& in, double sigma);

}  // namespace fracnls
