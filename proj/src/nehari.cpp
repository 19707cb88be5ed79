#include "fracnls/nehari.hpp"

#include <algorithm>
#include <cmath>

#include "fracnls/errors.hpp"
#include "fracnls/kernels.hpp"
#include "fracnls/spectral.hpp"

namespace fracnls {

double scalar_nehari_scale(double norm_sq, double power_integral, double mu, double p) {
    if (!(power_integral > 0.0)) throw Error(ErrorKind::TrivialComponent, "positive part vanishes; no Nehari scaling");
    return std::pow(norm_sq / (mu * power_integral), 1.0 / (2.0 * p));
}

double project_single(const Problem& problem, const Field& u, const Field& potential, double mu) {
    require_same_grid(u, potential, "project_single");
    const double mf = problem.model.measure_factor();
    const double norm = mf * (problem.seminorm_coef * problem.op.seminorm_sq(u) + weighted_l2(u, potential));
    const double a = problem.node_measure * kernels::positive_power(u.span(), 2.0 * problem.model.p + 2.0);
    return scalar_nehari_scale(norm, a, mu, problem.model.p);
}

namespace {

struct Residual {
    double g1, g2;      // residuals divided by s^2, t^2
    double j11, j12, j21, j22;  // derivatives w.r.t. (log s, log t)
};

Residual evaluate(const ModelSpec& m, const PairCache& c, double s, double t) {
    const double p = m.p, q = m.q;
    const double self1 = m.mu1 * c.A * std::pow(s, 2.0 * p);
    const double self2 = m.mu2 * c.B * std::pow(t, 2.0 * p);
    const double cross1 = c.L * std::pow(s, q - 1.0) * std::pow(t, q + 1.0);
    const double cross2 = c.L * std::pow(s, q + 1.0) * std::pow(t, q - 1.0);
    Residual r;
    r.g1 = c.norm_u_sq - self1 - cross1;
    r.g2 = c.norm_v_sq - self2 - cross2;
    r.j11 = -2.0 * p * self1 - (q - 1.0) * cross1;
    r.j12 = -(q + 1.0) * cross1;
    r.j21 = -(q + 1.0) * cross2;
    r.j22 = -2.0 * p * self2 - (q - 1.0) * cross2;
    return r;
}

double merit(const Residual& r, const PairCache& c) { return std::hypot(r.g1 / c.norm_u_sq, r.g2 / c.norm_v_sq); }

}  // namespace

NehariScales project_pair(const Problem& problem, const PairState& state, const ProjectionOptions& opts) {
    const auto& m = problem.model;
    const auto& c = state.cache();
    if (!(c.A > 0.0) || !(c.B > 0.0))
        throw Error(ErrorKind::TrivialComponent, "project_pair: a component has vanishing positive part");

    double s = scalar_nehari_scale(c.norm_u_sq, c.A, m.mu1, m.p);
    double t = scalar_nehari_scale(c.norm_v_sq, c.B, m.mu2, m.p);
    Residual r = evaluate(m, c, s, t);
    double f = merit(r, c);
    int it = 0;
    for (; it < opts.max_iter && f > opts.tol; ++it) {
        const double det = r.j11 * r.j22 - r.j12 * r.j21;
        if (std::abs(det) < opts.det_tol * c.norm_u_sq * c.norm_v_sq)
            throw Error(ErrorKind::DegenerateCoupling, "project_pair: constraint Jacobian is singular");
        const double da = -(r.j22 * r.g1 - r.j12 * r.g2) / det;
        const double db = -(-r.j21 * r.g1 + r.j11 * r.g2) / det;
        double step = 1.0;
        bool accepted = false;
        for (int halvings = 0; halvings < 60; ++halvings, step *= 0.5) {
            const double s_try = s * std::exp(step * da);
            const double t_try = t * std::exp(step * db);
            const Residual r_try = evaluate(m, c, s_try, t_try);
            const double f_try = merit(r_try, c);
            if (f_try < f) {
                s = s_try;
                t = t_try;
                r = r_try;
                f = f_try;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    // Residual of the normalized constraint at the floating-point floor counts as converged.
    if (f > std::max(opts.tol, 1e-11))
        throw Error(ErrorKind::NoConvergence, "project_pair: Newton iteration did not converge (residual " +
                                                  std::to_string(f) + ")");

    PairCache projected = c;
    projected.norm_u_sq *= s * s;
    projected.norm_v_sq *= t * t;
    projected.A *= std::pow(s, 2.0 * m.p + 2.0);
    projected.B *= std::pow(t, 2.0 * m.p + 2.0);
    projected.L *= std::pow(s * t, m.q + 1.0);
    NehariScales out;
    out.s = s;
    out.t = t;
    out.iterations = it;
    out.jacobian_det = constraint_jacobian(m, projected).det;
    return out;
}

ConstraintJacobian constraint_jacobian(const ModelSpec& model, const PairCache& c) {
    const double p = model.p, q = model.q;
    ConstraintJacobian j;
    j.Lb = c.L;
    j.K1 = 2.0 * p * model.mu1 * c.A + (q - 1.0) * c.L;
    j.K2 = 2.0 * p * model.mu2 * c.B + (q - 1.0) * c.L;
    j.Gamma = 4.0 * p * p * model.mu1 * model.mu2 * c.A * c.B - 4.0 * q * c.L * c.L +
              2.0 * p * (q - 1.0) * c.L * (model.mu1 * c.A + model.mu2 * c.B);
    j.det = j.K1 * j.K2 - (q + 1.0) * (q + 1.0) * c.L * c.L;
    return j;
}

std::pair<double, double> constraint_derivative(const Problem& problem, const PairState& state,
                                                const FieldPair& direction) {
    const Field& u = state.u();
    const Field& v = state.v();
    require_same_grid(u, direction.u, "constraint_derivative");
    require_same_grid(v, direction.v, "constraint_derivative");
    const auto& m = problem.model;
    const double c = problem.seminorm_coef;
    const Field lap_u = problem.op.apply(u);
    const Field lap_v = problem.op.apply(v);
    const double p = m.p, q = m.q;
    double psi1 = 0.0, psi2 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double up = std::max(u[i], 0.0);
        const double vp = std::max(v[i], 0.0);
        const double beta = problem.fields.beta[i];
        const double uq = up > 0.0 ? std::pow(up, q) : 0.0;
        const double vq = vp > 0.0 ? std::pow(vp, q) : 0.0;
        // Derivative of L_beta in direction (phi, psi).
        const double dl = (q + 1.0) * beta * (uq * vq * vp * direction.u[i] + uq * up * vq * direction.v[i]);
        const double lin_u = 2.0 * (c * lap_u[i] + problem.fields.v1[i] * u[i]);
        const double lin_v = 2.0 * (c * lap_v[i] + problem.fields.v2[i] * v[i]);
        const double self_u = (2.0 * p + 2.0) * m.mu1 * (up > 0.0 ? std::pow(up, 2.0 * p + 1.0) : 0.0);
        const double self_v = (2.0 * p + 2.0) * m.mu2 * (vp > 0.0 ? std::pow(vp, 2.0 * p + 1.0) : 0.0);
        psi1 += (lin_u - self_u) * direction.u[i] - dl;
        psi2 += (lin_v - self_v) * direction.v[i] - dl;
    }
    return {problem.node_measure * psi1, problem.node_measure * psi2};
}

double rayleigh_quotient(const GroundStateRecord& record, const Field& w) {
    const SpectralOperator op(w.grid, record.alpha);
    const double norm = op.seminorm_sq(w) + record.lambda * inner(w, w);
    const double a = w.grid.cell_volume() * kernels::positive_power(w.span(), 2.0 * record.p + 2.0);
    if (!(a > 0.0)) throw Error(ErrorKind::TrivialComponent, "rayleigh_quotient: positive part vanishes");
    return norm / std::pow(a, 1.0 / (record.p + 1.0));
}

double sobolev_constant(const GroundStateRecord* record) {
    if (record == nullptr || record->omega.size() == 0)
        throw Error(ErrorKind::MissingGroundState, "sobolev_constant needs a solved ground state");
    return rayleigh_quotient(*record, record->omega);
}

double energy_gap_delta(const GapInputs& in, double sigma) {
    const double p = in.p;
    const double upper = (2.0 * p + 2.0) * std::sqrt(in.alpha_hat1 * in.alpha_hat2);
    if (!(sigma > 0.0 && sigma < upper))
        throw Error(ErrorKind::SigmaOutOfRange,
                    "sigma must lie in (0, " + std::to_string(upper) + "), got " + std::to_string(sigma));
    const double lead = (2.0 * p + 2.0) / p;
    const double r1 = std::pow(in.S1, p + 1.0) / (in.mu1 * std::pow(lead * in.alpha_hat1 + sigma, p));
    const double r2 = std::pow(in.S2, p + 1.0) / (in.mu2 * std::pow(lead * in.alpha_hat2 + sigma, p));
    return p * sigma / (p + 1.0) * std::min(1.0, 0.5 * std::min(r1, r2));
}

}  // namespace fracnls
