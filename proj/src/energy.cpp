#include "fracnls/energy.hpp"

#include <cmath>

#include "fracnls/errors.hpp"
#include "fracnls/kernels.hpp"

namespace fracnls {

Problem::Problem(const ModelSpec& m)
    : model(m), op(m.grid, m.alpha), fields(sample_potentials(m)) {
    seminorm_coef = m.seminorm_coefficient();
    node_measure = m.grid.cell_volume() * m.measure_factor();
    const double c = seminorm_coef;
    precond1 = op.multiplier_from_symbol([&](double s) { return 1.0 / (c * s + m.potential1.lambda_floor); });
    precond2 = op.multiplier_from_symbol([&](double s) { return 1.0 / (c * s + m.potential2.lambda_floor); });
}

ProblemPtr make_problem(const ModelSpec& model) { return std::make_shared<const Problem>(model); }

PairCache compute_cache(const Problem& problem, const Field& u, const Field& v) {
    require_same_grid(u, v, "PairState");
    if (!(u.grid == problem.grid())) throw Error(ErrorKind::GridMismatch, "PairState: fields not on the model grid");
    const double mf = problem.model.measure_factor();
    const double c = problem.seminorm_coef;
    PairCache out;
    out.norm_u_sq = mf * (c * problem.op.seminorm_sq(u) + weighted_l2(u, problem.fields.v1));
    out.norm_v_sq = mf * (c * problem.op.seminorm_sq(v) + weighted_l2(v, problem.fields.v2));
    const auto s = kernels::pair_sums(u.span(), v.span(), problem.fields.beta.span(), problem.model.p, problem.model.q);
    out.A = problem.node_measure * s.a;
    out.B = problem.node_measure * s.b;
    out.L = problem.node_measure * s.coupling;
    return out;
}

PairState::PairState(ProblemPtr problem, Field u, Field v)
    : problem_(std::move(problem)), u_(std::move(u)), v_(std::move(v)) {
    recompute();
}

void PairState::recompute() { cache_ = compute_cache(*problem_, u_, v_); }

void PairState::set(Field u, Field v) {
    u_ = std::move(u);
    v_ = std::move(v);
    recompute();
}

void PairState::set_u(Field u) {
    u_ = std::move(u);
    recompute();
}

void PairState::set_v(Field v) {
    v_ = std::move(v);
    recompute();
}

PairState PairState::scaled(double s, double t) const {
    PairState out = *this;
    out.u_ *= s;
    out.v_ *= t;
    const auto& m = problem_->model;
    out.cache_.norm_u_sq *= s * s;
    out.cache_.norm_v_sq *= t * t;
    out.cache_.A *= std::pow(s, 2.0 * m.p + 2.0);
    out.cache_.B *= std::pow(t, 2.0 * m.p + 2.0);
    out.cache_.L *= std::pow(s * t, m.q + 1.0);
    return out;
}

double energy_from_cache(const ModelSpec& model, const PairCache& c) {
    const double p = model.p;
    const double q = model.q;
    return 0.5 * (c.norm_u_sq + c.norm_v_sq) - (model.mu1 * c.A + model.mu2 * c.B) / (2.0 * p + 2.0) -
           c.L / (q + 1.0);
}

double energy(const Problem& problem, const PairState& state) {
    if (!(state.u().grid == problem.grid())) throw Error(ErrorKind::GridMismatch, "energy: state not on model grid");
    return energy_from_cache(problem.model, state.cache());
}

double scaled_energy(const Problem& problem, const PairState& state) { return energy(problem, state) / problem.eps_n(); }

FieldPair gradient(const Problem& problem, const PairState& state) {
    const Field& u = state.u();
    const Field& v = state.v();
    if (!(u.grid == problem.grid())) throw Error(ErrorKind::GridMismatch, "gradient: state not on model grid");
    const auto& m = problem.model;
    FieldPair g{problem.op.apply(u), problem.op.apply(v)};
    Field fu(u.grid), fv(v.grid);
    kernels::pair_forces(u.span(), v.span(), problem.fields.beta.span(), m.mu1, m.mu2, m.p, m.q, fu.span(), fv.span());
    const double c = problem.seminorm_coef;
    for (std::size_t i = 0; i < u.size(); ++i) {
        g.u.values[i] = c * g.u.values[i] + problem.fields.v1.values[i] * u.values[i] - fu.values[i];
        g.v.values[i] = c * g.v.values[i] + problem.fields.v2.values[i] * v.values[i] - fv.values[i];
    }
    return g;
}

double field_inner(const Problem& problem, const Field& a, const Field& b) {
    require_same_grid(a, b, "field_inner");
    return problem.node_measure * kernels::dot(a.span(), b.span());
}

double pair_inner(const Problem& problem, const FieldPair& a, const FieldPair& b) {
    return field_inner(problem, a.u, b.u) + field_inner(problem, a.v, b.v);
}

std::pair<double, double> nehari_residuals(const Problem& problem, const PairState& state) {
    const auto& c = state.cache();
    if (!(c.A > 0.0) || !(c.B > 0.0))
        throw Error(ErrorKind::TrivialComponent, "nehari_residuals: a component has vanishing positive part");
    const auto& m = problem.model;
    return {c.norm_u_sq - m.mu1 * c.A - c.L, c.norm_v_sq - m.mu2 * c.B - c.L};
}

double nehari_energy_identity(const ModelSpec& model, const PairCache& c) {
    const double p = model.p;
    const double q = model.q;
    return p / (2.0 * p + 2.0) * (c.norm_u_sq + c.norm_v_sq) + (q - p) / ((p + 1.0) * (q + 1.0)) * c.L;
}

}  // namespace fracnls
