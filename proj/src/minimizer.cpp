#include "fracnls/minimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <random>

#include "fracnls/errors.hpp"
#include "fracnls/kernels.hpp"

namespace fracnls {

std::string to_string(Classification c) {
    switch (c) {
        case Classification::unconstrained: return "unconstrained";
        case Classification::localized_min: return "localized_min";
        case Classification::candidate_least_energy: return "candidate_least_energy";
        case Classification::second_solution: return "second_solution";
        case Classification::boundary_suspect: return "boundary_suspect";
    }
    return "unknown";
}

std::string to_string(SeedKind k) {
    switch (k) {
        case SeedKind::spike: return "spike";
        case SeedKind::homotopy: return "homotopy";
        case SeedKind::far_pair: return "far_pair";
        case SeedKind::given: return "given";
    }
    return "unknown";
}

void SolveOptions::validate() const {
    if (!(tol_grad > 0.0) || !(tol_energy > 0.0)) throw Error(ErrorKind::ConfigError, "solver tolerances must be positive");
    if (max_iter < 1) throw Error(ErrorKind::ConfigError, "max_iter must be at least 1");
    if (history < 0) throw Error(ErrorKind::ConfigError, "history must be nonnegative");
}

Point physical_barycenter(const ModelSpec& model, const Field& u) { return model.to_physical(barycenter(u)); }

double dual_gradient_norm(const Problem& problem, const PairState& state) {
    const FieldPair g = gradient(problem, state);
    const FieldPair pg{problem.op.apply_multiplier(g.u, problem.precond1), problem.op.apply_multiplier(g.v, problem.precond2)};
    return std::sqrt(std::max(pair_inner(problem, g, pg), 0.0) / state.norm_h_sq());
}

double pair_distance_h(const Problem& problem, const PairState& a, const PairState& b) {
    const PairCache c = compute_cache(problem, a.u() - b.u(), a.v() - b.v());
    return std::sqrt(c.norm_u_sq + c.norm_v_sq);
}

namespace {

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

struct Penalty {
    Cube c1;
    Cube c2;
    double weight = 0.0;
};

struct Eval {
    PairState state;
    NehariScales scales;
    double energy = 0.0;  // J_eps, physical
    double value = 0.0;   // J_eps + penalty
    FieldPair grad;
    Point phi_u{0.0, 0.0, 0.0};
    Point phi_v{0.0, 0.0, 0.0};
    bool penalty_active = false;
};

void axpy(double a, const FieldPair& x, FieldPair& y) {
    for (std::size_t i = 0; i < y.u.size(); ++i) {
        y.u[i] += a * x.u[i];
        y.v[i] += a * x.v[i];
    }
}

FieldPair precondition(const Problem& pb, const FieldPair& g) {
    return {pb.op.apply_multiplier(g.u, pb.precond1), pb.op.apply_multiplier(g.v, pb.precond2)};
}

// Adds w dist^2(Phi(f), cube) and its pointwise gradient.
double add_penalty(const Problem& pb, const Field& f, const Point& phi, const Cube& cube, double weight, Field& grad) {
    const double dist = cube_distance(phi, cube);
    if (dist == 0.0) return 0.0;
    const auto& g = f.grid;
    const double ls = pb.model.length_scale();
    Point proj = phi;
    for (int d = 0; d < g.dim; ++d)
        proj[d] = std::clamp(phi[d], cube.center[d] - cube.half_width, cube.center[d] + cube.half_width);
    const double mass = pb.node_measure * kernels::dot(f.span(), f.span());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Point x = g.node(i);
        double acc = 0.0;
        for (int d = 0; d < g.dim; ++d) acc += (phi[d] - proj[d]) * (ls * x[d] - phi[d]);
        grad[i] += 4.0 * weight * acc * f[i] / mass;
    }
    return weight * dist * dist;
}

Eval evaluate(const ProblemPtr& pb, Field u, Field v, const std::optional<Penalty>& pen) {
    PairState raw(pb, std::move(u), std::move(v));
    const NehariScales sc = project_pair(*pb, raw);
    PairState st = raw.scaled(sc.s, sc.t);
    const double j = energy(*pb, st);
    FieldPair g = gradient(*pb, st);
    const auto& m = pb->model;
    Eval e{std::move(st), sc, j, j, std::move(g)};
    e.phi_u = physical_barycenter(m, e.state.u());
    e.phi_v = physical_barycenter(m, e.state.v());
    if (pen) {
        const double a = add_penalty(*pb, e.state.u(), e.phi_u, pen->c1, pen->weight, e.grad.u);
        const double b = add_penalty(*pb, e.state.v(), e.phi_v, pen->c2, pen->weight, e.grad.v);
        e.value += a + b;
        e.penalty_active = a + b > 0.0;
    }
    return e;
}

Solution run_descent(const ProblemPtr& pb, const PairState& init, const SolveOptions& opts,
                     const std::optional<Penalty>& pen) {
    const Problem& problem = *pb;
    const double scale = problem.eps_n();
    Eval cur = evaluate(pb, init.u(), init.v(), pen);
    Solution sol{cur.state};
    std::deque<std::pair<FieldPair, FieldPair>> memory;  // (s, y)
    std::deque<double> rho;
    double last_decrease = INFINITY;
    int it = 0;
    double gn = 0.0;
    bool stalled = false;
    for (;; ++it) {
        const FieldPair pg = precondition(problem, cur.grad);
        gn = std::sqrt(std::max(pair_inner(problem, cur.grad, pg), 0.0) / cur.state.norm_h_sq());
        if (cur.penalty_active) ++sol.penalty_active_steps;
        if (opts.keep_trace)
            sol.trace.push_back({it, cur.energy / scale, gn, cur.scales.s, cur.scales.t, cur.phi_u, cur.phi_v});
        if (gn <= opts.tol_grad && (it == 0 || last_decrease <= opts.tol_energy)) {
            sol.converged = true;
            break;
        }
        if (it >= opts.max_iter || stalled) break;

        // Two-loop recursion with H0 = gamma P.
        FieldPair q = cur.grad;
        std::vector<double> a(memory.size());
        for (int k = static_cast<int>(memory.size()) - 1; k >= 0; --k) {
            a[k] = rho[k] * pair_inner(problem, memory[k].first, q);
            axpy(-a[k], memory[k].second, q);
        }
        FieldPair r = precondition(problem, q);
        if (!memory.empty()) {
            const auto& [s_last, y_last] = memory.back();
            const double gamma = pair_inner(problem, s_last, y_last) / pair_inner(problem, y_last, precondition(problem, y_last));
            r.u *= gamma;
            r.v *= gamma;
        }
        for (std::size_t k = 0; k < memory.size(); ++k) {
            const double b = rho[k] * pair_inner(problem, memory[k].second, r);
            axpy(a[k] - b, memory[k].first, r);
        }
        double slope = -pair_inner(problem, cur.grad, r);
        if (!(slope < 0.0)) {
            memory.clear();
            rho.clear();
            r = pg;
            slope = -pair_inner(problem, cur.grad, r);
        }

        bool accepted = false;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            double tau = 1.0;
            for (int halving = 0; halving < 40; ++halving, tau *= 0.5) {
                Field u = cur.state.u(), v = cur.state.v();
                for (std::size_t i = 0; i < u.size(); ++i) {
                    u[i] -= tau * r.u[i];
                    v[i] -= tau * r.v[i];
                }
                try {
                    Eval cand = evaluate(pb, std::move(u), std::move(v), pen);
                    if (cand.value <= cur.value + 1e-4 * tau * slope + 1e-14 * std::abs(cur.value)) {
                        FieldPair s{cand.state.u() - cur.state.u(), cand.state.v() - cur.state.v()};
                        FieldPair y{cand.grad.u - cur.grad.u, cand.grad.v - cur.grad.v};
                        const double sy = pair_inner(problem, s, y);
                        if (opts.history > 0 && sy > 1e-12 * std::sqrt(pair_inner(problem, s, s) * pair_inner(problem, y, y))) {
                            memory.emplace_back(std::move(s), std::move(y));
                            rho.push_back(1.0 / sy);
                            if (static_cast<int>(memory.size()) > opts.history) {
                                memory.pop_front();
                                rho.pop_front();
                            }
                        }
                        last_decrease = (cur.value - cand.value) / scale;
                        cur = std::move(cand);
                        accepted = true;
                        break;
                    }
                } catch (const Error& err) {
                    if (err.kind() != ErrorKind::TrivialComponent && err.kind() != ErrorKind::NoConvergence &&
                        err.kind() != ErrorKind::DegenerateCoupling)
                        throw;
                }
            }
            if (!accepted) {
                // Retry once along the plain preconditioned gradient.
                if (memory.empty()) break;
                memory.clear();
                rho.clear();
                r = pg;
                slope = -pair_inner(problem, cur.grad, r);
            }
        }
        if (!accepted) stalled = true;
    }
    sol.state = cur.state;
    sol.scales = cur.scales;
    sol.scaled_level = cur.energy / scale;
    sol.grad_norm = gn;
    sol.phi_u = cur.phi_u;
    sol.phi_v = cur.phi_v;
    sol.h_norm = norm(cur.phi_u - cur.phi_v);
    sol.iterations = it;
    if (!sol.converged)
        sol.warnings.push_back("NoConvergence: gradient norm " + sci(gn) + " after " + std::to_string(it) +
                               " iterations" + (stalled ? " (line search stalled)" : ""));
    return sol;
}

}  // namespace

Solution minimize_on_nehari(const ProblemPtr& problem, const PairState& init, const SolveOptions& opts) {
    opts.validate();
    const auto& c = init.cache();
    if (!(c.A > 0.0) || !(c.B > 0.0))
        throw Error(ErrorKind::TrivialComponent, "minimize_on_nehari: initial pair has a vanishing positive part");
    return run_descent(problem, init, opts, std::nullopt);
}

CutoffSpec seed_cutoff_for(const ModelSpec& model, const Point& cu, const Point& cv, const SolveOptions& opts) {
    if (opts.seed_cutoff_radius > 0.0) return seed_cutoff(opts.seed_cutoff_radius);
    const double scaled_half = model.grid.half_width * model.length_scale() / model.epsilon;
    double room = 0.4 * scaled_half;
    for (const Point* c : {&cu, &cv})
        for (int d = 0; d < model.dim(); ++d) room = std::min(room, scaled_half - std::abs((*c)[d]) / model.epsilon);
    if (model.epsilon < 1.0 / 9.0) {
        const double nominal = 1.0 / (3.0 * std::sqrt(model.epsilon));
        if (nominal <= room) return eps_cutoff(model.epsilon);
    }
    return seed_cutoff(room);
}

namespace {

void perturb(PairState& st, std::uint64_t seed) {
    if (seed == 0) return;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1e-3);
    Field u = st.u(), v = st.v();
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] *= 1.0 + noise(rng);
        v[i] *= 1.0 + noise(rng);
    }
    st.set(std::move(u), std::move(v));
}

}  // namespace

Solution minimize_localized(const ProblemPtr& problem, const LocalizationSpec& localization, const LimitPair& limits,
                            int i, int j, const SolveOptions& opts, const Point& e) {
    opts.validate();
    const auto& m = problem->model;
    const double s = localization.cube_half_width;
    if (!(s > 0.0)) throw Error(ErrorKind::InvalidModel, "minimize_localized: cube half-width must be positive");
    const Point z1 = well_center(m.potential1, i);
    const Point z2 = well_center(m.potential2, j);
    const Point xe = (0.5 * std::sqrt(m.epsilon)) * e;
    const CutoffSpec cutoff = seed_cutoff_for(m, z1 - xe, z2 + xe, opts);
    PairState seed = build_spike_pair(problem, limits, i, j, e, cutoff);
    perturb(seed, opts.rng_seed);

    Penalty pen{Cube{z1, s}, Cube{z2, s},
                opts.penalty_weight > 0.0 ? opts.penalty_weight : 10.0 * limits.alpha_sum() * problem->eps_n() / (s * s)};
    Solution penalized = run_descent(problem, seed, opts, pen);
    Solution sol = run_descent(problem, penalized.state, opts, std::nullopt);
    sol.penalty_active_steps = penalized.penalty_active_steps;
    sol.iterations += penalized.iterations;
    if (opts.keep_trace) {
        for (auto& row : sol.trace) row.iteration += penalized.iterations + 1;
        penalized.trace.insert(penalized.trace.end(), sol.trace.begin(), sol.trace.end());
        sol.trace = std::move(penalized.trace);
    }
    sol.localized_pair = std::make_pair(i, j);

    const double du = cube_distance(sol.phi_u, pen.c1);
    const double dv = cube_distance(sol.phi_v, pen.c2);
    if (du > 0.0 || dv > 0.0)
        throw Error(ErrorKind::ConstraintEscape, "minimize_localized: barycenter left its cube after refinement (distances " +
                                                     sci(du) + ", " + sci(dv) + ")");
    const double cell = m.physical_spacing();
    sol.classification = (depth_in_cube(sol.phi_u, pen.c1, m.dim()) <= cell || depth_in_cube(sol.phi_v, pen.c2, m.dim()) <= cell)
                             ? Classification::boundary_suspect
                             : Classification::localized_min;
    for (const Field* f : {&sol.state.u(), &sol.state.v()})
        if (!locate(*f).reliable) sol.warnings.push_back("BarycenterUnreliable: boundary mass above 1e-3");
    return sol;
}

Solution find_second_solution(const ProblemPtr& problem, const LocalizationSpec& localization,
                              const LimitPair& limits, int i, const Solution& first, const SolveOptions& opts,
                              const Point& e) {
    int j = 0;
    for (int k = 0; k < localization.shared_minima_count && k < static_cast<int>(localization.pairs.size()); ++k)
        if (localization.pairs[k].first == i) j = localization.pairs[k].second;
    if (j == 0) throw Error(ErrorKind::InvalidModel, "find_second_solution: well " + std::to_string(i) + " is not a shared minimum");
    const double sep_tol = 0.1 * std::sqrt(first.state.norm_h_sq());
    std::optional<Solution> best;
    double best_dist = -1.0;
    std::string notes;
    for (const Point& dir : {e, (-1.0) * e}) {
        try {
            Solution cand = minimize_localized(problem, localization, limits, i, j, opts, dir);
            const double dist = pair_distance_h(*problem, cand.state, first.state);
            if (dist > best_dist) {
                best_dist = dist;
                best = std::move(cand);
            }
        } catch (const Error& err) {
            if (err.kind() != ErrorKind::ConstraintEscape) throw;
            notes += std::string(" ") + err.what();
        }
    }
    if (!best || !(best_dist > sep_tol))
        throw Error(ErrorKind::NoSecondSolutionFound, "find_second_solution: both seeds returned within sep_tol " +
                                                          sci(sep_tol) + " of the first solution (max distance " +
                                                          sci(best_dist) + ")" + notes);
    best->classification = Classification::second_solution;
    return std::move(*best);
}

}  // namespace fracnls
