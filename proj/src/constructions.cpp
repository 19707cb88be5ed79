#include "fracnls/constructions.hpp"

#include <cmath>
#include <string>

#include "fracnls/errors.hpp"

namespace fracnls {

double CutoffSpec::operator()(double r) const {
    if (r <= inner_radius) return 1.0;
    if (r >= outer_radius) return 0.0;
    const double t = (r - inner_radius) / (outer_radius - inner_radius);
    return 1.0 - t * t * (3.0 - 2.0 * t);
}

void CutoffSpec::validate() const {
    if (!(inner_radius > 0.0 && outer_radius > inner_radius))
        throw Error(ErrorKind::InvalidModel, "cutoff radii must satisfy 0 < inner < outer (inner " +
                                                 std::to_string(inner_radius) + ", outer " +
                                                 std::to_string(outer_radius) + ")");
    if (max_slope() > 2.0) throw Error(ErrorKind::InvalidModel, "cutoff ramp is steeper than 2");
}

CutoffSpec eps_cutoff(double eps) {
    const double outer = 1.0 / (3.0 * std::sqrt(eps));
    CutoffSpec c{CutoffKind::eps_cutoff, outer - 1.0, outer};
    c.validate();
    return c;
}

CutoffSpec r_cutoff(double R) {
    CutoffSpec c{CutoffKind::R_cutoff, R - 1.0, R};
    c.validate();
    return c;
}

CutoffSpec seed_cutoff(double radius) {
    CutoffSpec c{CutoffKind::seed, radius - 1.0, radius};
    c.validate();
    return c;
}

Field place_spike(const ModelSpec& model, const RadialProfile& profile, const Point& center, const CutoffSpec& cutoff) {
    const auto& g = model.grid;
    const double ls = model.length_scale();
    const double eps = model.epsilon;
    const double radius = cutoff.outer_radius * eps / ls;  // frame units
    const Point c = model.to_frame(center);
    for (int d = 0; d < g.dim; ++d)
        if (c[d] - radius < -g.half_width || c[d] + radius > g.half_width)
            throw Error(ErrorKind::SpikeOverflow, "spike support of radius " + std::to_string(radius) +
                                                      " around frame point " + std::to_string(c[d]) +
                                                      " leaves the box");
    Field out(g);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double r = norm(g.node(i) - c) * ls / eps;
        const double psi = cutoff(r);
        out[i] = psi > 0.0 ? psi * profile(r) : 0.0;
    }
    return out;
}

bool supports_disjoint(const ModelSpec& model, const Point& c1, const Point& c2, const CutoffSpec& cutoff) {
    return norm(c1 - c2) > 2.0 * cutoff.outer_radius * model.epsilon;
}

Point well_center(const PotentialSpec& potential, int index) {
    if (potential.wells.empty() && index == 1) return {0.0, 0.0, 0.0};
    if (index < 1 || index > static_cast<int>(potential.wells.size()))
        throw Error(ErrorKind::InvalidModel, "well index " + std::to_string(index) + " out of range");
    return potential.wells[index - 1].center;
}

namespace {

void require_matching(const ModelSpec& m, const LimitPair& limits) {
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };
    if (!close(limits.w1.lambda, m.potential1.lambda_floor) || !close(limits.w2.lambda, m.potential2.lambda_floor) ||
        !close(limits.w1.mu, m.mu1) || !close(limits.w2.mu, m.mu2) || !close(limits.w1.p, m.p) ||
        !close(limits.w1.alpha, m.alpha))
        throw Error(ErrorKind::MissingGroundState, "ground states do not match the model parameters");
}

PairState pair_at(const ProblemPtr& problem, const LimitPair& limits, const Point& cu, const Point& cv,
                  const CutoffSpec& cutoff) {
    const auto& m = problem->model;
    require_matching(m, limits);
    return PairState(problem, place_spike(m, limits.profile1, cu, cutoff), place_spike(m, limits.profile2, cv, cutoff));
}

}  // namespace

PairState build_spike_pair(const ProblemPtr& problem, const LimitPair& limits, int i, int j, const Point& e,
                           std::optional<CutoffSpec> cutoff) {
    const auto& m = problem->model;
    const Point xe = (0.5 * std::sqrt(m.epsilon)) * e;
    const CutoffSpec c = cutoff ? *cutoff : eps_cutoff(m.epsilon);
    return pair_at(problem, limits, well_center(m.potential1, i) - xe, well_center(m.potential2, j) + xe, c);
}

PairState build_homotopy_pair(const ProblemPtr& problem, const LimitPair& limits, int i, int j, const Point& e,
                              double theta, std::optional<CutoffSpec> cutoff) {
    if (!(theta >= 0.5 && theta < 1.0)) throw Error(ErrorKind::InvalidModel, "theta must lie in [1/2, 1)");
    const auto& m = problem->model;
    // The scaled offset e / (4 sqrt(eps) (1 - theta)) is eps times this physical shift.
    const Point shift = (std::sqrt(m.epsilon) / (4.0 * (1.0 - theta))) * e;
    const CutoffSpec c = cutoff ? *cutoff : eps_cutoff(m.epsilon);
    return pair_at(problem, limits, well_center(m.potential1, i) - shift, well_center(m.potential2, j) + shift, c);
}

PairState build_far_pair(const ProblemPtr& problem, const LimitPair& limits, double R, const Point& e) {
    if (!(R > 1.0)) throw Error(ErrorKind::InvalidModel, "far pair needs R > 1");
    return pair_at(problem, limits, (-R) * e, R * e, r_cutoff(R));
}

}  // namespace fracnls
