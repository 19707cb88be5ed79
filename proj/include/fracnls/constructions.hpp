#pragma once

#include <optional>

#include "fracnls/energy.hpp"
#include "fracnls/groundstate.hpp"

namespace fracnls {

enum class CutoffKind { eps_cutoff, R_cutoff, seed };

// Radial C^1 cutoff: 1 for r <= inner, 0 for r >= outer, cubic smoothstep between.
struct CutoffSpec {
    CutoffKind kind = CutoffKind::seed;
    double inner_radius = 1.0;
    double outer_radius = 2.0;

    double operator()(double r) const;
    double max_slope() const { return 1.5 / (outer_radius - inner_radius); }
    // Throws InvalidModel unless 0 < inner < outer and the slope bound 2 holds.
    void validate() const;
};

// Inner radius 1/(3 sqrt(eps)) - 1, outer 1/(3 sqrt(eps)); invalid once eps >= 1/9.
CutoffSpec eps_cutoff(double eps);
CutoffSpec r_cutoff(double R);
CutoffSpec seed_cutoff(double radius);

// omega((x - c)/eps) psi((x - c)/eps) sampled on the model grid, c physical.
// Throws SpikeOverflow when the cutoff support leaves the grid box.
Field place_spike(const ModelSpec& model, const RadialProfile& profile, const Point& center, const CutoffSpec& cutoff);

// Whether two cutoff supports centered at c1, c2 (physical) are disjoint.
bool supports_disjoint(const ModelSpec& model, const Point& c1, const Point& c2, const CutoffSpec& cutoff);

// Physical location of well i (1-based) of a potential; the origin for a constant potential.
Point well_center(const PotentialSpec& potential, int index);

// u at z_{1,i} - x^eps, v at z_{2,j} + x^eps with x^eps = (sqrt(eps)/2) e.
PairState build_spike_pair(const ProblemPtr& problem, const LimitPair& limits, int i, int j, const Point& e,
                           std::optional<CutoffSpec> cutoff = std::nullopt);

// Offsets e / (4 sqrt(eps) (1 - theta)) in the scaled variable, theta in [1/2, 1).
PairState build_homotopy_pair(const ProblemPtr& problem, const LimitPair& limits, int i, int j, const Point& e,
                              double theta, std::optional<CutoffSpec> cutoff = std::nullopt);

// u at -R e, v at +R e (physical), cut off at radius R in the scaled variable.
PairState build_far_pair(const ProblemPtr& problem, const LimitPair& limits, double R, const Point& e);

}  // namespace fracnls
