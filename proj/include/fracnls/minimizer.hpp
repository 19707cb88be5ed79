#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fracnls/constructions.hpp"
#include "fracnls/geometry.hpp"
#include "fracnls/nehari.hpp"

namespace fracnls {

enum class SeedKind { spike, homotopy, far_pair, given };
enum class Classification { unconstrained, localized_min, candidate_least_energy, second_solution, boundary_suspect };

std::string to_string(Classification c);
std::string to_string(SeedKind k);

struct SolveOptions {
    double tol_grad = 1e-8;     // dual gradient norm relative to ||(u,v)||_H
    double tol_energy = 1e-12;  // decrease of eps^{-N} J per accepted step
    int max_iter = 20000;
    double penalty_weight = 0.0;  // <= 0: 10 (alpha_1 + alpha_2) eps^N / s^2
    SeedKind seed_spec = SeedKind::spike;
    std::uint64_t rng_seed = 0;  // nonzero: multiplicative 1e-3 noise on the seed
    int history = 8;
    double seed_cutoff_radius = 0.0;  // <= 0: eps cutoff when valid, otherwise the widest fitting seed cutoff
    bool keep_trace = true;

    void validate() const;
};

struct TraceRow {
    int iteration = 0;
    double scaled_energy = 0.0;
    double grad_norm = 0.0;
    double s = 1.0;
    double t = 1.0;
    Point phi_u{0.0, 0.0, 0.0};
    Point phi_v{0.0, 0.0, 0.0};
};

struct Solution {
    explicit Solution(PairState s) : state(std::move(s)) {}

    PairState state;
    double scaled_level = 0.0;
    NehariScales scales;
    double grad_norm = 0.0;
    std::optional<std::pair<int, int>> localized_pair;
    Point phi_u{0.0, 0.0, 0.0};  // physical
    Point phi_v{0.0, 0.0, 0.0};
    double h_norm = 0.0;
    Classification classification = Classification::unconstrained;
    int iterations = 0;
    int penalty_active_steps = 0;
    bool converged = false;
    std::vector<TraceRow> trace;
    std::vector<std::string> warnings;
};

// Dual norm sqrt(<g, P g>) of the gradient relative to ||(u,v)||_H.
double dual_gradient_norm(const Problem& problem, const PairState& state);
// ||(a - b)||_H.
double pair_distance_h(const Problem& problem, const PairState& a, const PairState& b);
// Physical barycenter of a frame field.
Point physical_barycenter(const ModelSpec& model, const Field& u);

// Preconditioned L-BFGS descent with Nehari retraction. A non-converged run is
// returned with converged = false and a NoConvergence warning.
Solution minimize_on_nehari(const ProblemPtr& problem, const PairState& init, const SolveOptions& opts = {});

// Cutoff used to seed localized runs at the model's epsilon.
CutoffSpec seed_cutoff_for(const ModelSpec& model, const Point& cu, const Point& cv, const SolveOptions& opts);

// Minimizes over N_{i,j}(eps) by a barycenter penalty followed by an unpenalized
// refinement; throws ConstraintEscape if the final barycenters leave their cubes.
Solution minimize_localized(const ProblemPtr& problem, const LocalizationSpec& localization, const LimitPair& limits,
                            int i, int j, const SolveOptions& opts = {}, const Point& e = {1.0, 0.0, 0.0});

// Runs minimize_localized on the shared pair (i, j) listed in `localization` from the
// seeds e and -e and returns the run farthest from `first` in H; throws
// NoSecondSolutionFound unless that distance exceeds 0.1 ||first||_H.
Solution find_second_solution(const ProblemPtr& problem, const LocalizationSpec& localization,
                              const LimitPair& limits, int i, const Solution& first, const SolveOptions& opts = {},
                              const Point& e = {1.0, 0.0, 0.0});

}  // namespace fracnls
