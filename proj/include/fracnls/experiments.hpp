#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fracnls/minimizer.hpp"

namespace fracnls {

inline constexpr int kSchemaVersion = 1;

struct GroundStateSettings {
    ScalarSolveOptions solve;
    double envelope_ratio_max = 50.0;
    bool nondegeneracy = true;
    NondegeneracyOptions eig;
};

struct SweepSettings {
    std::vector<double> deltas;  // gap thresholds in scaled energy units
    Point direction{1.0, 0.0, 0.0};
    double concentration_radius = 10.0;
    int tail = 3;  // the gap must decrease over the last `tail` epsilons; 0 disables the check
};

struct MultiplicitySettings {
    double epsilon = 0.0;  // <= 0: the last sweep epsilon
    Point direction{1.0, 0.0, 0.0};
};

struct LeastEnergySettings {
    double epsilon = 1.0;
    std::vector<double> radii{10.0, 20.0, 40.0, 80.0};
    Point direction{1.0, 0.0, 0.0};
    double far_gap_tol = 1e-2;
};

struct ExperimentConfig {
    ModelSpec model;
    std::optional<LocalizationSpec> localization;
    std::vector<double> epsilons;
    std::vector<std::string> experiments;
    SolveOptions solver;
    GroundStateSettings groundstate;
    SweepSettings sweep;
    MultiplicitySettings multiplicity;
    LeastEnergySettings least_energy;
    double gap_sigma = 0.0;  // <= 0: no energy-gap check on runs
    std::string output_dir = "out";
    std::string canonical;  // normalized JSON text, hashed into run identifiers

    void validate() const;
    ModelSpec model_at(double eps) const;
    LocalizationSpec localization_at(double eps) const;
};

struct RunContext {
    std::filesystem::path output;
    int workers = 1;
    bool verbose = false;
    std::ostream* log = nullptr;
};

// Summary of one run as written to runs.jsonl.
struct RunRecord {
    std::string run_id;
    std::string kind;
    double epsilon = 1.0;
    int i = 0;
    int j = 0;
    Point direction{1.0, 0.0, 0.0};
    std::string status = "ok";
    double scaled_level = 0.0;
    double h_norm = 0.0;
    Point phi_u{0.0, 0.0, 0.0};
    Point phi_v{0.0, 0.0, 0.0};
    double concentration_u = 0.0;
    double concentration_v = 0.0;
    std::string classification;
    bool converged = false;
    int iterations = 0;
    double grad_norm = 0.0;
    double coupling_scaled = 0.0;  // eps^{-N} L
    double delta_bar = 0.0;
    bool gap_bound_applies = false;  // eps^{-N} L <= -sigma
    bool gap_bound_holds = true;     // level > alpha_1 + alpha_2 + delta_bar where it applies
    double wall_time = 0.0;
    std::string trace_file;
    std::string field_file;
};

struct ValidateReport {
    HypothesisReport hypotheses;
};

struct GroundStateReport {
    GroundStateRecord w1;
    GroundStateRecord w2;
    std::vector<std::string> notes;
};

struct SweepRow {
    RunRecord record;
    double gap = 0.0;       // scaled level minus (alpha_1 + alpha_2)
    double drift_u = 0.0;   // |Phi(u) - z_{1,i}|, physical
    double drift_v = 0.0;
    double drift_cells = 0.0;  // max drift over the physical grid spacing
};

struct SweepReport {
    std::vector<SweepRow> rows;
    double alpha_sum = 0.0;
    bool tail_decreasing = false;
    std::vector<std::pair<double, bool>> delta_reached;  // (delta, eventually below)
    int gap_bound_violations = 0;
    bool passed = false;
};

struct MultiplicityEntry {
    RunRecord record;
    std::string role;  // "localized" or "second"
    Point h{0.0, 0.0, 0.0};
};

struct MultiplicityReport {
    double epsilon = 0.0;
    std::vector<MultiplicityEntry> entries;
    std::vector<std::string> second_search_notes;  // one per shared pair
    int distinct_count = 0;
    int target_count = 0;
    double min_pair_distance = 0.0;
    double sep_tol = 0.0;
};

struct LeastEnergyRow {
    RunRecord record;
    double R = 0.0;  // 0 for localized runs
    double s = 1.0;
    double t = 1.0;
    double gap = 0.0;
};

struct LeastEnergyReport {
    std::string scenario;  // "i" (V_inf > lambda) or "ii" (V_inf = lambda)
    double alpha_sum = 0.0;
    std::vector<LeastEnergyRow> localized;
    std::vector<LeastEnergyRow> far;
    bool far_strictly_decreasing = false;
    bool far_gap_small = false;
    bool far_below_localized = false;
    bool localized_below_far = false;
    bool passed = false;
};

ValidateReport cmd_validate(const ExperimentConfig& config, const RunContext& ctx);
GroundStateReport cmd_groundstate(const ExperimentConfig& config, const RunContext& ctx);
SweepReport cmd_sweep_energy(const ExperimentConfig& config, const RunContext& ctx);
MultiplicityReport cmd_multiplicity(const ExperimentConfig& config, const RunContext& ctx);
LeastEnergyReport cmd_least_energy(const ExperimentConfig& config, const RunContext& ctx);

// Reads the ground states written by cmd_groundstate; MissingGroundState if absent or stale.
LimitPair load_ground_states(const ExperimentConfig& config, const RunContext& ctx);

}  // namespace fracnls
