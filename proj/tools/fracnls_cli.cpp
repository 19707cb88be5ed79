#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fracnls/errors.hpp"
#include "fracnls/experiments.hpp"
#include "fracnls/io.hpp"

using namespace fracnls;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kHypothesis = 3;
constexpr int kSolverFailure = 4;

int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::InvalidModel:
    case ErrorKind::InvalidGrid:
        return kConfigError;
    case ErrorKind::HypothesisViolation:
        return kHypothesis;
    default:
        return kSolverFailure;
    }
}

void print_sweep(const SweepReport& rep) {
    std::printf("alpha_1 + alpha_2 = %.10f\n", rep.alpha_sum);
    std::printf("%-10s %-3s %-3s %-16s %-12s %-10s %s\n", "eps", "i", "j", "scaled_level", "gap", "drift", "status");
    for (const auto& row : rep.rows)
        std::printf("%-10.6g %-3d %-3d %-16.10f %-12.4e %-10.3g %s\n", row.record.epsilon, row.record.i, row.record.j,
                    row.record.scaled_level, row.gap, row.drift_cells, row.record.status.c_str());
    std::printf("tail decreasing: %s\n", rep.tail_decreasing ? "yes" : "no");
    for (const auto& [delta, reached] : rep.delta_reached)
        std::printf("gap below delta=%g: %s\n", delta, reached ? "yes" : "no");
    std::printf("energy-gap bound violations: %d\n", rep.gap_bound_violations);
}

void print_multiplicity(const MultiplicityReport& rep) {
    std::printf("epsilon = %g\n", rep.epsilon);
    for (const auto& en : rep.entries)
        std::printf("%-9s (%d,%d) level %.10f |h| %.4e %s %s\n", en.role.c_str(), en.record.i, en.record.j,
                    en.record.scaled_level, en.record.h_norm, en.record.classification.c_str(),
                    en.record.status.c_str());
    std::printf("distinct solutions: %d (target %d)\n", rep.distinct_count, rep.target_count);
}

void print_least_energy(const LeastEnergyReport& rep) {
    std::printf("scenario %s, alpha_1 + alpha_2 = %.10f\n", rep.scenario.c_str(), rep.alpha_sum);
    for (const auto& r : rep.localized)
        std::printf("localized (%d,%d) level %.10f gap %.4e %s\n", r.record.i, r.record.j, r.record.scaled_level,
                    r.gap, r.record.classification.c_str());
    for (const auto& r : rep.far)
        std::printf("far R=%-6g level %.10f gap %.4e s %.6f t %.6f\n", r.R, r.record.scaled_level, r.gap, r.s, r.t);
    if (rep.scenario == "ii")
        std::printf("far levels strictly decreasing: %s; gap at largest R small: %s; below localized: %s\n",
                    rep.far_strictly_decreasing ? "yes" : "no", rep.far_gap_small ? "yes" : "no",
                    rep.far_below_localized ? "yes" : "no");
    else
        std::printf("localized minimum below every far pair: %s\n", rep.localized_below_far ? "yes" : "no");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nehari-manifold solver for weakly coupled fractional Schrodinger systems"};
    app.require_subcommand(1);
    std::string config_path;
    std::string output;
    int workers = 1;
    std::optional<long long> seed;
    bool verbose = false;
    for (const char* name : {"validate", "groundstate", "sweep-energy", "multiplicity", "least-energy"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--output", output, "output directory (overrides output_dir)");
        sub->add_option("--workers", workers, "concurrent jobs")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "solver rng seed (overrides solver.rng_seed)");
        sub->add_flag("--verbose", verbose, "progress on stderr");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();

    try {
        ExperimentConfig config = io::load_config(config_path);
        if (seed) config.solver.rng_seed = static_cast<std::uint64_t>(*seed);
        config.validate();
        RunContext ctx;
        ctx.output = output.empty() ? std::filesystem::path(config.output_dir) : std::filesystem::path(output);
        ctx.workers = workers;
        ctx.verbose = verbose;
        ctx.log = &std::cerr;

        if (cmd == "validate") {
            const auto rep = cmd_validate(config, ctx);
            std::cout << rep.hypotheses.to_text();
            if (!rep.hypotheses.all_passed()) {
                for (const auto& f : rep.hypotheses.failures()) std::cerr << "HypothesisViolation: " << f << "\n";
                return kHypothesis;
            }
        } else if (cmd == "groundstate") {
            const auto rep = cmd_groundstate(config, ctx);
            std::printf("alpha_hat_1 = %.12f\nalpha_hat_2 = %.12f\n", rep.w1.alpha_hat, rep.w2.alpha_hat);
            for (const auto& n : rep.notes) std::cerr << "warning: " << n << "\n";
        } else if (cmd == "sweep-energy") {
            const auto rep = cmd_sweep_energy(config, ctx);
            print_sweep(rep);
            if (!rep.passed) {
                std::cerr << "sweep assertions failed; see sweep_energy_report.json\n";
                return kSolverFailure;
            }
        } else if (cmd == "multiplicity") {
            print_multiplicity(cmd_multiplicity(config, ctx));
        } else if (cmd == "least-energy") {
            print_least_energy(cmd_least_energy(config, ctx));
        }
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSolverFailure;
    }
    return kOk;
}
