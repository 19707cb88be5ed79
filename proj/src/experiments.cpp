#include "fracnls/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <ostream>
#include <thread>

#include "fracnls/errors.hpp"
#include "fracnls/io.hpp"

namespace fracnls {

namespace fs = std::filesystem;
using io::json;
using io::num;

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); };
    if (epsilons.empty()) fail("'config.epsilons' must not be empty");
    for (std::size_t k = 0; k < epsilons.size(); ++k) {
        if (!(epsilons[k] > 0.0)) fail("'config.epsilons' entries must be positive");
        if (k > 0 && !(epsilons[k] < epsilons[k - 1])) fail("'config.epsilons' must be strictly decreasing");
    }
    if (experiments.empty()) fail("'config.experiments' must list at least one experiment");
    for (const auto& k : experiments)
        if (k != "groundstate" && k != "sweep-energy" && k != "multiplicity" && k != "least-energy")
            fail("'config.experiments' has unknown kind '" + k + "'");
    try {
        for (double eps : epsilons) model_at(eps).validate();
        model_at(least_energy.epsilon).validate();
        solver.validate();
    } catch (const Error& e) {
        fail(e.what());
    }
    if (least_energy.radii.empty()) fail("'config.least_energy.radii' must not be empty");
    for (double r : least_energy.radii)
        if (!(r > 1.0)) fail("'config.least_energy.radii' entries must exceed 1");
    if (sweep.tail == 1 || sweep.tail < 0) fail("'config.sweep.tail' must be 0 (no monotonicity check) or at least 2");
}

ModelSpec ExperimentConfig::model_at(double eps) const {
    ModelSpec m = model;
    m.epsilon = eps;
    return m;
}

LocalizationSpec ExperimentConfig::localization_at(double eps) const {
    return localization ? *localization : default_localization(model_at(eps));
}

namespace {

void say(const RunContext& ctx, const std::string& msg) {
    if (ctx.verbose && ctx.log) *ctx.log << msg << "\n";
}

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", x);
    return buf;
}

// Runs fn(0..n-1) on up to `workers` threads; results keep the job order.
template <class R>
std::vector<R> run_jobs(std::size_t n, int workers, const std::function<R(std::size_t)>& fn) {
    std::vector<R> out(n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto body = [&] {
        for (std::size_t k; (k = next++) < n;) {
            try {
                out[k] = fn(k);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int count = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    if (count == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < count; ++t) pool.emplace_back(body);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

struct Outcome {
    std::optional<Solution> solution;
    std::string status = "ok";
    double wall = 0.0;
    std::vector<TraceRow> trace;  // used when there is no Solution
    std::optional<PairState> state;  // final state of a far-pair evaluation
};

template <class F>
Outcome timed(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        f(o);
    } catch (const Error& e) {
        o.status = e.what();
    }
    o.wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return o;
}

// Single writer for RunRecords, traces and field dumps.
class RecordWriter {
public:
    RecordWriter(const ExperimentConfig& cfg, const RunContext& ctx) : ctx_(ctx), dim_(cfg.model.dim()) {
        fs::create_directories(ctx.output / "traces");
        fs::create_directories(ctx.output / "fields");
        runs_ = ctx.output / "runs.jsonl";
        next_ = io::count_lines(runs_) + 1;
        hash_ = io::hash_hex(cfg.canonical + "|seed=" + std::to_string(cfg.solver.rng_seed)).substr(0, 8);
    }

    // Fills identifiers and file references, writes the artifacts, appends the record.
    void write(RunRecord& rec, const Outcome& out, const ModelSpec& model) {
        char id[64];
        std::snprintf(id, sizeof id, "%s-%s-%05zu", hash_.c_str(), rec.kind.c_str(), next_++);
        rec.run_id = id;
        rec.trace_file = "traces/" + rec.run_id + ".csv";
        const auto& trace = out.solution ? out.solution->trace : out.trace;
        io::write_trace(ctx_.output / rec.trace_file, trace, dim_);
        const PairState* st = out.solution ? &out.solution->state : (out.state ? &*out.state : nullptr);
        if (st) {
            rec.field_file = "fields/" + rec.run_id + ".json";
            io::write_fields(ctx_.output / ("fields/" + rec.run_id + ".f64"), ctx_.output / rec.field_file,
                             {{"u", &st->u()}, {"v", &st->v()}},
                             {{"run_id", rec.run_id}, {"model", io::to_json(model)},
                              {"frame_note", "grid coordinates are x / eps in the rescaled frame"}});
        }
        rec.wall_time = out.wall;
        io::append_jsonl(runs_, io::to_json(rec, dim_));
    }

private:
    const RunContext& ctx_;
    int dim_;
    fs::path runs_;
    std::size_t next_;
    std::string hash_;
};

struct GapModel {
    double alpha_sum = 0.0;
    double sigma = 0.0;
    double delta_bar = 0.0;
};

GapModel gap_model(const ExperimentConfig& cfg, const LimitPair& limits) {
    GapModel g;
    g.alpha_sum = limits.alpha_sum();
    g.sigma = cfg.gap_sigma;
    if (g.sigma > 0.0) {
        GapInputs in;
        in.p = cfg.model.p;
        in.mu1 = cfg.model.mu1;
        in.mu2 = cfg.model.mu2;
        in.S1 = sobolev_constant(&limits.w1);
        in.S2 = sobolev_constant(&limits.w2);
        in.alpha_hat1 = limits.w1.alpha_hat;
        in.alpha_hat2 = limits.w2.alpha_hat;
        g.delta_bar = energy_gap_delta(in, g.sigma);
    }
    return g;
}

void fill_from_state(RunRecord& rec, const Problem& pb, const PairState& st, double level, const GapModel& gm,
                     double conc_radius) {
    const auto& m = pb.model;
    rec.scaled_level = level;
    rec.phi_u = physical_barycenter(m, st.u());
    rec.phi_v = physical_barycenter(m, st.v());
    rec.h_norm = norm(rec.phi_u - rec.phi_v);
    rec.coupling_scaled = st.cache().L / pb.eps_n();
    const double ls = m.length_scale();
    const double power = 2.0 * m.p + 2.0;
    try {
        rec.concentration_u = concentration_mass(st.u(), m.to_frame(well_center(m.potential1, std::max(rec.i, 1))),
                                                 conc_radius, m.epsilon / ls, power);
        rec.concentration_v = concentration_mass(st.v(), m.to_frame(well_center(m.potential2, std::max(rec.j, 1))),
                                                 conc_radius, m.epsilon / ls, power);
    } catch (const Error&) {
        rec.concentration_u = rec.concentration_v = std::nan("");
    }
    if (gm.sigma > 0.0) {
        rec.delta_bar = gm.delta_bar;
        rec.gap_bound_applies = rec.coupling_scaled <= -gm.sigma;
        rec.gap_bound_holds = !rec.gap_bound_applies || level > gm.alpha_sum + gm.delta_bar;
    }
}

void fill_from_solution(RunRecord& rec, const Problem& pb, const Solution& sol, const GapModel& gm, double conc_radius) {
    fill_from_state(rec, pb, sol.state, sol.scaled_level, gm, conc_radius);
    rec.classification = to_string(sol.classification);
    rec.converged = sol.converged;
    rec.iterations = sol.iterations;
    rec.grad_norm = sol.grad_norm;
    if (!sol.converged && rec.status == "ok") rec.status = "NoConvergence";
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    out << j.dump(2) << "\n";
}

int well_count(const PotentialSpec& pot) { return std::max<int>(1, static_cast<int>(pot.wells.size())); }

}  // namespace

ValidateReport cmd_validate(const ExperimentConfig& config, const RunContext& ctx) {
    ValidateReport rep;
    const double eps = config.epsilons.back();
    rep.hypotheses = check_hypotheses(config.model_at(eps), config.localization_at(eps));
    fs::create_directories(ctx.output);
    std::ofstream(ctx.output / "hypotheses.txt") << rep.hypotheses.to_text();
    return rep;
}

GroundStateReport cmd_groundstate(const ExperimentConfig& config, const RunContext& ctx) {
    const ModelSpec& m = config.model;
    const fs::path dir = ctx.output / "groundstates";
    fs::create_directories(dir);
    auto solve = [&](double lambda, double mu, const std::string& label, std::vector<std::string>& notes) {
        say(ctx, "solving ground state " + label);
        GroundStateRecord rec = solve_scalar(lambda, mu, m.p, m.alpha, m.grid, config.groundstate.solve);
        json extra;
        try {
            check_decay(rec, config.groundstate.envelope_ratio_max);
        } catch (const Error& e) {
            rec.warnings.push_back(std::string("DecayCheckFailed: ") + e.what());
            notes.push_back(label + ": " + e.what());
        }
        if (config.groundstate.nondegeneracy) {
            try {
                const auto nd = check_nondegeneracy(rec, config.groundstate.eig);
                extra["eigenvalues"] = nd.eigenvalues;
                extra["eigen_residuals"] = nd.residuals;
                extra["kernel_overlaps"] = nd.kernel_overlaps;
                extra["kernel_tol"] = config.groundstate.eig.kernel_tol;
            } catch (const Error& e) {
                rec.warnings.push_back(std::string("EigSolverFailure: ") + e.what());
                notes.push_back(label + ": " + e.what());
            }
        }
        io::write_ground_state(dir, "ground_state_" + label, rec, extra);
        return rec;
    };
    GroundStateReport rep;
    rep.w1 = solve(m.potential1.lambda_floor, m.mu1, "1", rep.notes);
    rep.w2 = solve(m.potential2.lambda_floor, m.mu2, "2", rep.notes);

    io::CsvWriter csv(ctx.output / "groundstate.csv",
                      {"component", "lambda", "mu", "alpha_hat", "iterations", "grad_norm", "decay_c1", "decay_c2",
                       "kernel_dim", "smallest_abs_eigenvalue"});
    int label = 1;
    for (const auto* rec : {&rep.w1, &rep.w2}) {
        csv.row({std::to_string(label++), num(rec->lambda), num(rec->mu), num(rec->alpha_hat),
                 std::to_string(rec->iterations), num(rec->grad_norm),
                 rec->decay_fit ? num(rec->decay_fit->first) : "nan", rec->decay_fit ? num(rec->decay_fit->second) : "nan",
                 std::to_string(rec->kernel_dim), num(rec->smallest_abs_eigenvalue)});
    }
    return rep;
}

LimitPair load_ground_states(const ExperimentConfig& config, const RunContext& ctx) {
    const fs::path dir = ctx.output / "groundstates";
    GroundStateRecord w1 = io::read_ground_state(dir, "ground_state_1");
    GroundStateRecord w2 = io::read_ground_state(dir, "ground_state_2");
    const ModelSpec& m = config.model;
    auto matches = [&](const GroundStateRecord& r, const PotentialSpec& pot, double mu) {
        return r.omega.grid == m.grid && r.lambda == pot.lambda_floor && r.mu == mu && r.p == m.p && r.alpha == m.alpha;
    };
    if (!matches(w1, m.potential1, m.mu1) || !matches(w2, m.potential2, m.mu2))
        throw Error(ErrorKind::MissingGroundState, "ground states in " + dir.string() +
                                                       " do not match this config; rerun the groundstate command");
    return LimitPair(std::move(w1), std::move(w2));
}

SweepReport cmd_sweep_energy(const ExperimentConfig& config, const RunContext& ctx) {
    const LimitPair limits = load_ground_states(config, ctx);
    const GapModel gm = gap_model(config, limits);
    struct Job {
        double eps;
        int i, j;
    };
    std::vector<Job> jobs;
    for (double eps : config.epsilons)
        for (const auto& [i, j] : config.localization_at(eps).pairs) jobs.push_back({eps, i, j});
    std::vector<ProblemPtr> problems;
    for (const auto& job : jobs) problems.push_back(make_problem(config.model_at(job.eps)));

    const auto outcomes = run_jobs<Outcome>(jobs.size(), ctx.workers, [&](std::size_t k) {
        const Job& job = jobs[k];
        say(ctx, "sweep eps=" + sci(job.eps) + " pair (" + std::to_string(job.i) + "," + std::to_string(job.j) + ")");
        return timed([&](Outcome& o) {
            o.solution = minimize_localized(problems[k], config.localization_at(job.eps), limits, job.i, job.j,
                                            config.solver, config.sweep.direction);
        });
    });

    SweepReport rep;
    rep.alpha_sum = limits.alpha_sum();
    RecordWriter writer(config, ctx);
    fs::create_directories(ctx.output);
    const int dim = config.model.dim();
    std::vector<std::string> header{"run_id", "epsilon", "i", "j", "status", "scaled_level", "gap", "relative_gap",
                                    "drift_u", "drift_v", "drift_cells"};
    const char* axes = "xyz";
    for (const char* which : {"phi_u_", "phi_v_"})
        for (int d = 0; d < dim; ++d) header.push_back(std::string(which) + axes[d]);
    for (const char* col : {"concentration_u", "concentration_v", "coupling_scaled", "delta_bar", "gap_bound_applies",
                            "gap_bound_holds", "converged", "iterations", "classification"})
        header.push_back(col);
    io::CsvWriter csv(ctx.output / "sweep_energy.csv", header);

    bool all_ok = true;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        const Job& job = jobs[k];
        const Problem& pb = *problems[k];
        SweepRow row;
        RunRecord& rec = row.record;
        rec.kind = "sweep";
        rec.epsilon = job.eps;
        rec.i = job.i;
        rec.j = job.j;
        rec.direction = config.sweep.direction;
        rec.status = outcomes[k].status;
        if (outcomes[k].solution) {
            fill_from_solution(rec, pb, *outcomes[k].solution, gm, config.sweep.concentration_radius);
            row.gap = rec.scaled_level - rep.alpha_sum;
            row.drift_u = norm(rec.phi_u - well_center(pb.model.potential1, job.i));
            row.drift_v = norm(rec.phi_v - well_center(pb.model.potential2, job.j));
            row.drift_cells = std::max(row.drift_u, row.drift_v) / pb.model.physical_spacing();
            if (!rec.gap_bound_holds) ++rep.gap_bound_violations;
        } else {
            row.gap = row.drift_u = row.drift_v = row.drift_cells = std::nan("");
            rec.scaled_level = std::nan("");
        }
        if (rec.status != "ok") all_ok = false;
        writer.write(rec, outcomes[k], pb.model);
        std::vector<std::string> cells{rec.run_id, num(job.eps), std::to_string(job.i), std::to_string(job.j),
                                       "\"" + rec.status + "\"", num(rec.scaled_level), num(row.gap),
                                       num(row.gap / rep.alpha_sum), num(row.drift_u), num(row.drift_v),
                                       num(row.drift_cells)};
        for (int d = 0; d < dim; ++d) cells.push_back(num(rec.phi_u[d]));
        for (int d = 0; d < dim; ++d) cells.push_back(num(rec.phi_v[d]));
        for (const std::string& c :
             {num(rec.concentration_u), num(rec.concentration_v), num(rec.coupling_scaled), num(rec.delta_bar),
              std::string(rec.gap_bound_applies ? "1" : "0"), std::string(rec.gap_bound_holds ? "1" : "0"),
              std::string(rec.converged ? "1" : "0"), std::to_string(rec.iterations), rec.classification})
            cells.push_back(c);
        csv.row(cells);
        rep.rows.push_back(std::move(row));
    }

    // Per pair: the gap must decrease over the last `tail` epsilons and eventually drop below each delta.
    rep.tail_decreasing = true;
    std::vector<std::pair<int, int>> pairs;
    for (const auto& job : jobs)
        if (std::find(pairs.begin(), pairs.end(), std::make_pair(job.i, job.j)) == pairs.end())
            pairs.emplace_back(job.i, job.j);
    for (double delta : config.sweep.deltas) rep.delta_reached.emplace_back(delta, true);
    for (const auto& pr : pairs) {
        std::vector<double> gaps;
        for (const auto& row : rep.rows)
            if (row.record.i == pr.first && row.record.j == pr.second) gaps.push_back(row.gap);
        const std::size_t tail = static_cast<std::size_t>(config.sweep.tail);
        const std::size_t start = gaps.size() > tail ? gaps.size() - tail : 0;
        for (std::size_t k = start + 1; tail > 0 && k < gaps.size(); ++k)
            if (!(gaps[k] < gaps[k - 1])) rep.tail_decreasing = false;
        for (auto& [delta, reached] : rep.delta_reached)
            if (gaps.empty() || !(gaps.back() < delta)) reached = false;
    }
    rep.passed = all_ok && rep.tail_decreasing && rep.gap_bound_violations == 0 &&
                 std::all_of(rep.delta_reached.begin(), rep.delta_reached.end(), [](const auto& d) { return d.second; });

    json deltas = json::array();
    for (const auto& [delta, reached] : rep.delta_reached) deltas.push_back({{"delta", delta}, {"reached", reached}});
    write_json(ctx.output / "sweep_energy_report.json",
               {{"alpha_sum", rep.alpha_sum},
                {"tail_decreasing", rep.tail_decreasing},
                {"deltas", deltas},
                {"gap_bound_violations", rep.gap_bound_violations},
                {"all_runs_ok", all_ok},
                {"passed", rep.passed}});
    return rep;
}

MultiplicityReport cmd_multiplicity(const ExperimentConfig& config, const RunContext& ctx) {
    const LimitPair limits = load_ground_states(config, ctx);
    const GapModel gm = gap_model(config, limits);
    MultiplicityReport rep;
    rep.epsilon = config.multiplicity.epsilon > 0.0 ? config.multiplicity.epsilon : config.epsilons.back();
    const ModelSpec model = config.model_at(rep.epsilon);
    const LocalizationSpec loc = config.localization_at(rep.epsilon);
    const ProblemPtr problem = make_problem(model);
    const int k = well_count(model.potential1), l = well_count(model.potential2);
    const int m = loc.shared_minima_count;
    rep.target_count = k * l + m;
    const Point e = config.multiplicity.direction;

    std::vector<std::pair<int, int>> pairs;
    for (int i = 1; i <= k; ++i)
        for (int j = 1; j <= l; ++j) pairs.emplace_back(i, j);
    const auto firsts = run_jobs<Outcome>(pairs.size(), ctx.workers, [&](std::size_t n) {
        say(ctx, "multiplicity pair (" + std::to_string(pairs[n].first) + "," + std::to_string(pairs[n].second) + ")");
        return timed([&](Outcome& o) {
            o.solution = minimize_localized(problem, loc, limits, pairs[n].first, pairs[n].second, config.solver, e);
        });
    });
    std::vector<std::pair<int, int>> shared(loc.pairs.begin(), loc.pairs.begin() + std::min<std::size_t>(m, loc.pairs.size()));
    const auto seconds = run_jobs<Outcome>(shared.size(), ctx.workers, [&](std::size_t n) {
        const auto [i, j] = shared[n];
        say(ctx, "second-solution search at shared pair (" + std::to_string(i) + "," + std::to_string(j) + ")");
        return timed([&](Outcome& o) {
            const auto it = std::find(pairs.begin(), pairs.end(), std::make_pair(i, j));
            const auto& first = firsts[it - pairs.begin()];
            if (!first.solution) throw Error(ErrorKind::NoSecondSolutionFound, "first solution unavailable: " + first.status);
            o.solution = find_second_solution(problem, loc, limits, i, *first.solution, config.solver, e);
        });
    });

    RecordWriter writer(config, ctx);
    std::vector<const Solution*> found;
    auto record = [&](const std::string& role, int i, int j, const Outcome& out) {
        MultiplicityEntry entry;
        entry.role = role;
        RunRecord& rec = entry.record;
        rec.kind = role == "second" ? "second" : "localized";
        rec.epsilon = rep.epsilon;
        rec.i = i;
        rec.j = j;
        rec.direction = e;
        rec.status = out.status;
        if (out.solution) {
            fill_from_solution(rec, *problem, *out.solution, gm, config.sweep.concentration_radius);
            entry.h = rec.phi_u - rec.phi_v;
            found.push_back(&*out.solution);
        } else {
            rec.scaled_level = std::nan("");
        }
        writer.write(rec, out, model);
        rep.entries.push_back(std::move(entry));
    };
    for (std::size_t n = 0; n < pairs.size(); ++n) record("localized", pairs[n].first, pairs[n].second, firsts[n]);
    for (std::size_t n = 0; n < shared.size(); ++n) {
        record("second", shared[n].first, shared[n].second, seconds[n]);
        rep.second_search_notes.push_back(seconds[n].status);
    }

    // Greedy count of solutions pairwise farther apart than 0.1 of the larger H norm.
    std::vector<const Solution*> distinct;
    rep.min_pair_distance = INFINITY;
    for (const Solution* s : found) {
        bool fresh = true;
        for (const Solution* d : distinct) {
            const double dist = pair_distance_h(*problem, s->state, d->state);
            const double tol = 0.1 * std::sqrt(std::max(s->state.norm_h_sq(), d->state.norm_h_sq()));
            rep.min_pair_distance = std::min(rep.min_pair_distance, dist);
            rep.sep_tol = std::max(rep.sep_tol, tol);
            if (!(dist > tol)) fresh = false;
        }
        if (fresh) distinct.push_back(s);
    }
    rep.distinct_count = static_cast<int>(distinct.size());

    const int dim = model.dim();
    std::vector<std::string> header{"run_id", "role", "i", "j", "status", "scaled_level", "h_norm"};
    const char* axes = "xyz";
    for (const char* which : {"h_", "phi_u_", "phi_v_"})
        for (int d = 0; d < dim; ++d) header.push_back(std::string(which) + axes[d]);
    header.push_back("classification");
    io::CsvWriter csv(ctx.output / "multiplicity.csv", header);
    for (const auto& en : rep.entries) {
        const auto& r = en.record;
        std::vector<std::string> cells{r.run_id, en.role, std::to_string(r.i), std::to_string(r.j), "\"" + r.status + "\"",
                                       num(r.scaled_level), num(r.h_norm)};
        for (const Point* p : {&en.h, &r.phi_u, &r.phi_v})
            for (int d = 0; d < dim; ++d) cells.push_back(num((*p)[d]));
        cells.push_back(r.classification);
        csv.row(cells);
    }
    write_json(ctx.output / "multiplicity_report.json",
               {{"epsilon", rep.epsilon},
                {"distinct_count", rep.distinct_count},
                {"target_count", rep.target_count},
                {"min_pair_distance", std::isfinite(rep.min_pair_distance) ? json(rep.min_pair_distance) : json(nullptr)},
                {"sep_tol", rep.sep_tol},
                {"second_search", rep.second_search_notes}});
    return rep;
}

LeastEnergyReport cmd_least_energy(const ExperimentConfig& config, const RunContext& ctx) {
    const LimitPair limits = load_ground_states(config, ctx);
    const GapModel gm = gap_model(config, limits);
    const auto& settings = config.least_energy;
    const ModelSpec model = config.model_at(settings.epsilon);
    const LocalizationSpec loc = config.localization_at(settings.epsilon);
    const ProblemPtr problem = make_problem(model);
    LeastEnergyReport rep;
    rep.alpha_sum = limits.alpha_sum();
    const bool raised = model.potential1.value_at_infinity() > model.potential1.lambda_floor ||
                        model.potential2.value_at_infinity() > model.potential2.lambda_floor;
    rep.scenario = raised ? "i" : "ii";

    std::vector<std::pair<int, int>> pairs;
    for (int i = 1; i <= well_count(model.potential1); ++i)
        for (int j = 1; j <= well_count(model.potential2); ++j) pairs.emplace_back(i, j);
    const auto localized = run_jobs<Outcome>(pairs.size(), ctx.workers, [&](std::size_t n) {
        say(ctx, "least-energy localized pair (" + std::to_string(pairs[n].first) + "," + std::to_string(pairs[n].second) + ")");
        return timed([&](Outcome& o) {
            o.solution = minimize_localized(problem, loc, limits, pairs[n].first, pairs[n].second, config.solver,
                                            settings.direction);
        });
    });
    std::vector<double> radii = settings.radii;
    std::sort(radii.begin(), radii.end());
    std::vector<NehariScales> scales(radii.size());
    const auto far = run_jobs<Outcome>(radii.size(), ctx.workers, [&](std::size_t n) {
        say(ctx, "far pair R=" + sci(radii[n]));
        return timed([&](Outcome& o) {
            const PairState raw = build_far_pair(problem, limits, radii[n], settings.direction);
            scales[n] = project_pair(*problem, raw);
            o.state = raw.scaled(scales[n].s, scales[n].t);
            const auto& st = *o.state;
            o.trace.push_back({0, scaled_energy(*problem, st), dual_gradient_norm(*problem, st), scales[n].s, scales[n].t,
                               physical_barycenter(model, st.u()), physical_barycenter(model, st.v())});
        });
    });

    RecordWriter writer(config, ctx);
    for (std::size_t n = 0; n < pairs.size(); ++n) {
        LeastEnergyRow row;
        RunRecord& rec = row.record;
        rec.kind = "localized";
        rec.epsilon = settings.epsilon;
        rec.i = pairs[n].first;
        rec.j = pairs[n].second;
        rec.direction = settings.direction;
        rec.status = localized[n].status;
        if (localized[n].solution) {
            fill_from_solution(rec, *problem, *localized[n].solution, gm, config.sweep.concentration_radius);
            row.s = localized[n].solution->scales.s;
            row.t = localized[n].solution->scales.t;
        } else {
            rec.scaled_level = std::nan("");
        }
        row.gap = rec.scaled_level - rep.alpha_sum;
        rep.localized.push_back(row);
    }
    for (std::size_t n = 0; n < radii.size(); ++n) {
        LeastEnergyRow row;
        RunRecord& rec = row.record;
        rec.kind = "far";
        rec.epsilon = settings.epsilon;
        rec.direction = settings.direction;
        rec.status = far[n].status;
        row.R = radii[n];
        if (far[n].state) {
            fill_from_state(rec, *problem, *far[n].state, far[n].trace.front().scaled_energy, gm, config.sweep.concentration_radius);
            rec.classification = "far_pair";
            rec.converged = true;
            rec.grad_norm = far[n].trace.front().grad_norm;
            row.s = scales[n].s;
            row.t = scales[n].t;
        } else {
            rec.scaled_level = std::nan("");
        }
        row.gap = rec.scaled_level - rep.alpha_sum;
        rep.far.push_back(row);
    }

    double min_local = INFINITY, max_local = -INFINITY, min_far = INFINITY, max_far = -INFINITY;
    for (const auto& r : rep.localized) {
        min_local = std::min(min_local, r.record.scaled_level);
        max_local = std::max(max_local, r.record.scaled_level);
    }
    for (const auto& r : rep.far) {
        min_far = std::min(min_far, r.record.scaled_level);
        max_far = std::max(max_far, r.record.scaled_level);
    }
    const bool all_ok = std::all_of(rep.localized.begin(), rep.localized.end(), [](const auto& r) { return r.record.status == "ok"; }) &&
                        std::all_of(rep.far.begin(), rep.far.end(), [](const auto& r) { return r.record.status == "ok"; });
    rep.far_strictly_decreasing = true;
    for (std::size_t n = 1; n < rep.far.size(); ++n)
        if (!(rep.far[n].record.scaled_level < rep.far[n - 1].record.scaled_level)) rep.far_strictly_decreasing = false;
    rep.far_gap_small = !rep.far.empty() && rep.far.back().gap <= settings.far_gap_tol;
    rep.far_below_localized = max_far < min_local;
    rep.localized_below_far = min_local < min_far;
    if (rep.scenario == "i") {
        rep.passed = all_ok && rep.localized_below_far;
        for (auto& r : rep.localized)
            if (r.record.scaled_level == min_local && rep.localized_below_far) r.record.classification = to_string(Classification::candidate_least_energy);
    } else {
        rep.passed = all_ok && rep.far_strictly_decreasing && rep.far_gap_small && rep.far_below_localized;
        if (rep.far_below_localized)
            for (auto& r : rep.localized) r.record.classification = "higher_energy";
    }

    for (std::size_t n = 0; n < rep.localized.size(); ++n) writer.write(rep.localized[n].record, localized[n], model);
    for (std::size_t n = 0; n < rep.far.size(); ++n) writer.write(rep.far[n].record, far[n], model);

    io::CsvWriter csv(ctx.output / "least_energy.csv",
                      {"run_id", "kind", "i", "j", "R", "status", "scaled_level", "gap", "s", "t", "coupling_scaled",
                       "h_norm", "classification"});
    for (const auto* group : {&rep.localized, &rep.far})
        for (const auto& r : *group)
            csv.row({r.record.run_id, r.record.kind, std::to_string(r.record.i), std::to_string(r.record.j), num(r.R),
                     "\"" + r.record.status + "\"", num(r.record.scaled_level), num(r.gap), num(r.s), num(r.t),
                     num(r.record.coupling_scaled), num(r.record.h_norm), r.record.classification});
    write_json(ctx.output / "least_energy_report.json",
               {{"scenario", rep.scenario},
                {"alpha_sum", rep.alpha_sum},
                {"far_strictly_decreasing", rep.far_strictly_decreasing},
                {"far_gap_small", rep.far_gap_small},
                {"far_below_localized", rep.far_below_localized},
                {"localized_below_far", rep.localized_below_far},
                {"passed", rep.passed}});
    return rep;
}

}  // namespace fracnls
