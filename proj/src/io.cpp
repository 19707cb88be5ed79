#include "fracnls/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <set>
#include <sstream>

#include "fracnls/errors.hpp"

namespace fracnls::io {

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); }

// Object view that records which keys were read; done() rejects the rest.
class Obj {
public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) config_error("'" + path_ + "' must be an object");
    }

    const json* find(const std::string& key) {
        used_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }
    const json& need(const std::string& key) {
        const json* v = find(key);
        if (!v) config_error("missing required field '" + at(key) + "'");
        return *v;
    }
    std::string at(const std::string& key) const { return path_ + "." + key; }

    double number(const std::string& key) { return as_number(need(key), at(key)); }
    double number(const std::string& key, double fallback) {
        const json* v = find(key);
        return v ? as_number(*v, at(key)) : fallback;
    }
    long long integer(const std::string& key) { return as_integer(need(key), at(key)); }
    long long integer(const std::string& key, long long fallback) {
        const json* v = find(key);
        return v ? as_integer(*v, at(key)) : fallback;
    }
    std::string text(const std::string& key) { return as_text(need(key), at(key)); }
    std::string text(const std::string& key, const std::string& fallback) {
        const json* v = find(key);
        return v ? as_text(*v, at(key)) : fallback;
    }
    bool flag(const std::string& key, bool fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_boolean()) config_error("'" + at(key) + "' must be a boolean");
        return v->get<bool>();
    }

    void done() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) config_error("unknown key '" + at(it.key()) + "'");
    }

    static double as_number(const json& v, const std::string& where) {
        if (!v.is_number()) config_error("'" + where + "' must be a number");
        return v.get<double>();
    }
    static long long as_integer(const json& v, const std::string& where) {
        if (!v.is_number_integer()) config_error("'" + where + "' must be an integer");
        return v.get<long long>();
    }
    static std::string as_text(const json& v, const std::string& where) {
        if (!v.is_string()) config_error("'" + where + "' must be a string");
        return v.get<std::string>();
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

Point point_from(const json& v, const std::string& where, int dim) {
    if (!v.is_array() || static_cast<int>(v.size()) != dim)
        config_error("'" + where + "' must be an array of " + std::to_string(dim) + " numbers");
    Point p{0.0, 0.0, 0.0};
    for (int d = 0; d < dim; ++d) p[d] = Obj::as_number(v[d], where);
    return p;
}

std::vector<double> numbers_from(const json& v, const std::string& where) {
    if (!v.is_array()) config_error("'" + where + "' must be an array");
    std::vector<double> out;
    for (const auto& x : v) out.push_back(Obj::as_number(x, where));
    return out;
}

PotentialSpec potential_from(const json& j, const std::string& path, int dim) {
    Obj o(j, path);
    PotentialSpec pot;
    const std::string family = o.text("family");
    if (family == "constant") pot.family = PotentialFamily::constant;
    else if (family == "multi_well_product") pot.family = PotentialFamily::multi_well_product;
    else if (family == "decaying_well") pot.family = PotentialFamily::decaying_well;
    else config_error("'" + o.at("family") + "' must be constant, multi_well_product or decaying_well");
    pot.lambda_floor = o.number("lambda");
    pot.amplitude = o.number("amplitude", 0.0);
    pot.envelope_width = o.number("envelope_width", 1.0);
    if (const json* wells = o.find("wells")) {
        if (!wells->is_array()) config_error("'" + o.at("wells") + "' must be an array");
        for (std::size_t k = 0; k < wells->size(); ++k) {
            Obj w((*wells)[k], o.at("wells") + "[" + std::to_string(k) + "]");
            pot.wells.push_back({point_from(w.need("center"), w.at("center"), dim), w.number("width")});
            w.done();
        }
    }
    o.done();
    return pot;
}

std::string family_name(PotentialFamily f) {
    switch (f) {
        case PotentialFamily::constant: return "constant";
        case PotentialFamily::multi_well_product: return "multi_well_product";
        case PotentialFamily::decaying_well: return "decaying_well";
    }
    return "";
}

std::string family_name(CouplingFamily f) {
    switch (f) {
        case CouplingFamily::zero: return "zero";
        case CouplingFamily::constant_negative: return "constant_negative";
        case CouplingFamily::localized_negative: return "localized_negative";
    }
    return "";
}

json potential_json(const PotentialSpec& pot, int dim) {
    json j{{"family", family_name(pot.family)}, {"lambda", pot.lambda_floor}, {"amplitude", pot.amplitude}};
    if (pot.family == PotentialFamily::decaying_well) j["envelope_width"] = pot.envelope_width;
    json wells = json::array();
    for (const auto& w : pot.wells) wells.push_back({{"center", to_json(w.center, dim)}, {"width", w.width}});
    j["wells"] = wells;
    return j;
}

}  // namespace

json to_json(const Point& p, int dim) {
    json a = json::array();
    for (int d = 0; d < dim; ++d) a.push_back(p[d]);
    return a;
}

json to_json(const GridSpec& grid) {
    return {{"dim", grid.dim}, {"half_width", grid.half_width}, {"points", grid.points_per_dim}};
}

json to_json(const ModelSpec& m) {
    const int dim = m.dim();
    return {{"alpha", m.alpha},
            {"p", m.p},
            {"q", m.q},
            {"mu1", m.mu1},
            {"mu2", m.mu2},
            {"epsilon", m.epsilon},
            {"frame", m.frame == Frame::rescaled ? "rescaled" : "physical"},
            {"grid", to_json(m.grid)},
            {"potential1", potential_json(m.potential1, dim)},
            {"potential2", potential_json(m.potential2, dim)},
            {"coupling",
             {{"family", family_name(m.coupling.family)},
              {"c0", m.coupling.c0},
              {"center", to_json(m.coupling.center, dim)},
              {"width", m.coupling.width}}}};
}

json to_json(const LocalizationSpec& loc) {
    json pairs = json::array();
    for (const auto& [i, j] : loc.pairs) pairs.push_back({i, j});
    return {{"cube_half_width", loc.cube_half_width},
            {"shared_minima", loc.shared_minima_count},
            {"pairs", pairs},
            {"r0", loc.r0},
            {"c0", loc.c0}};
}

ModelSpec model_from_json(const json& j, const std::string& path) {
    Obj o(j, path);
    ModelSpec m;
    Obj g(o.need("grid"), o.at("grid"));
    const long long dim = g.integer("dim");
    const double half_width = g.number("half_width");
    const long long points = g.integer("points");
    g.done();
    if (dim < 1 || dim > 3) config_error("'" + path + ".grid.dim' must be 1, 2 or 3");
    try {
        m.grid = make_grid(static_cast<int>(dim), half_width, static_cast<int>(points));
    } catch (const Error& e) {
        config_error(std::string("'") + path + ".grid': " + e.what());
    }
    m.alpha = o.number("alpha");
    m.p = o.number("p");
    m.q = o.number("q");
    m.mu1 = o.number("mu1");
    m.mu2 = o.number("mu2");
    m.epsilon = o.number("epsilon", 1.0);
    const std::string frame = o.text("frame", "rescaled");
    if (frame == "rescaled") m.frame = Frame::rescaled;
    else if (frame == "physical") m.frame = Frame::physical;
    else config_error("'" + o.at("frame") + "' must be rescaled or physical");
    m.potential1 = potential_from(o.need("potential1"), o.at("potential1"), m.dim());
    m.potential2 = potential_from(o.need("potential2"), o.at("potential2"), m.dim());
    Obj c(o.need("coupling"), o.at("coupling"));
    const std::string family = c.text("family");
    if (family == "zero") m.coupling.family = CouplingFamily::zero;
    else if (family == "constant_negative") m.coupling.family = CouplingFamily::constant_negative;
    else if (family == "localized_negative") m.coupling.family = CouplingFamily::localized_negative;
    else config_error("'" + c.at("family") + "' must be zero, constant_negative or localized_negative");
    m.coupling.c0 = c.number("c0", 0.0);
    if (const json* center = c.find("center")) m.coupling.center = point_from(*center, c.at("center"), m.dim());
    m.coupling.width = c.number("width", 1.0);
    c.done();
    o.done();
    return m;
}

ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        config_error(std::string("config is not valid JSON: ") + e.what());
    }
    Obj o(root, "config");
    const long long version = o.integer("schema_version");
    if (version != kSchemaVersion)
        config_error("unsupported schema_version " + std::to_string(version) + " (expected " +
                     std::to_string(kSchemaVersion) + ")");
    ExperimentConfig cfg;
    cfg.model = model_from_json(o.need("model"), "config.model");
    const int dim = cfg.model.dim();
    cfg.epsilons = numbers_from(o.need("epsilons"), o.at("epsilons"));
    const json& kinds = o.need("experiments");
    if (!kinds.is_array()) config_error("'config.experiments' must be an array");
    for (const auto& k : kinds) cfg.experiments.push_back(Obj::as_text(k, "config.experiments"));
    cfg.output_dir = o.text("output_dir", cfg.output_dir);
    cfg.gap_sigma = o.number("gap_sigma", 0.0);

    if (const json* l = o.find("localization")) {
        Obj lo(*l, o.at("localization"));
        LocalizationSpec loc = default_localization(cfg.model);
        loc.cube_half_width = lo.number("cube_half_width", loc.cube_half_width);
        loc.r0 = lo.number("r0", loc.r0);
        loc.c0 = lo.number("c0", loc.c0);
        loc.shared_minima_count = static_cast<int>(lo.integer("shared_minima", loc.shared_minima_count));
        if (const json* pairs = lo.find("pairs")) {
            if (!pairs->is_array()) config_error("'" + lo.at("pairs") + "' must be an array");
            loc.pairs.clear();
            for (const auto& pr : *pairs) {
                if (!pr.is_array() || pr.size() != 2) config_error("'" + lo.at("pairs") + "' entries must be [i, j]");
                loc.pairs.emplace_back(static_cast<int>(Obj::as_integer(pr[0], lo.at("pairs"))),
                                       static_cast<int>(Obj::as_integer(pr[1], lo.at("pairs"))));
            }
        }
        lo.done();
        cfg.localization = loc;
    }
    if (const json* s = o.find("solver")) {
        Obj so(*s, o.at("solver"));
        auto& opt = cfg.solver;
        opt.tol_grad = so.number("tol_grad", opt.tol_grad);
        opt.tol_energy = so.number("tol_energy", opt.tol_energy);
        opt.max_iter = static_cast<int>(so.integer("max_iter", opt.max_iter));
        opt.penalty_weight = so.number("penalty_weight", opt.penalty_weight);
        const std::string seed = so.text("seed", "spike");
        if (seed == "spike") opt.seed_spec = SeedKind::spike;
        else if (seed == "homotopy") opt.seed_spec = SeedKind::homotopy;
        else if (seed == "far_pair") opt.seed_spec = SeedKind::far_pair;
        else if (seed == "given") opt.seed_spec = SeedKind::given;
        else config_error("'" + so.at("seed") + "' must be spike, homotopy, far_pair or given");
        opt.rng_seed = static_cast<std::uint64_t>(so.integer("rng_seed", 0));
        opt.history = static_cast<int>(so.integer("history", opt.history));
        opt.seed_cutoff_radius = so.number("seed_cutoff_radius", opt.seed_cutoff_radius);
        so.done();
    }
    if (const json* g = o.find("groundstate")) {
        Obj go(*g, o.at("groundstate"));
        auto& gs = cfg.groundstate;
        gs.solve.tol_grad = go.number("tol_grad", gs.solve.tol_grad);
        gs.solve.max_iter = static_cast<int>(go.integer("max_iter", gs.solve.max_iter));
        gs.solve.rng_seed = static_cast<std::uint64_t>(go.integer("rng_seed", 0));
        gs.solve.truncation_fraction = go.number("truncation_fraction", gs.solve.truncation_fraction);
        gs.envelope_ratio_max = go.number("envelope_ratio_max", gs.envelope_ratio_max);
        gs.nondegeneracy = go.flag("nondegeneracy", gs.nondegeneracy);
        gs.eig.k_eig = static_cast<int>(go.integer("k_eig", gs.eig.k_eig));
        gs.eig.kernel_tol = go.number("kernel_tol", gs.eig.kernel_tol);
        gs.eig.max_lanczos = static_cast<int>(go.integer("max_lanczos", gs.eig.max_lanczos));
        go.done();
    }
    if (const json* s = o.find("sweep")) {
        Obj so(*s, o.at("sweep"));
        auto& sw = cfg.sweep;
        if (const json* d = so.find("deltas")) sw.deltas = numbers_from(*d, so.at("deltas"));
        if (const json* d = so.find("direction")) sw.direction = point_from(*d, so.at("direction"), dim);
        sw.concentration_radius = so.number("concentration_radius", sw.concentration_radius);
        sw.tail = static_cast<int>(so.integer("tail", sw.tail));
        so.done();
    }
    if (const json* s = o.find("multiplicity")) {
        Obj mo(*s, o.at("multiplicity"));
        cfg.multiplicity.epsilon = mo.number("epsilon", cfg.multiplicity.epsilon);
        if (const json* d = mo.find("direction")) cfg.multiplicity.direction = point_from(*d, mo.at("direction"), dim);
        mo.done();
    }
    if (const json* s = o.find("least_energy")) {
        Obj lo(*s, o.at("least_energy"));
        auto& le = cfg.least_energy;
        le.epsilon = lo.number("epsilon", le.epsilon);
        if (const json* r = lo.find("radii")) le.radii = numbers_from(*r, lo.at("radii"));
        if (const json* d = lo.find("direction")) le.direction = point_from(*d, lo.at("direction"), dim);
        le.far_gap_tol = lo.number("far_gap_tol", le.far_gap_tol);
        lo.done();
    }
    o.done();
    cfg.canonical = root.dump();
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

json to_json(const RunRecord& r, int dim) {
    return {{"run_id", r.run_id},
            {"kind", r.kind},
            {"epsilon", r.epsilon},
            {"i", r.i},
            {"j", r.j},
            {"direction", to_json(r.direction, dim)},
            {"status", r.status},
            {"scaled_level", r.scaled_level},
            {"h_norm", r.h_norm},
            {"phi_u", to_json(r.phi_u, dim)},
            {"phi_v", to_json(r.phi_v, dim)},
            {"concentration_u", r.concentration_u},
            {"concentration_v", r.concentration_v},
            {"classification", r.classification},
            {"converged", r.converged},
            {"iterations", r.iterations},
            {"grad_norm", r.grad_norm},
            {"coupling_scaled", r.coupling_scaled},
            {"delta_bar", r.delta_bar},
            {"gap_bound_applies", r.gap_bound_applies},
            {"gap_bound_holds", r.gap_bound_holds},
            {"wall_time_s", r.wall_time},
            {"trace", r.trace_file},
            {"fields", r.field_file}};
}

std::string hash_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

void write_le(std::ofstream& out, const std::vector<double>& values) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
    } else {
        for (double v : values) {
            auto bits = std::bit_cast<std::uint64_t>(v);
            char bytes[8];
            for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
            out.write(bytes, 8);
        }
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    out << text;
}

}  // namespace

void write_fields(const std::filesystem::path& raw, const std::filesystem::path& sidecar,
                  const std::vector<std::pair<std::string, const Field*>>& fields, const json& extra) {
    std::ofstream out(raw, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + raw.string());
    json names = json::array();
    for (const auto& [name, f] : fields) {
        write_le(out, f->values);
        names.push_back(name);
    }
    json meta = extra;
    meta["raw_file"] = raw.filename().string();
    meta["dtype"] = "float64";
    meta["byte_order"] = "little";
    meta["layout"] = "row-major, first axis slowest; fields concatenated in order";
    meta["fields"] = names;
    meta["count_per_field"] = fields.empty() ? 0 : fields.front().second->size();
    meta["grid"] = to_json(fields.front().second->grid);
    write_text(sidecar, meta.dump(2) + "\n");
}

std::vector<double> read_raw(const std::filesystem::path& raw, std::size_t count) {
    std::ifstream in(raw, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot read " + raw.string());
    std::vector<double> out(count);
    for (auto& v : out) {
        unsigned char bytes[8];
        if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw Error(ErrorKind::IoError, "truncated raw file " + raw.string());
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
        v = std::bit_cast<double>(bits);
    }
    return out;
}

void write_ground_state(const std::filesystem::path& dir, const std::string& stem, const GroundStateRecord& rec,
                        const json& extra) {
    json meta = extra;
    meta["lambda"] = rec.lambda;
    meta["mu"] = rec.mu;
    meta["p"] = rec.p;
    meta["alpha"] = rec.alpha;
    meta["alpha_hat"] = rec.alpha_hat;
    meta["iterations"] = rec.iterations;
    meta["grad_norm"] = rec.grad_norm;
    meta["decay_fit"] = rec.decay_fit ? json::array({rec.decay_fit->first, rec.decay_fit->second}) : json(nullptr);
    meta["kernel_dim"] = rec.kernel_dim;
    meta["smallest_abs_eigenvalue"] = rec.smallest_abs_eigenvalue;
    meta["warnings"] = rec.warnings;
    write_fields(dir / (stem + ".f64"), dir / (stem + ".json"), {{"omega", &rec.omega}}, meta);
}

GroundStateRecord read_ground_state(const std::filesystem::path& dir, const std::string& stem) {
    std::ifstream in(dir / (stem + ".json"));
    if (!in) throw Error(ErrorKind::MissingGroundState, "no ground state at " + (dir / (stem + ".json")).string());
    json meta;
    try {
        in >> meta;
        GroundStateRecord rec;
        const auto& g = meta.at("grid");
        rec.omega = Field(make_grid(g.at("dim").get<int>(), g.at("half_width").get<double>(), g.at("points").get<int>()));
        rec.omega.values = read_raw(dir / meta.at("raw_file").get<std::string>(), rec.omega.size());
        rec.lambda = meta.at("lambda").get<double>();
        rec.mu = meta.at("mu").get<double>();
        rec.p = meta.at("p").get<double>();
        rec.alpha = meta.at("alpha").get<double>();
        rec.alpha_hat = meta.at("alpha_hat").get<double>();
        rec.iterations = meta.at("iterations").get<int>();
        rec.grad_norm = meta.at("grad_norm").get<double>();
        if (!meta.at("decay_fit").is_null())
            rec.decay_fit = std::make_pair(meta["decay_fit"][0].get<double>(), meta["decay_fit"][1].get<double>());
        rec.kernel_dim = meta.at("kernel_dim").get<int>();
        rec.smallest_abs_eigenvalue = meta.at("smallest_abs_eigenvalue").get<double>();
        rec.warnings = meta.at("warnings").get<std::vector<std::string>>();
        return rec;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::IoError, "malformed ground state file " + stem + ": " + e.what());
    }
}

void append_jsonl(const std::filesystem::path& path, const json& record) {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot append to " + path.string());
    out << record.dump() << "\n";
}

std::size_t count_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++n;
    return n;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), width_(header.size()) {
    if (!out_) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw Error(ErrorKind::IoError, "csv row width mismatch");
    for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << cells[k];
    out_ << "\n";
}

void write_trace(const std::filesystem::path& path, const std::vector<TraceRow>& trace, int dim) {
    std::vector<std::string> header{"iteration", "scaled_energy", "grad_norm", "s", "t"};
    const char* axes = "xyz";
    for (const char* which : {"phi_u_", "phi_v_"})
        for (int d = 0; d < dim; ++d) header.push_back(std::string(which) + axes[d]);
    CsvWriter csv(path, header);
    for (const auto& r : trace) {
        std::vector<std::string> cells{std::to_string(r.iteration), num(r.scaled_energy), num(r.grad_norm), num(r.s), num(r.t)};
        for (int d = 0; d < dim; ++d) cells.push_back(num(r.phi_u[d]));
        for (int d = 0; d < dim; ++d) cells.push_back(num(r.phi_v[d]));
        csv.row(cells);
    }
}

}  // namespace fracnls::io
