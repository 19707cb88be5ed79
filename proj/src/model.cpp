#include "fracnls/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fracnls/errors.hpp"

namespace fracnls {

namespace {

double sq_dist(const Point& a, const Point& b) {
    const Point d = a - b;
    return d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
}

std::string point_str(const Point& p, int dim) {
    std::ostringstream os;
    os << "(";
    for (int d = 0; d < dim; ++d) os << (d ? ", " : "") << p[d];
    os << ")";
    return os.str();
}

// Points on the boundary of the closed cube C_s(center).
std::vector<Point> cube_boundary_samples(const Point& center, double s, int dim) {
    std::vector<Point> out;
    constexpr int kPerEdge = 33;
    if (dim == 1) {
        out.push_back(center + Point{-s, 0, 0});
        out.push_back(center + Point{s, 0, 0});
        return out;
    }
    auto lin = [&](int i) { return -s + 2.0 * s * i / (kPerEdge - 1); };
    for (int face_axis = 0; face_axis < dim; ++face_axis) {
        for (double side : {-s, s}) {
            const int other = dim - 1;
            const int count = other == 1 ? kPerEdge : kPerEdge * kPerEdge;
            for (int c = 0; c < count; ++c) {
                Point p = center;
                p[face_axis] += side;
                int k = 0;
                for (int a = 0; a < dim; ++a) {
                    if (a == face_axis) continue;
                    const int idx = k == 0 ? c % kPerEdge : c / kPerEdge;
                    p[a] += lin(idx);
                    ++k;
                }
                out.push_back(p);
            }
        }
    }
    return out;
}

}  // namespace

double PotentialSpec::evaluate(const Point& x) const {
    switch (family) {
    case PotentialFamily::constant:
        return lambda_floor;
    case PotentialFamily::multi_well_product: {
        double prod = 1.0;
        for (const auto& w : wells) prod *= 1.0 - std::exp(-sq_dist(x, w.center) / (w.width * w.width));
        return lambda_floor + amplitude * prod;
    }
    case PotentialFamily::decaying_well: {
        const Well& w = wells.front();
        const double dip = 1.0 - std::exp(-sq_dist(x, w.center) / (w.width * w.width));
        const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        return lambda_floor + amplitude * dip * std::exp(-r2 / (envelope_width * envelope_width));
    }
    }
    return lambda_floor;
}

double PotentialSpec::value_at_infinity() const {
    return family == PotentialFamily::multi_well_product ? lambda_floor + amplitude : lambda_floor;
}

double CouplingSpec::evaluate(const Point& x) const {
    switch (family) {
    case CouplingFamily::zero: return 0.0;
    case CouplingFamily::constant_negative: return -c0;
    case CouplingFamily::localized_negative: return -c0 * std::exp(-sq_dist(x, center) / (width * width));
    }
    return 0.0;
}

double critical_exponent(int dim, double alpha) {
    if (dim > 2.0 * alpha) return 2.0 * dim / (dim - 2.0 * alpha);
    return std::numeric_limits<double>::infinity();
}

bool exponents_admissible(int dim, double alpha, double p, double q) {
    if (!(q > 0.0 && q <= p)) return false;
    if (dim <= 4.0 * alpha) {
        if (p > 1.0) return false;
    } else if (!(p < 2.0 * alpha / (dim - 2.0 * alpha))) {
        return false;
    }
    return 2.0 * p + 2.0 < critical_exponent(dim, alpha);
}

double ModelSpec::seminorm_coefficient() const {
    return frame == Frame::physical ? std::pow(epsilon, 2.0 * alpha) : 1.0;
}

double ModelSpec::measure_factor() const { return std::pow(length_scale(), grid.dim); }

void ModelSpec::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidModel, msg); };
    (void)make_grid(grid.dim, grid.half_width, grid.points_per_dim);
    if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0, 1)");
    if (!exponents_admissible(grid.dim, alpha, p, q))
        fail("exponents violate 0 < q <= p with 2p+2 below the critical exponent");
    if (!(mu1 > 0.0 && mu2 > 0.0)) fail("mu1 and mu2 must be positive");
    if (!(epsilon > 0.0)) fail("epsilon must be positive");
    for (const PotentialSpec* pot : {&potential1, &potential2}) {
        if (!(pot->lambda_floor > 0.0)) fail("lambda_floor must be positive");
        if (pot->amplitude < 0.0) fail("amplitude must be nonnegative");
        if (pot->family != PotentialFamily::constant && pot->wells.empty()) fail("well family needs at least one well");
        if (pot->family == PotentialFamily::decaying_well && pot->wells.size() != 1)
            fail("decaying_well takes exactly one well");
        if (pot->family == PotentialFamily::decaying_well && !(pot->envelope_width > 0.0))
            fail("envelope_width must be positive");
        for (const auto& w : pot->wells)
            if (!(w.width > 0.0)) fail("well width must be positive");
    }
    if (coupling.c0 < 0.0) fail("coupling c0 must be nonnegative");
    if (coupling.family == CouplingFamily::localized_negative && !(coupling.width > 0.0))
        fail("coupling width must be positive");
}

SampledPotentials sample_potentials(const ModelSpec& model) {
    model.validate();
    const GridSpec& g = model.grid;
    SampledPotentials out{Field(g), Field(g), Field(g)};
    const auto n = static_cast<std::ptrdiff_t>(g.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        const auto i = static_cast<std::size_t>(k);
        const Point x = model.to_physical(g.node(i));
        out.v1.values[i] = model.potential1.evaluate(x);
        out.v2.values[i] = model.potential2.evaluate(x);
        out.beta.values[i] = model.coupling.evaluate(x);
    }
    return out;
}

LocalizationSpec default_localization(const ModelSpec& model) {
    LocalizationSpec loc;
    std::vector<Point> centers;
    double widest = 0.0;
    for (const PotentialSpec* pot : {&model.potential1, &model.potential2}) {
        for (const auto& w : pot->wells) {
            widest = std::max(widest, w.width);
            const bool seen = std::any_of(centers.begin(), centers.end(),
                                          [&](const Point& c) { return sq_dist(c, w.center) < 1e-24; });
            if (!seen) centers.push_back(w.center);
        }
    }
    double min_dist = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < centers.size(); ++a)
        for (std::size_t b = a + 1; b < centers.size(); ++b)
            min_dist = std::min(min_dist, std::sqrt(sq_dist(centers[a], centers[b])));
    loc.r0 = std::isfinite(min_dist) ? 0.5 * min_dist : (widest > 0.0 ? widest : 1.0);
    loc.cube_half_width = 0.5 * loc.r0;
    switch (model.coupling.family) {
        case CouplingFamily::constant_negative: loc.c0 = model.coupling.c0; break;
        case CouplingFamily::localized_negative: {
            const double reach = loc.r0 / model.coupling.width;
            loc.c0 = model.coupling.c0 * std::exp(-reach * reach) * (1.0 - 1e-9);
            break;
        }
        case CouplingFamily::zero: break;
    }

    // A constant potential has no declared wells; its single index sits at the origin.
    auto well_centers = [](const PotentialSpec& pot) {
        std::vector<Point> out;
        for (const auto& w : pot.wells) out.push_back(w.center);
        if (out.empty()) out.push_back(Point{0.0, 0.0, 0.0});
        return out;
    };
    const auto w1 = well_centers(model.potential1);
    const auto w2 = well_centers(model.potential2);
    std::vector<std::pair<int, int>> shared, rest;
    for (std::size_t i = 0; i < w1.size(); ++i)
        for (std::size_t j = 0; j < w2.size(); ++j) {
            const std::pair<int, int> ij{static_cast<int>(i) + 1, static_cast<int>(j) + 1};
            (sq_dist(w1[i], w2[j]) < 1e-24 ? shared : rest).push_back(ij);
        }
    loc.shared_minima_count = static_cast<int>(shared.size());
    loc.pairs = shared;
    loc.pairs.insert(loc.pairs.end(), rest.begin(), rest.end());
    return loc;
}

bool HypothesisReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const HypothesisCheck& c) { return c.passed; });
}

std::vector<std::string> HypothesisReport::failures() const {
    std::vector<std::string> out;
    for (const auto& c : checks)
        if (!c.passed) out.push_back(c.name + " (" + c.detail + ")");
    return out;
}

std::string HypothesisReport::to_text() const {
    std::ostringstream os;
    os << "lambda1 (grid min) = " << lambda1 << "\n";
    os << "lambda2 (grid min) = " << lambda2 << "\n";
    os << "shared minima m   = " << shared_minima << "\n";
    for (const auto& c : checks) os << (c.passed ? "[pass] " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
    return os.str();
}

HypothesisReport check_hypotheses(const ModelSpec& model, const LocalizationSpec& loc) {
    HypothesisReport rep;
    auto add = [&](std::string name, bool ok, std::string detail) {
        rep.checks.push_back({std::move(name), ok, std::move(detail)});
    };

    try {
        model.validate();
        add("parameters", true, "alpha, exponents, mu, epsilon admissible");
    } catch (const Error& e) {
        add("parameters", false, e.what());
        return rep;
    }

    const int dim = model.dim();
    const GridSpec& g = model.grid;
    const auto fields = sample_potentials(model);
    const double h_phys = model.physical_spacing();
    const double box = model.physical_half_width();

    // (D1) boundedness: closed-form families are bounded; confirm on the grid.
    for (int l = 1; l <= 2; ++l) {
        const PotentialSpec& pot = l == 1 ? model.potential1 : model.potential2;
        const Field& v = l == 1 ? fields.v1 : fields.v2;
        const bool ok = v.all_finite() && v.min_value() >= pot.lambda_floor - 1e-12 &&
                        v.max_value() <= pot.lambda_floor + pot.amplitude + 1e-12;
        add("D1 bounded V" + std::to_string(l), ok,
            "range [" + std::to_string(v.min_value()) + ", " + std::to_string(v.max_value()) + "]");
    }
    rep.lambda1 = fields.v1.min_value();
    rep.lambda2 = fields.v2.min_value();

    // Margin rule: every well center lies inside the box with margin >= 3w.
    for (int l = 1; l <= 2; ++l) {
        const PotentialSpec& pot = l == 1 ? model.potential1 : model.potential2;
        for (std::size_t i = 0; i < pot.wells.size(); ++i) {
            const Well& w = pot.wells[i];
            double margin = std::numeric_limits<double>::infinity();
            for (int d = 0; d < dim; ++d) margin = std::min(margin, box - std::abs(w.center[d]));
            add("margin z_" + std::to_string(l) + "," + std::to_string(i + 1), margin >= 3.0 * w.width,
                "margin " + std::to_string(margin) + " vs 3w = " + std::to_string(3.0 * w.width));
        }
    }

    // (D2) minima structure.
    for (int l = 1; l <= 2; ++l) {
        const PotentialSpec& pot = l == 1 ? model.potential1 : model.potential2;
        const Field& v = l == 1 ? fields.v1 : fields.v2;
        if (pot.family == PotentialFamily::constant) {
            add("D2 minima V" + std::to_string(l), true, "constant potential (decoupled control), not applicable");
            continue;
        }
        const double grid_min = v.min_value();
        double worst_node_gap = 0.0;
        for (const auto& w : pot.wells) {
            const double r = 0.5 * h_phys * std::sqrt(static_cast<double>(dim));
            worst_node_gap = std::max(worst_node_gap, pot.evaluate(w.center + Point{r, 0, 0}) - pot.lambda_floor);
        }
        const bool min_consistent = grid_min >= pot.lambda_floor - 1e-12 && grid_min <= pot.lambda_floor + worst_node_gap + 1e-12;
        add("D2 grid minimum V" + std::to_string(l), min_consistent && pot.lambda_floor > 0.0,
            "grid min " + std::to_string(grid_min) + " vs lambda " + std::to_string(pot.lambda_floor));
        for (std::size_t i = 0; i < pot.wells.size(); ++i) {
            const Well& w = pot.wells[i];
            // Grid argmin inside a 2-cell neighbourhood of the declared center.
            double best = std::numeric_limits<double>::infinity();
            Point best_x{};
            for (std::size_t k = 0; k < g.size(); ++k) {
                const Point x = model.to_physical(g.node(k));
                bool near = true;
                for (int d = 0; d < dim; ++d) near = near && std::abs(x[d] - w.center[d]) <= 2.0 * h_phys;
                if (near && v.values[k] < best) {
                    best = v.values[k];
                    best_x = x;
                }
            }
            bool within = std::isfinite(best);
            for (int d = 0; d < dim && within; ++d) within = std::abs(best_x[d] - w.center[d]) <= h_phys * (1 + 1e-12);
            add("D2 detected z_" + std::to_string(l) + "," + std::to_string(i + 1), within,
                "declared " + point_str(w.center, dim) + ", grid argmin " + point_str(best_x, dim));

            const double s = loc.cube_half_width;
            double boundary_min = std::numeric_limits<double>::infinity();
            for (const Point& x : cube_boundary_samples(w.center, s, dim))
                boundary_min = std::min(boundary_min, pot.evaluate(x) - pot.lambda_floor);
            add("D2 isolation z_" + std::to_string(l) + "," + std::to_string(i + 1), boundary_min > 0.0,
                "min (V - lambda) on boundary of C_s = " + std::to_string(boundary_min));
        }
    }

    // Localization geometry.
    {
        const double s = loc.cube_half_width;
        bool inside = true;
        for (const PotentialSpec* pot : {&model.potential1, &model.potential2})
            for (const auto& w : pot->wells)
                for (int d = 0; d < dim; ++d) inside = inside && std::abs(w.center[d]) + s < box;
        add("cubes", s > 0.0 && s < loc.r0 && inside,
            "s = " + std::to_string(s) + ", r0 = " + std::to_string(loc.r0) + (inside ? "" : ", cube leaves box"));
    }

    // (D3) beta nonpositive and bounded.
    {
        const bool ok = fields.beta.all_finite() && fields.beta.max_value() <= 0.0;
        add("D3 beta <= 0", ok, "max beta = " + std::to_string(fields.beta.max_value()));
    }

    // (D4) shared minima with beta <= -c0 on B_{r0}(z_{1,i}).
    {
        const int m = loc.shared_minima_count;
        const int k = static_cast<int>(model.potential1.wells.size());
        const int l = static_cast<int>(model.potential2.wells.size());
        rep.shared_minima = m;
        bool ok = m >= 0 && m <= std::min(k, l) && static_cast<int>(loc.pairs.size()) >= m;
        std::string detail = "m = " + std::to_string(m);
        if (ok && m >= 1 && !(loc.c0 > 0.0)) {
            ok = false;
            detail += ", c0 must be positive";
        }
        for (int t = 0; ok && t < m; ++t) {
            const auto [i, j] = loc.pairs[static_cast<std::size_t>(t)];
            if (i < 1 || i > k || j < 1 || j > l) {
                ok = false;
                detail += ", pair index out of range";
                break;
            }
            const Point z1 = model.potential1.wells[static_cast<std::size_t>(i - 1)].center;
            const Point z2 = model.potential2.wells[static_cast<std::size_t>(j - 1)].center;
            if (sq_dist(z1, z2) > 1e-24) {
                ok = false;
                detail += ", pair (" + std::to_string(i) + "," + std::to_string(j) + ") does not share a center";
                break;
            }
            double worst = model.coupling.evaluate(z1);
            for (std::size_t node = 0; node < g.size(); ++node) {
                const Point x = model.to_physical(g.node(node));
                if (sq_dist(x, z1) <= loc.r0 * loc.r0) worst = std::max(worst, fields.beta.values[node]);
            }
            if (worst > -loc.c0) {
                ok = false;
                detail += ", max beta on B_r0(z_1," + std::to_string(i) + ") = " + std::to_string(worst) +
                          " > -c0 = " + std::to_string(-loc.c0);
            }
        }
        add("D4 coupling at shared minima", ok, detail);
    }
    return rep;
}

HypothesisReport validate_hypotheses(const ModelSpec& model, const LocalizationSpec& localization) {
    auto rep = check_hypotheses(model, localization);
    if (!rep.all_passed()) {
        std::string msg;
        for (const auto& f : rep.failures()) msg += (msg.empty() ? "" : "; ") + f;
        throw Error(ErrorKind::HypothesisViolation, msg);
    }
    return rep;
}

}  // namespace fracnls
