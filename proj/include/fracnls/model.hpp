#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fracnls/grid.hpp"

namespace fracnls {

// Coordinates the grid is laid out in. `physical` grids resolve x directly and
// carry epsilon^{2 alpha} on the seminorm; `rescaled` grids resolve y = x / eps,
// sample V(eps y) and drop the epsilon factor, which keeps spikes of width eps
// resolved for small eps. Energies reported by the library are always physical.
enum class Frame { physical, rescaled };

struct Well {
    Point center{0.0, 0.0, 0.0};
    double width = 1.0;
};

enum class PotentialFamily { constant, multi_well_product, decaying_well };

struct PotentialSpec {
    PotentialFamily family = PotentialFamily::constant;
    double lambda_floor = 1.0;
    double amplitude = 0.0;
    std::vector<Well> wells;
    double envelope_width = 1.0;  // decaying_well only

    // Closed-form value at a physical point.
    double evaluate(const Point& x) const;
    // Value approached as |x| -> infinity.
    double value_at_infinity() const;
};

enum class CouplingFamily { zero, constant_negative, localized_negative };

struct CouplingSpec {
    CouplingFamily family = CouplingFamily::zero;
    double c0 = 0.0;  // magnitude: beta = -c0 (constant) or -c0 exp(-|x-center|^2/width^2)
    Point center{0.0, 0.0, 0.0};
    double width = 1.0;

    double evaluate(const Point& x) const;
};

struct ModelSpec {
    double alpha = 0.5;
    double p = 0.5;
    double q = 0.5;
    double mu1 = 1.0;
    double mu2 = 1.0;
    double epsilon = 1.0;
    PotentialSpec potential1;
    PotentialSpec potential2;
    CouplingSpec coupling;
    GridSpec grid;
    Frame frame = Frame::rescaled;

    // Throws InvalidModel (parameters, subcriticality) or HypothesisViolation
    // (well margin) on failure.
    void validate() const;

    int dim() const { return grid.dim; }
    // Physical length of one frame unit: eps for rescaled grids, 1 otherwise.
    double length_scale() const { return frame == Frame::rescaled ? epsilon : 1.0; }
    // Coefficient in front of the seminorm in frame units.
    double seminorm_coefficient() const;
    // Physical measure of one frame unit volume (length_scale^N).
    double measure_factor() const;
    Point to_physical(const Point& y) const { return length_scale() * y; }
    Point to_frame(const Point& x) const { return (1.0 / length_scale()) * x; }
    // Physical distance corresponding to one grid cell.
    double physical_spacing() const { return length_scale() * grid.spacing; }
    double physical_half_width() const { return length_scale() * grid.half_width; }
};

// True iff 2p+2 is below the fractional critical exponent and the
// exponent conditions 0 < q <= p (p <= 1 when N <= 4 alpha) hold.
bool exponents_admissible(int dim, double alpha, double p, double q);
// 2N/(N - 2 alpha) for N > 2 alpha, +infinity otherwise.
double critical_exponent(int dim, double alpha);

struct SampledPotentials {
    Field v1;
    Field v2;
    Field beta;
};

SampledPotentials sample_potentials(const ModelSpec& model);

struct LocalizationSpec {
    double cube_half_width = 0.0;  // s
    int shared_minima_count = 0;   // m
    // 1-based (i, j); the first m entries are the shared minima.
    std::vector<std::pair<int, int>> pairs;
    double r0 = 0.0;
    double c0 = 0.1;  // threshold with beta <= -c0 on B_{r0}(z_{1,i}) for shared pairs
};

// r0 = half the minimal distance between distinct declared wells (the widest
// well width when there is only one), s = r0 / 2; shared pairs are detected
// from coinciding centers. c0 is the bound the coupling itself guarantees on
// B_{r0}, or 0.1 when beta vanishes.
LocalizationSpec default_localization(const ModelSpec& model);

struct HypothesisCheck {
    std::string name;
    bool passed = true;
    std::string detail;
};

struct HypothesisReport {
    double lambda1 = 0.0;  // grid minima (consistency only; the family value is authoritative)
    double lambda2 = 0.0;
    int shared_minima = 0;
    std::vector<HypothesisCheck> checks;

    bool all_passed() const;
    std::vector<std::string> failures() const;
    std::string to_text() const;
};

// Evaluates (D1)-(D4) on the sampled grid; never throws for a failed hypothesis.
HypothesisReport check_hypotheses(const ModelSpec& model, const LocalizationSpec& localization);
// As check_hypotheses, but throws HypothesisViolation naming every failed condition.
HypothesisReport validate_hypotheses(const ModelSpec& model, const LocalizationSpec& localization);

}  // namespace fracnls
