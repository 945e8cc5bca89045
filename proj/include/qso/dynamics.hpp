#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qso/construct.hpp"

namespace qso {

// Point of the probability simplex over the cell set.
struct SimplexPoint {
    std::vector<double> x;

    // Validates and repairs: coordinates >= -1e-12 are clamped to 0 (worse is
    // rejected), the total must be within 1e-9 of 1 and is then renormalized.
    static SimplexPoint make(std::vector<double> coords);
    static SimplexPoint uniform(std::size_t n);
    static SimplexPoint vertex(std::size_t n, std::size_t k);

    std::size_t dim() const { return x.size(); }
    double operator[](std::size_t i) const { return x[i]; }
    double min_coordinate() const;
    bool is_boundary(double tol = 1e-15) const { return min_coordinate() <= tol; }
    bool is_interior(double tol = 1e-15) const { return !is_boundary(tol); }
};

// One application of the operator; result clamped/renormalized with the same
// integrity guards as iterate().
SimplexPoint apply(const QsoOperator& op, const SimplexPoint& x);

// Canonical Volterra step x'_k = x_k (1 + sum_i a_{ki} x_i).
SimplexPoint apply_volterra(const SkewMatrix& a, const SimplexPoint& x);

enum class StopReason { Converged, Budget };

struct Trajectory {
    SimplexPoint x0;
    // Recorded points (iteration index, state); indices strictly increasing
    // starting at 0; always includes the final window + 1 consecutive points.
    std::vector<std::pair<std::size_t, SimplexPoint>> records;
    std::size_t steps = 0;
    StopReason reason = StopReason::Budget;
    std::size_t window = 50;  // W used by the convergence detector

    // Integrity diagnostics accumulated before clamp/renormalize each step.
    double max_drift = 0.0;        // max |sum x - 1| pre-renormalization
    double min_pre_clamp = 1.0;    // most negative coordinate seen pre-clamp
    double final_residual = 0.0;   // ||x_last - x_prev||_inf

    const SimplexPoint& final_point() const { return records.back().second; }
};

struct IterateOptions {
    std::size_t max_steps = 10000;
    double tol = 1e-9;           // per-step residual for convergence detection
    std::size_t window = 50;     // consecutive sub-tol steps required
    std::size_t record_stride = 0;   // 0 = choose automatically
    std::size_t max_records = 2048;  // advisory bound for automatic stride
};

// Raw step: maps state into out (same length), no simplex repair.
using StepFn = std::function<void(const std::vector<double>&, std::vector<double>&)>;

// Iterates x^(l+1) = V(x^(l)), clamping and renormalizing after every step and
// aborting with NumericalIntegrityError if pre-repair drift exceeds 1e-9 or a
// coordinate falls below -1e-12. Stops early once the residual has stayed
// <= tol for `window` consecutive steps, but never before 2*window steps so
// that converged runs always carry enough history for classify_limit.
Trajectory iterate(const StepFn& step, std::size_t n, const SimplexPoint& x0,
                   const IterateOptions& opts = {});
Trajectory iterate(const QsoOperator& op, const SimplexPoint& x0, const IterateOptions& opts = {});
Trajectory iterate_volterra(const SkewMatrix& a, const SimplexPoint& x0,
                            const IterateOptions& opts = {});

// A named set of simplex points cut out by coordinate equalities: listed
// coordinates zero, listed pairs equal. Used for fixed-set membership reports.
struct NamedSet {
    std::string name;
    std::vector<std::size_t> zero_coords;
    std::vector<std::pair<std::size_t, std::size_t>> equal_pairs;

    // Max constraint violation at x (0 means member).
    double violation(const SimplexPoint& x) const;
};

enum class LimitClass { ConvergedToPoint, ConvergedToSet, NonConvergent, Undecided };

// Log-linear decay diagnostics of one coordinate over a trajectory tail.
struct DecayFit {
    enum class Status { Fitted, InsufficientData, CoordinateZero };
    Status status = Status::InsufficientData;
    double slope = 0.0;     // d log x / d l
    double goodness = 0.0;  // coefficient of determination
    bool geometric = false; // slope < 0 and goodness >= 0.99
};

// Least-squares fit of log x_j over the final half of the recorded points
// (at most 1000 samples). Values <= 1e-300 end the usable range; a final
// value down there reports CoordinateZero (decay already complete). Needs
// at least 100 usable points, else InsufficientData.
DecayFit fit_log_decay(const Trajectory& traj, std::size_t coord);

struct LimitReport {
    LimitClass classification = LimitClass::Undecided;
    std::optional<SimplexPoint> limit;   // the final point when converged
    std::vector<std::string> memberships;  // named sets containing the limit/tail
    double final_residual = 0.0;
    double tail_amplitude = 0.0;  // max over coords of (max - min) on the final half
    double min_coordinate_start = 0.0;  // boundary-approach diagnostic ...
    double min_coordinate_final = 0.0;  // ... min coordinate at start vs end
    std::vector<DecayFit> coordinate_fits;

    bool approached_boundary() const { return min_coordinate_final < min_coordinate_start; }
};

struct ClassifyOptions {
    double tol = 1e-9;            // matches the iterate() residual tolerance
    std::size_t window = 50;      // W: consecutive sub-tol steps for convergence
    double membership_tol = 1e-6; // named-set membership tolerance
};

// Classifies the tail of a trajectory:
//  - ConvergedToPoint: residual <= tol over the final W consecutive steps
//    (memberships list every named set containing the limit);
//  - ConvergedToSet: not point-converged, tail oscillates (>= 10 tol) but
//    stays within membership_tol of a single named set;
//  - NonConvergent: tail oscillation amplitude >= 10 tol sustained over the
//    final half of the run (both quarters of that half);
//  - Undecided otherwise.
// Throws TooShort when the run is shorter than 2 W steps.
LimitReport classify_limit(const Trajectory& traj, const std::vector<NamedSet>& named_sets = {},
                           const ClassifyOptions& opts = {});

bool is_fixed(const QsoOperator& op, const SimplexPoint& x, double tol);
bool is_fixed_volterra(const SkewMatrix& a, const SimplexPoint& x, double tol);

// The canonical fixed-set family of a two-component model with two
// configurations per component (the 4-cell case): the four marginal faces and
// the two diagonal sets. Empty for any other shape.
std::vector<NamedSet> standard_fixed_sets(const ConfigurationSpace& space);

}  // namespace qso
