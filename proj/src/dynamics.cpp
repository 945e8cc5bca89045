#include "qso/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace qso {

namespace {

// Shared simplex repair. Entry points (user x0) flag violations as
// ValidationError; the iteration loop flags them as numerical-integrity
// failures instead (the state was valid and the dynamics broke it).
void repair(std::vector<double>& v, bool user_input, double* max_drift, double* min_pre_clamp) {
    double sum = 0.0, mn = std::numeric_limits<double>::infinity();
    for (double c : v) {
        sum += c;
        mn = std::min(mn, c);
    }
    double drift = std::abs(sum - 1.0);
    if (max_drift) *max_drift = std::max(*max_drift, drift);
    if (min_pre_clamp) *min_pre_clamp = std::min(*min_pre_clamp, mn);

    if (mn < -1e-12) {
        std::string msg = "coordinate " + std::to_string(mn) + " below -1e-12";
        if (user_input) throw ValidationError(msg);
        throw NumericalIntegrityError(msg);
    }
    if (drift > 1e-9) {
        std::string msg = "coordinate sum " + std::to_string(sum) + " drifted beyond 1e-9";
        if (user_input) throw ValidationError(msg);
        throw NumericalIntegrityError(msg);
    }
    bool clamped = false;
    for (double& c : v)
        if (c < 0.0) {
            c = 0.0;
            clamped = true;
        }
    if (clamped) {
        sum = 0.0;
        for (double c : v) sum += c;
    }
    for (double& c : v) c /= sum;
}

// Reusable stepper for generated operators: the coefficient mass of each
// parent pair is scattered over its admissible set, so a step costs
// O(n^2 * 2^d) instead of touching an n^3 tensor.
struct GeneratedStepper {
    explicit GeneratedStepper(const ModelSpec& model) : m(model) {
        const auto& comps = m.space.components;
        n = m.space.cell_count;
        mcount = comps.size();
        strides.assign(mcount, 1);
        for (std::size_t i = mcount; i-- > 1;)
            strides[i - 1] = strides[i] * comps[i].config_count();
        cfg.resize(n * mcount);
        for (std::size_t c = 0; c < n; ++c) {
            Cell cell = m.space.cell_of(c);
            for (std::size_t i = 0; i < mcount; ++i) cfg[c * mcount + i] = cell[i];
        }
    }

    void operator()(const std::vector<double>& x, std::vector<double>& out) const {
        std::fill(out.begin(), out.end(), 0.0);
        std::vector<std::size_t> diff(mcount);
        for (std::size_t i = 0; i < n; ++i) {
            if (x[i] == 0.0) continue;
            const std::uint32_t* ci = &cfg[i * mcount];
            for (std::size_t j = i; j < n; ++j) {
                if (x[j] == 0.0) continue;
                const std::uint32_t* cj = &cfg[j * mcount];
                double w = (i == j ? x[i] * x[i] : 2.0 * x[i] * x[j]);

                // Split components into agreeing (fixed contribution) and
                // disagreeing (binary choice), and accumulate the closed-form
                // denominator along the way.
                std::size_t d = 0;
                double base_mass = 1.0, denom = 1.0;
                std::size_t base_index = 0;
                for (std::size_t c = 0; c < mcount; ++c) {
                    const auto& mu = m.measure.components[c];
                    if (ci[c] == cj[c]) {
                        base_mass *= mu.of(ci[c]);
                        base_index += ci[c] * strides[c];
                        denom *= mu.of(ci[c]);
                    } else {
                        diff[d++] = c;
                        denom *= mu.of(ci[c]) + mu.of(cj[c]);
                    }
                }
                double scale = w / denom;
                for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
                    double mass = base_mass;
                    std::size_t idx = base_index;
                    for (std::size_t b = 0; b < d; ++b) {
                        std::size_t c = diff[b];
                        std::uint32_t pick = (mask >> b & 1) ? cj[c] : ci[c];
                        mass *= m.measure.components[c].of(pick);
                        idx += pick * strides[c];
                    }
                    out[idx] += scale * mass;
                }
            }
        }
    }

    const ModelSpec& m;
    std::size_t n = 0, mcount = 0;
    std::vector<std::size_t> strides;
    std::vector<std::uint32_t> cfg;
};

StepFn make_step(const QsoOperator& op) {
    if (op.is_generated()) {
        auto stepper = std::make_shared<GeneratedStepper>(op.model());
        return [stepper](const std::vector<double>& x, std::vector<double>& out) {
            (*stepper)(x, out);
        };
    }
    auto t = std::make_shared<HeredityTensor>(op.tensor());
    return [t](const std::vector<double>& x, std::vector<double>& out) {
        const std::size_t n = t->n;
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (x[i] == 0.0) continue;
            for (std::size_t j = i; j < n; ++j) {
                if (x[j] == 0.0) continue;
                double w = (i == j ? x[i] * x[i] : 2.0 * x[i] * x[j]);
                const double* row = &t->p[(i * n + j) * n];
                for (std::size_t k = 0; k < n; ++k) out[k] += w * row[k];
            }
        }
    };
}

StepFn make_volterra_step(const SkewMatrix& a) {
    auto mat = std::make_shared<SkewMatrix>(a);
    return [mat](const std::vector<double>& x, std::vector<double>& out) {
        const std::size_t n = mat->n;
        for (std::size_t k = 0; k < n; ++k) {
            double g = 0.0;
            const double* row = &mat->a[k * n];
            for (std::size_t i = 0; i < n; ++i) g += row[i] * x[i];
            out[k] = x[k] * (1.0 + g);
        }
    };
}

}  // namespace

SimplexPoint SimplexPoint::make(std::vector<double> coords) {
    if (coords.empty()) throw ValidationError("simplex point needs at least one coordinate");
    repair(coords, /*user_input=*/true, nullptr, nullptr);
    SimplexPoint p;
    p.x = std::move(coords);
    return p;
}

SimplexPoint SimplexPoint::uniform(std::size_t n) {
    return make(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

SimplexPoint SimplexPoint::vertex(std::size_t n, std::size_t k) {
    std::vector<double> v(n, 0.0);
    v.at(k) = 1.0;
    return make(std::move(v));
}

double SimplexPoint::min_coordinate() const {
    return *std::min_element(x.begin(), x.end());
}

SimplexPoint apply(const QsoOperator& op, const SimplexPoint& x) {
    if (x.dim() != op.dim()) throw DimensionMismatch(op.dim(), x.dim());
    std::vector<double> out(x.dim());
    make_step(op)(x.x, out);
    repair(out, /*user_input=*/false, nullptr, nullptr);
    SimplexPoint p;
    p.x = std::move(out);
    return p;
}

SimplexPoint apply_volterra(const SkewMatrix& a, const SimplexPoint& x) {
    if (x.dim() != a.n) throw DimensionMismatch(a.n, x.dim());
    std::vector<double> out(x.dim());
    make_volterra_step(a)(x.x, out);
    repair(out, /*user_input=*/false, nullptr, nullptr);
    SimplexPoint p;
    p.x = std::move(out);
    return p;
}

Trajectory iterate(const StepFn& step, std::size_t n, const SimplexPoint& x0,
                   const IterateOptions& opts) {
    if (opts.max_steps < 1) throw ValidationError("max_steps must be >= 1");
    if (x0.dim() != n) throw DimensionMismatch(n, x0.dim());
    const std::size_t W = std::max<std::size_t>(opts.window, 1);

    std::size_t stride = opts.record_stride;
    if (stride == 0) {
        std::size_t budget = opts.max_records > W + 2 ? opts.max_records - W - 2 : 1;
        stride = std::max<std::size_t>(1, (opts.max_steps + budget - 1) / budget);
    }

    Trajectory traj;
    traj.x0 = x0;
    traj.window = W;
    traj.records.emplace_back(0, x0);

    std::vector<double> cur = x0.x, next(n);
    // Ring of the last W+1 states so the final window is always recorded.
    std::deque<std::pair<std::size_t, std::vector<double>>> ring;
    ring.emplace_back(0, cur);

    std::size_t streak = 0, l = 0;
    traj.reason = StopReason::Budget;
    for (l = 1; l <= opts.max_steps; ++l) {
        step(cur, next);
        repair(next, /*user_input=*/false, &traj.max_drift, &traj.min_pre_clamp);
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(next[i] - cur[i]));
        cur.swap(next);
        traj.final_residual = res;

        ring.emplace_back(l, cur);
        if (ring.size() > W + 1) ring.pop_front();
        if (l % stride == 0) {
            SimplexPoint p;
            p.x = cur;
            traj.records.emplace_back(l, std::move(p));
        }

        streak = (res <= opts.tol) ? streak + 1 : 0;
        // Never stop before 2W steps: classify_limit needs that much history,
        // and a run that converged in fewer stays fixed anyway.
        if (streak >= W && l >= 2 * W) {
            traj.reason = StopReason::Converged;
            break;
        }
    }
    traj.steps = std::min(l, opts.max_steps);

    // Merge the final window into the records: drop stride samples that fall
    // inside the ring's range, then append the whole ring so the last W+1
    // states are always present and consecutive.
    while (!traj.records.empty() && traj.records.back().first >= ring.front().first)
        traj.records.pop_back();
    for (auto& [idx, state] : ring) {
        SimplexPoint p;
        p.x = std::move(state);
        traj.records.emplace_back(idx, std::move(p));
    }
    return traj;
}

Trajectory iterate(const QsoOperator& op, const SimplexPoint& x0, const IterateOptions& opts) {
    return iterate(make_step(op), op.dim(), x0, opts);
}

Trajectory iterate_volterra(const SkewMatrix& a, const SimplexPoint& x0,
                            const IterateOptions& opts) {
    return iterate(make_volterra_step(a), a.n, x0, opts);
}

double NamedSet::violation(const SimplexPoint& x) const {
    double v = 0.0;
    for (std::size_t i : zero_coords) v = std::max(v, std::abs(x[i]));
    for (const auto& [a, b] : equal_pairs) v = std::max(v, std::abs(x[a] - x[b]));
    return v;
}

DecayFit fit_log_decay(const Trajectory& traj, std::size_t coord) {
    DecayFit fit;
    // Tail = final half of the recorded points, at most 1000 samples.
    std::vector<std::pair<double, double>> pts;  // (l, log x)
    const std::size_t half_index = traj.steps / 2;
    std::vector<const std::pair<std::size_t, SimplexPoint>*> tail;
    for (const auto& rec : traj.records)
        if (rec.first >= half_index) tail.push_back(&rec);
    if (tail.empty()) return fit;

    if (tail.back()->second[coord] <= 1e-300) {
        fit.status = DecayFit::Status::CoordinateZero;
        return fit;
    }
    std::size_t step = std::max<std::size_t>(1, tail.size() / 1000);
    for (std::size_t i = 0; i < tail.size(); i += step) {
        double v = tail[i]->second[coord];
        if (v > 1e-300) pts.emplace_back(static_cast<double>(tail[i]->first), std::log(v));
    }
    if (pts.size() < 100) {
        fit.status = DecayFit::Status::InsufficientData;
        return fit;
    }

    double ml = 0.0, mv = 0.0;
    for (auto& [l, v] : pts) {
        ml += l;
        mv += v;
    }
    ml /= pts.size();
    mv /= pts.size();
    double sll = 0.0, slv = 0.0, svv = 0.0;
    for (auto& [l, v] : pts) {
        sll += (l - ml) * (l - ml);
        slv += (l - ml) * (v - mv);
        svv += (v - mv) * (v - mv);
    }
    fit.status = DecayFit::Status::Fitted;
    fit.slope = slv / sll;
    // A flat line carries no decay signal; don't let numerical noise in svv
    // manufacture a perfect fit.
    fit.goodness = (svv > 1e-20) ? (slv * slv) / (sll * svv) : 0.0;
    fit.geometric = fit.slope < 0.0 && fit.goodness >= 0.99;
    return fit;
}

LimitReport classify_limit(const Trajectory& traj, const std::vector<NamedSet>& named_sets,
                           const ClassifyOptions& opts) {
    const std::size_t W = std::max<std::size_t>(opts.window, 1);
    if (traj.steps < 2 * W) throw TooShort(traj.steps, 2 * W);

    LimitReport rep;
    const auto& recs = traj.records;
    const std::size_t n = traj.x0.dim();

    rep.min_coordinate_start = recs.front().second.min_coordinate();
    rep.min_coordinate_final = recs.back().second.min_coordinate();
    rep.final_residual = traj.final_residual;

    // Convergence: residual <= tol across the final W consecutive recorded
    // steps (the iterate() ring guarantees they are present).
    bool converged = false;
    if (recs.size() >= W + 1) {
        converged = true;
        for (std::size_t r = recs.size() - W; r < recs.size(); ++r) {
            if (recs[r].first != recs[r - 1].first + 1) {
                converged = false;
                break;
            }
            double res = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                res = std::max(res, std::abs(recs[r].second[i] - recs[r - 1].second[i]));
            if (res > opts.tol) {
                converged = false;
                break;
            }
        }
    }
    converged = converged || traj.reason == StopReason::Converged;

    // Tail = recorded points in the final half of the run.
    std::vector<const SimplexPoint*> tail, last_quarter;
    for (const auto& [idx, p] : recs) {
        if (idx >= traj.steps / 2) tail.push_back(&p);
        if (idx >= traj.steps - traj.steps / 4) last_quarter.push_back(&p);
    }
    auto amplitude = [n](const std::vector<const SimplexPoint*>& pts) {
        double amp = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (const auto* p : pts) {
                lo = std::min(lo, (*p)[i]);
                hi = std::max(hi, (*p)[i]);
            }
            amp = std::max(amp, hi - lo);
        }
        return amp;
    };
    rep.tail_amplitude = amplitude(tail);

    for (std::size_t i = 0; i < n; ++i) rep.coordinate_fits.push_back(fit_log_decay(traj, i));

    if (converged) {
        rep.classification = LimitClass::ConvergedToPoint;
        rep.limit = recs.back().second;
        for (const auto& s : named_sets)
            if (s.violation(*rep.limit) <= opts.membership_tol) rep.memberships.push_back(s.name);
        return rep;
    }

    // Oscillation must show in the final quarter too, otherwise a long-dead
    // transient would masquerade as sustained non-convergence.
    bool oscillating =
        rep.tail_amplitude >= 10.0 * opts.tol && amplitude(last_quarter) >= 10.0 * opts.tol;
    if (oscillating) {
        for (const auto& s : named_sets) {
            bool inside = true;
            for (const auto* p : tail)
                if (s.violation(*p) > opts.membership_tol) {
                    inside = false;
                    break;
                }
            if (inside) rep.memberships.push_back(s.name);
        }
        rep.classification =
            rep.memberships.empty() ? LimitClass::NonConvergent : LimitClass::ConvergedToSet;
        return rep;
    }

    rep.classification = LimitClass::Undecided;
    return rep;
}

bool is_fixed(const QsoOperator& op, const SimplexPoint& x, double tol) {
    SimplexPoint y = apply(op, x);
    double res = 0.0;
    for (std::size_t i = 0; i < x.dim(); ++i) res = std::max(res, std::abs(y[i] - x[i]));
    return res <= tol;
}

bool is_fixed_volterra(const SkewMatrix& a, const SimplexPoint& x, double tol) {
    SimplexPoint y = apply_volterra(a, x);
    double res = 0.0;
    for (std::size_t i = 0; i < x.dim(); ++i) res = std::max(res, std::abs(y[i] - x[i]));
    return res <= tol;
}

std::vector<NamedSet> standard_fixed_sets(const ConfigurationSpace& space) {
    if (space.components.size() != 2 || space.components[0].config_count() != 2 ||
        space.components[1].config_count() != 2)
        return {};
    // Coordinates are (0,0),(0,1),(1,0),(1,1) in index order. S1..S4 are the
    // marginal faces, S5/S6 the diagonal sets where one marginal is uniform.
    return {
        {"S1", {2, 3}, {}},          // first component pinned to its first configuration
        {"S2", {0, 1}, {}},          // ... to its second
        {"S3", {1, 3}, {}},          // second component pinned to its first configuration
        {"S4", {0, 2}, {}},          // ... to its second
        {"S5", {}, {{1, 3}, {0, 2}}},
        {"S6", {}, {{0, 1}, {2, 3}}},
    };
}

}  // namespace qso
