#include "qso/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "qso/construct.hpp"
#include "qso/dynamics.hpp"
#include "qso/model_file.hpp"
#include "qso/reduction.hpp"
#include "qso/tournament.hpp"

namespace qso {

namespace {

// Shortest decimal that round-trips the double (CSV rows must re-parse to the
// exact same states).
std::string shortest(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

std::string point_str(const SimplexPoint& p) {
    std::string s = "(";
    for (std::size_t i = 0; i < p.dim(); ++i) {
        if (i) s += ", ";
        s += fmt(p[i]);
    }
    return s + ")";
}

std::string index_set_str(const std::vector<std::size_t>& v) {
    std::string s = "{";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(v[i] + 1);  // 1-based in reports
    }
    return s + "}";
}

const char* class_name(LimitClass c) {
    switch (c) {
        case LimitClass::ConvergedToPoint: return "ConvergedToPoint";
        case LimitClass::ConvergedToSet: return "ConvergedToSet";
        case LimitClass::NonConvergent: return "NonConvergent";
        case LimitClass::Undecided: return "Undecided";
    }
    return "?";
}

// Maps thrown domain errors onto the documented exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const NumericalIntegrityError& e) {
        err << "numerical integrity failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_validation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_validation;
    }
}

void write_csv(const Trajectory& t, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot open CSV output file: " + path);
    const std::size_t n = t.x0.dim();
    os << "l";
    for (std::size_t i = 1; i <= n; ++i) os << ",x_" << i;
    os << "\n";
    for (const auto& [idx, p] : t.records) {
        os << idx;
        for (std::size_t i = 0; i < n; ++i) os << "," << shortest(p[i]);
        os << "\n";
    }
    if (!os) throw ValidationError("failed writing CSV output: " + path);
}

void print_matrix(std::ostream& out, const SkewMatrix& a, const std::string& indent) {
    for (std::size_t k = 0; k < a.n; ++k) {
        out << indent << "[";
        for (std::size_t i = 0; i < a.n; ++i) {
            if (i) out << ", ";
            out << fmt(a.at(k, i));
        }
        out << "]\n";
    }
}

// Seeded confirmation run used by `tournament --confirm` and by the empirical
// fallback on degenerate coefficients: iterates the canonical form and fits
// the decay of every coordinate.
void confirmation_run(std::ostream& out, const SkewMatrix& a, std::uint64_t seed,
                      const std::string& indent) {
    RandomSource rng(seed);
    SimplexPoint x0 = SimplexPoint::make(rng.simplex_point(a.n));
    Trajectory t = iterate_volterra(
        a, x0, {.max_steps = 800, .tol = 1e-280, .record_stride = 1, .max_records = 1 << 20});
    out << indent << "confirmation run: 800 steps from " << point_str(x0) << " (seed " << seed
        << ")\n";
    for (std::size_t j = 0; j < a.n; ++j) {
        DecayFit f = decay_fit(t, j);
        out << indent << "  x_" << (j + 1) << ": final " << fmt(t.final_point()[j]);
        switch (f.status) {
            case DecayFit::Status::CoordinateZero:
                out << ", decayed to zero before the fitting window";
                break;
            case DecayFit::Status::InsufficientData:
                out << ", not enough tail data to fit";
                break;
            case DecayFit::Status::Fitted:
                out << ", log-slope " << fmt(f.slope) << " per step (goodness " << fmt(f.goodness)
                    << (f.geometric ? ", geometric decay)" : ", no geometric decay)");
                break;
        }
        out << "\n";
    }
}

// Prediction report for one coefficient matrix; falls back to an empirical
// run when ties make the tournament undefined.
void tournament_report(std::ostream& out, const SkewMatrix& a, bool confirm, std::uint64_t seed,
                       const std::string& indent) {
    bool degenerate = false;
    try {
        Tournament t = build_tournament(a);
        Condensation c = condensation(t);
        out << indent << "tournament: " << (c.strong() ? "strong" : "not strong") << "\n";
        out << indent << "condensation (dominant class first): ";
        for (std::size_t i = 0; i < c.classes.size(); ++i) {
            if (i) out << " < ";
            out << index_set_str(c.classes[i]);
        }
        out << "\n";
        if (c.strong()) {
            out << indent << "no decay prediction (single strong class)\n";
        } else {
            DecayPrediction p = predict_decay(a);
            out << indent << "survivors: " << index_set_str(p.survivors) << "\n";
            out << indent << "decaying: " << index_set_str(p.decaying) << "\n";
        }
    } catch (const DegenerateCoefficients& e) {
        degenerate = true;
        out << indent << "degenerate coefficients: " << e.what() << "\n";
        out << indent << "no tournament; falling back to an empirical run\n";
    }
    if (confirm || degenerate) confirmation_run(out, a, seed, indent);
}

}  // namespace

int cmd_build(const std::string& model_path, const std::optional<std::string>& tensor_export,
              std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() {
        ModelFile file = load_model_file(model_path);
        if (file.has_model()) {
            const ModelSpec& m = file.model();
            QsoOperator op = QsoOperator::generated(m);
            out << m.space.cell_count << " cells, " << m.space.components.size()
                << " components, Volterra: " << (is_volterra(op) ? "yes" : "no") << "\n";
            for (const Component& c : m.space.components) {
                out << "component " << c.index << ": vertices {";
                for (std::size_t i = 0; i < c.vertices.size(); ++i)
                    out << (i ? ", " : "") << c.vertices[i];
                out << "}, alphabet {";
                for (std::size_t i = 0; i < c.alphabet.size(); ++i)
                    out << (i ? ", " : "") << c.alphabet[i];
                out << "}, " << c.config_count() << " configurations\n";
            }
            if (tensor_export) {
                write_tensor_json(materialize(m), *tensor_export);
                out << "tensor exported to " << *tensor_export << "\n";
            }
        } else if (file.has_tensor()) {
            const HeredityTensor& t = file.tensor();
            out << "explicit tensor over " << t.n << " types, Volterra: "
                << (is_volterra(QsoOperator::explicit_tensor(t)) ? "yes" : "no") << "\n";
            if (tensor_export) {
                write_tensor_json(t, *tensor_export);
                out << "tensor exported to " << *tensor_export << "\n";
            }
        } else {
            const SkewMatrix& a = file.skew();
            out << "skew matrix over " << a.n << " coordinates (canonical Volterra form)\n";
            print_matrix(out, a, "  ");
            if (tensor_export)
                throw ValidationError("skew models carry no heredity tensor to export");
        }
        return exit_ok;
    });
}

int cmd_iterate(const std::string& model_path, const RunConfig& cfg, std::ostream& out,
                std::ostream& err) {
    return guarded(err, [&]() {
        ModelFile file = load_model_file(model_path);

        std::size_t n = 0;
        std::optional<QsoOperator> op;
        const SkewMatrix* skew = nullptr;
        std::vector<NamedSet> sets;
        if (file.has_model()) {
            op = QsoOperator::generated(file.model());
            n = op->dim();
            sets = standard_fixed_sets(file.model().space);
        } else if (file.has_tensor()) {
            op = QsoOperator::explicit_tensor(file.tensor());
            n = op->dim();
        } else {
            skew = &file.skew();
            n = skew->n;
        }

        SimplexPoint x0 = SimplexPoint::uniform(n);
        if (cfg.x0) {
            if (cfg.x0->size() != n) throw DimensionMismatch(n, cfg.x0->size());
            x0 = SimplexPoint::make(*cfg.x0);
        } else if (cfg.random) {
            RandomSource rng(cfg.seed);
            x0 = SimplexPoint::make(rng.simplex_point(n));
        }

        IterateOptions iopts{.max_steps = cfg.max_steps, .tol = cfg.tol,
                             .record_stride = cfg.record_stride};
        Trajectory t = op ? iterate(*op, x0, iopts) : iterate_volterra(*skew, x0, iopts);

        out << "operator dimension: " << n << "\n";
        out << "initial point: " << point_str(x0) << "\n";
        out << "steps run: " << t.steps << " of " << cfg.max_steps
            << (t.reason == StopReason::Converged ? " (converged)" : " (step budget exhausted)")
            << "\n";
        try {
            LimitReport rep = classify_limit(t, sets, {.tol = cfg.tol});
            out << "classification: " << class_name(rep.classification) << "\n";
            if (rep.limit) out << "limit: " << point_str(*rep.limit) << "\n";
            if (!rep.memberships.empty()) {
                out << "fixed-set memberships:";
                for (const auto& m : rep.memberships) out << " " << m;
                out << "\n";
            }
            out << "final residual: " << fmt(rep.final_residual) << "\n";
            out << "tail amplitude: " << fmt(rep.tail_amplitude) << "\n";
            out << "min coordinate: " << fmt(rep.min_coordinate_start) << " at start, "
                << fmt(rep.min_coordinate_final) << " at end"
                << (rep.approached_boundary() ? " (moved toward the boundary)" : "") << "\n";
        } catch (const TooShort& e) {
            out << "classification: skipped (" << e.what() << ")\n";
            out << "final point: " << point_str(t.final_point()) << "\n";
        }
        if (cfg.csv_path) {
            write_csv(t, *cfg.csv_path);
            out << "trajectory written to " << *cfg.csv_path << " (" << t.records.size()
                << " rows)\n";
        }
        return exit_ok;
    });
}

int cmd_reduce(const std::string& model_path, std::uint64_t seed, std::ostream& out,
               std::ostream& err) {
    return guarded(err, [&]() {
        ModelFile file = load_model_file(model_path);
        if (!file.has_model())
            throw ValidationError(
                "reduce needs a graph + measure model; explicit tensor/skew files carry no "
                "product measure");
        const ModelSpec& m = file.model();
        ReducedSystem sys = reduce(m);
        if (sys.size() == 1)
            out << "single component: the operator is already Volterra; the reduced matrix "
                   "is its canonical form\n";
        for (const ReducedComponent& rc : sys.components) {
            out << "component " << rc.component << " (" << rc.a.n
                << " configurations), coefficient matrix:\n";
            print_matrix(out, rc.a, "  ");
        }

        RandomSource rng(seed);
        double worst = 0.0;
        constexpr int kPoints = 20;
        for (int i = 0; i < kPoints; ++i) {
            SimplexPoint lambda = SimplexPoint::make(rng.simplex_point(m.space.cell_count));
            worst = std::max(worst, commutation_residual(m, lambda));
        }
        out << "max commutation residual over " << kPoints << " random points: " << fmt(worst)
            << (worst <= 1e-12 ? " (within the 1e-12 contract)" : " (EXCEEDS the 1e-12 contract)")
            << "\n";
        return worst <= 1e-12 ? exit_ok : exit_property_failure;
    });
}

int cmd_tournament(const std::string& model_path, std::optional<int> component, bool confirm,
                   std::uint64_t seed, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() {
        ModelFile file = load_model_file(model_path);
        if (file.has_skew()) {
            if (component && *component != 1)
                throw ValidationError("skew models have a single coefficient matrix");
            out << "skew matrix (" << file.skew().n << " coordinates):\n";
            tournament_report(out, file.skew(), confirm, seed, "  ");
            return exit_ok;
        }
        if (file.has_tensor()) {
            QsoOperator op = QsoOperator::explicit_tensor(file.tensor());
            if (!is_volterra(op))
                throw NotVolterra("tournament analysis needs a Volterra operator");
            if (component && *component != 1)
                throw ValidationError("explicit tensors reduce to a single coefficient matrix");
            out << "canonical form of the explicit tensor (" << op.dim() << " coordinates):\n";
            tournament_report(out, volterra_canonical(op), confirm, seed, "  ");
            return exit_ok;
        }
        ReducedSystem sys = reduce(file.model());
        if (component && (*component < 1 || static_cast<std::size_t>(*component) > sys.size()))
            throw ValidationError("component index out of range: " + std::to_string(*component));
        for (const ReducedComponent& rc : sys.components) {
            if (component && rc.component != *component) continue;
            out << "component " << rc.component << " (" << rc.a.n << " configurations):\n";
            tournament_report(out, rc.a, confirm, seed, "  ");
        }
        return exit_ok;
    });
}

int cmd_verify(const VerifyOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() { return run_verify(opts, out); });
}

}  // namespace qso
