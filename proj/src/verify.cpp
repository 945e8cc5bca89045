#include "qso/verify.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "qso/construct.hpp"
#include "qso/dynamics.hpp"
#include "qso/model_file.hpp"
#include "qso/reduction.hpp"
#include "qso/tournament.hpp"

namespace qso {

namespace {

const std::vector<std::string> kSymbols = {"A", "B", "C", "D", "E", "F"};

std::vector<double> normalized_weights(RandomSource& rng, std::size_t size, double lo, double hi) {
    std::vector<double> w(size);
    double sum = 0.0;
    for (auto& v : w) {
        v = rng.uniform(lo, hi);
        sum += v;
    }
    for (auto& v : w) v /= sum;
    return w;
}

// Weights with pairwise relative gaps of at least min_rel_gap, so generated
// skew coefficients are bounded away from zero (no tournament ties, visible
// decay rates).
std::vector<double> distinct_weights(RandomSource& rng, std::size_t size, double lo, double hi,
                                     double min_rel_gap) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<double> w(size);
        for (auto& v : w) v = rng.uniform(lo, hi);
        std::vector<double> s = w;
        std::sort(s.begin(), s.end());
        bool ok = true;
        for (std::size_t i = 0; i + 1 < s.size(); ++i)
            if ((s[i + 1] - s[i]) / (s[i + 1] + s[i]) < min_rel_gap) ok = false;
        if (!ok) continue;
        double sum = 0.0;
        for (double v : w) sum += v;
        for (auto& v : w) v /= sum;
        return w;
    }
    throw Error("could not sample distinct weights");
}

}  // namespace

ModelSpec random_model(RandomSource& rng, const GenOptions& opt) {
    std::size_t nv = 1 + rng.index(opt.max_vertices);
    std::vector<int> vertices(nv);
    for (std::size_t i = 0; i < nv; ++i) vertices[i] = static_cast<int>(i + 1);
    std::vector<std::pair<int, int>> edges;
    for (std::size_t u = 1; u <= nv; ++u)
        for (std::size_t v = u + 1; v <= nv; ++v)
            if (rng.coin(opt.edge_prob)) edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
    Graph g = Graph::make(vertices, edges);

    auto parts = connected_components(g);
    // Start every component at the smallest alphabet, then upgrade while the
    // total cell count stays under the generator's own cap.
    std::vector<std::size_t> asize(parts.size(), opt.min_alphabet);
    auto total = [&]() {
        double t = 1.0;  // double to spot blowups without overflow
        for (std::size_t i = 0; i < parts.size(); ++i)
            t *= std::pow(static_cast<double>(asize[i]), static_cast<double>(parts[i].size()));
        return t;
    };
    while (total() > static_cast<double>(opt.max_cells)) {
        // Shrink the largest component's reach by dropping a vertex: resample.
        nv -= 1;
        if (nv == 0) throw Error("random_model cannot satisfy the cell cap");
        vertices.pop_back();
        edges.clear();
        for (std::size_t u = 1; u <= nv; ++u)
            for (std::size_t v = u + 1; v <= nv; ++v)
                if (rng.coin(opt.edge_prob))
                    edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
        g = Graph::make(vertices, edges);
        parts = connected_components(g);
        asize.assign(parts.size(), opt.min_alphabet);
    }
    for (std::size_t i = 0; i < parts.size(); ++i) {
        std::size_t grown = opt.min_alphabet + rng.index(opt.max_alphabet - opt.min_alphabet + 1);
        std::size_t keep = asize[i];
        asize[i] = grown;
        if (total() > static_cast<double>(opt.max_cells)) asize[i] = keep;
    }

    std::vector<std::vector<std::string>> alphabets;
    std::vector<std::vector<double>> weights;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        alphabets.emplace_back(kSymbols.begin(), kSymbols.begin() + asize[i]);
        std::size_t configs = 1;
        for (std::size_t v = 0; v < parts[i].size(); ++v) configs *= asize[i];
        weights.push_back(opt.distinct_weights
                              ? distinct_weights(rng, configs, 0.3, 1.0, 0.02)
                              : normalized_weights(rng, configs, 0.05, 1.0));
    }
    return ModelSpec::make(std::move(g), std::move(alphabets), std::move(weights), opt.max_cells);
}

namespace {

struct Failure {
    std::string property;
    int trial = 0;
    std::string detail;
    std::string model_dump;
};

class Suite {
  public:
    Suite(const VerifyOptions& opts, std::ostream& out)
        : opts_(opts), out_(out), master_(opts.seed) {}

    bool run();

  private:
    using Body = std::function<void(RandomSource&)>;

    // Runs one property, catching the first failing trial.
    void property(const std::string& name, std::uint64_t tag, const Body& body) {
        RandomSource rng = master_.fork(tag);
        checks_ = 0;
        trial_ = 0;
        current_model_.clear();
        try {
            body(rng);
            out_ << "[PASS] " << name << " (" << checks_ << " checks)\n";
        } catch (const Failure& f) {
            failed_ = true;
            out_ << "[FAIL] " << name << " (trial " << f.trial << "): " << f.detail << "\n";
            out_ << "reproducer: seed=" << opts_.seed << " property=" << name
                 << " trial=" << f.trial << "\n";
            if (!f.model_dump.empty()) out_ << "model:\n" << f.model_dump << "\n";
        }
    }

    void check(bool cond, const std::string& detail) {
        ++checks_;
        if (!cond) throw Failure{"", trial_, detail, current_model_};
    }

    template <typename T>
    static std::string str(const T& v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    }

    // ---- individual properties ----
    void graph_partition(RandomSource& rng);
    void cell_index_bijection(RandomSource& rng);
    void measure_total(RandomSource& rng);
    void volterra_iff_connected(RandomSource& rng);
    void closed_form_agreement(RandomSource& rng);
    void stochasticity_closure(RandomSource& rng);
    void binary_pair_coefficients(RandomSource& rng);
    void simplex_preservation(RandomSource& rng);
    void face_invariance(RandomSource& rng);
    void vertex_fixedness(RandomSource& rng);
    void canonical_form_equivalence(RandomSource& rng);
    void boundary_approach(RandomSource& rng);
    void marginal_commutation(RandomSource& rng);
    void reduced_skew_structure(RandomSource& rng);
    void reduced_forms_agreement(RandomSource& rng);
    void product_preservation(RandomSource& rng);
    void reconstruction_consistency(RandomSource& rng);
    void condensation_order(RandomSource& rng);
    void mass_transitivity(RandomSource& rng);
    void geometric_decay(RandomSource& rng);

    VerifyOptions opts_;
    std::ostream& out_;
    RandomSource master_;
    bool failed_ = false;
    int checks_ = 0;
    int trial_ = 0;
    std::string current_model_;
};

Graph random_graph(RandomSource& rng, std::size_t max_vertices, double edge_prob) {
    std::size_t nv = 1 + rng.index(max_vertices);
    std::vector<int> vertices(nv);
    for (std::size_t i = 0; i < nv; ++i) vertices[i] = static_cast<int>(i + 1);
    std::vector<std::pair<int, int>> edges;
    for (std::size_t u = 1; u <= nv; ++u)
        for (std::size_t v = u + 1; v <= nv; ++v)
            if (rng.coin(edge_prob)) edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
    return Graph::make(vertices, edges);
}

SkewMatrix random_skew(RandomSource& rng, std::size_t n, double min_mag = 1e-3) {
    SkewMatrix a = SkewMatrix::zero(n);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = k + 1; i < n; ++i) {
            double v = 0.0;
            while (std::abs(v) < min_mag) v = rng.uniform(-1.0, 1.0);
            a.at(k, i) = v;
            a.at(i, k) = -v;
        }
    return a;
}

void Suite::graph_partition(RandomSource& rng) {
    for (trial_ = 0; trial_ < opts_.trials; ++trial_) {
        Graph g = random_graph(rng, 12, rng.uniform(0.0, 0.6));
        auto comps = connected_components(g);

        // Brute-force transitive closure as the oracle.
        const std::size_t n = g.vertices.size();
        std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
        for (std::size_t i = 0; i < n; ++i) reach[i][i] = true;
        for (auto& [u, v] : g.edges) reach[u - 1][v - 1] = reach[v - 1][u - 1] = true;
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (reach[i][k] && reach[k][j]) reach[i][j] = true;

        std::vector<int> comp_of(n, -1);
        std::size_t covered = 0;
        for (std::size_t c = 0; c < comps.size(); ++c) {
            check(std::is_sorted(comps[c].begin(), comps[c].end()), "component not ascending");
            if (c > 0) check(comps[c - 1].front() < comps[c].front(), "components not canonical");
            for (int v : comps[c]) {
                check(comp_of[v - 1] == -1, "vertex in two components");
                comp_of[v - 1] = static_cast<int>(c);
                ++covered;
            }
        }
        check(covered == n, "components do not cover the vertex set");
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                check((comp_of[i] == comp_of[j]) == bool(reach[i][j]),
                      "partition disagrees with reachability oracle at (" + str(i + 1) + "," +
                          str(j + 1) + ")");
    }
}

void Suite::cell_index_bijection(RandomSource& rng) {
    for (trial_ = 0; trial_ < std::max(1, opts_.trials / 4); ++trial_) {
        ModelSpec m = random_model(rng, {.max_vertices = static_cast<std::size_t>(opts_.max_vertices)});
        current_model_ = model_to_json(m);
        auto cells = enumerate_cells(m.space);
        check(cells.size() == m.space.cell_count, "enumeration size mismatch");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            check(m.space.index_of(cells[i]) == i, "index_of(cell_of(i)) != i");
            check(m.space.cell_of(i) == cells[i], "cell_of mismatch with enumeration");
        }
    }
}

void Suite::measure_total(RandomSource& rng) {
    for (trial_ = 0; trial_ < std::max(1, opts_.trials / 4); ++trial_) {
        ModelSpec m = random_model(rng, {.max_vertices = static_cast<std::size_t>(opts_.max_vertices)});
        current_model_ = model_to_json(m);
        double sum = 0.0;
        for (const Cell& c : enumerate_cells(m.space)) {
            double v = measure_of(m.measure, c);
            check(v > 0.0, "non-positive product mass");
            sum += v;
        }
        check(std::abs(sum - 1.0) <= 1e-9, "product masses sum to " + str(sum));
    }
}

void Suite::volterra_iff_connected(RandomSource& rng) {
    int connected = 0, disconnected = 0;
    for (trial_ = 0; trial_ < opts_.trials; ++trial_) {
        double p = (trial_ % 3 == 0) ? 0.0 : (trial_ % 3 == 1 ? 0.25 : 0.7);
        ModelSpec m = random_model(
            rng, {.max_vertices = static_cast<std::size_t>(opts_.max_vertices), .edge_prob = p,
                  .max_cells = 128});
        current_model_ = model_to_json(m);
        bool one_component = m.space.components.size() == 1;
        (one_component ? connected : disconnected)++;
        check(is_volterra(QsoOperator::generated(m)) == one_component,
              one_component ? "connected model not detected as Volterra"
                            : "disconnected model detected as Volterra");
    }
    // Both sides of the equivalence must actually have been exercised.
    check(connected > 0 && disconnected > 0, "generator produced only one connectivity class");
}

void Suite::closed_form_agreement(RandomSource& rng) {
    for (trial_ = 0; trial_ < std::max(1, opts_.trials / 4); ++trial_) {
        ModelSpec m = random_model(rng, {.max_vertices = 3, .max_cells = 16});
        current_model_ = model_to_json(m);
        auto cells = enumerate_cells(m.space);
        for (const Cell& phi : cells)
            for (const Cell& psi : cells)
                for (const Cell& sigma : cells) {
                    double lhs = heredity_coefficient(m, phi, psi, sigma);
                    double rhs = product_coefficient(m.space, m.measure, phi, psi, sigma);
                    check(std::abs(lhs - rhs) <= 1e-12,
                          "coefficient routes disagree by " + str(lhs - rhs));
                }
    }
}

void Suite::stochasticity_closure(RandomSource& rng) {
    for (trial_ = 0; trial_ < std::max(1, opts_.trials / 4); ++trial_) {
        ModelSpec m = random_model(rng, {.max_vertices = 4, .max_cells = 16});
        current_model_ = model_to_json(m);
        auto report = validate(materialize(m));
        check(report.empty(), "materialized tensor fails validation: " +
                                  (report.empty() ? "" : report.front().describe()));
    }
}

void Suite::binary_pair_coefficients(RandomSource& rng) {
    for (trial_ = 0; trial_ < 50; ++trial_) {
        double alpha = rng.uniform(0.02, 0.98), beta = rng.uniform(0.02, 0.98);
        ModelSpec m = ModelSpec::make(Graph::make({1, 2}, {}), {{"A", "a"}, {"A", "a"}},
                                      {{alpha, 1.0 - alpha}, {beta, 1.0 - beta}});
        current_model_ = model_to_json(m);
        double a0 = m.measure.components[0].of(0), a1 = m.measure.components[0].of(1);
        double b0 = m.measure.components[1].of(0), b1 = m.measure.components[1].of(1);

        // The frozen coefficient table of the 4-cell two-component model,
        // derived by hand from the quadratic polynomials of the map.
        HeredityTensor expect;
        expect.n = 4;
        expect.p.assign(64, 0.0);
        auto set = [&](std::size_t i, std::size_t j, std::size_t k, double v) {
            expect.at(i, j, k) = v;
            expect.at(j, i, k) = v;
        };
        set(0, 0, 0, 1.0);
        set(1, 1, 1, 1.0);
        set(2, 2, 2, 1.0);
        set(3, 3, 3, 1.0);
        set(0, 1, 0, b0);
        set(0, 1, 1, b1);
        set(0, 2, 0, a0);
        set(0, 2, 2, a1);
        set(1, 3, 1, a0);
        set(1, 3, 3, a1);
        set(2, 3, 2, b0);
        set(2, 3, 3, b1);
        set(0, 3, 0, a0 * b0);
        set(0, 3, 1, a0 * b1);
        set(0, 3, 2, a1 * b0);
        set(0, 3, 3, a1 * b1);
        set(1, 2, 0, a0 * b0);
        set(1, 2, 1, a0 * b1);
        set(1, 2, 2, a1 * b0);
        set(1, 2, 3, a1 * b1);

        HeredityTensor got = materialize(m);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                for (std::size_t k = 0; k < 4; ++k)
                    check(std::abs(got.at(i, j, k) - expect.at(i, j, k)) <= 1e-15,
                          "coefficient (" + str(i + 1) + "," + str(j + 1) + "," + str(k + 1) +
                              ") off by " + str(got.at(i, j, k) - expect.at(i, j, k)));
    }
}

void Suite::simplex_preservation(RandomSource& rng) {
    for (trial_ = 0; trial_ < 5; ++trial_) {
        ModelSpec m = random_model(rng, {.max_vertices = 4, .max_cells = 16});
        current_model_ = model_to_json(m);
        QsoOperator op = QsoOperator::generated(m);
        SimplexPoint x0 = SimplexPoint::make(rng.simplex_point(op.dim()));
        Trajectory t = iterate(op, x0, {.max_steps = 10000});
        check(t.max_drift <= 1e-9, "pre-renormalization drift " + str(t.max_drift));
        check(t.min_pre_clamp >= -1e-12, "pre-clamp coordinate " + str(t.min_pre_clamp));
        for (const auto& [idx, p] : t.records) {
            double sum = 0.0;
            for (std::size_t i = 0; i < p.dim(); ++i) {
                check(p[i] >= 0.0, "negative recorded coordinate at step " + str(idx));
                sum += p[i];
            }
            check(std::abs(sum - 1.0) <= 1e-9, "recorded sum drift at step " + str(idx));
        }
    }
    // A purely rotational Volterra operator for the long oscillatory regime.
    current_model_.clear();
    SkewMatrix cyc = SkewMatrix::make(3, {0, 1, -1, -1, 0, 1, 1, -1, 0});
    Trajectory t = iterate_volterra(cyc, SimplexPoint::make({0.5, 0.3, 0.2}), {.max_steps = 10000});
    check(t.max_drift <= 1e-9, "cyclic run drift " + str(t.max_drift));
    check(t.min_pre_clamp >= -1e-12, "cyclic run pre-clamp " + str(t.min_pre_clamp));
}

void Suite::face_invariance(RandomSource& rng) {
    for (trial_ = 0; trial_ < 20; ++trial_) {
        std::size_t n = 3 + rng.index(4);
        SkewMatrix a = random_skew(rng, n);
        std::vector<double> x0(n, 0.0);
        std::size_t zero = rng.index(n);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (i != zero) sum += x0[i] = rng.uniform(0.05, 1.0);
        for (std::size_t i = 0; i < n; ++i) x0[i] /= sum;
        Trajectory t =
            iterate_volterra(a, SimplexPoint::make(x0), {.max_steps = 1000, .record_stride = 1});
        for (const auto& [idx, p] : t.records)
            check(p[zero] <= 1e-15, "zero coordinate resurrected to " + str(p[zero]) +
                                        " at step " + str(idx));
    }
}

void Suite::vertex_fixedness(RandomSource& rng) {
    for (trial_ = 0; trial_ < std::max(1, opts_.trials / 4); ++trial_) {
        ModelSpec m = random_model(
            rng, {.max_vertices = static_cast<std::size_t>(opts_.max_vertices), .max_cells = 64});
        current_model_ = model_to_json(m);
        QsoOperator op = QsoOperator::generated(m);
        for (std::size_t k = 0; k < op.dim(); ++k) {
            SimplexPoint e = SimplexPoint::vertex(op.dim(), k);
            SimplexPoint y = apply(op, e);
            for (std::size_t i = 0; i < op.dim(); ++i)
                check(std::abs(y[i] - e[i]) <= 1e-15, "vertex " + str(k) + " moved");
        }
    }
}

void Suite::canonical_form_equivalence(RandomSource& rng) {
    int done = 0;
    for (trial_ = 0; done < 30 && trial_ < 500; ++trial_) {
        ModelSpec m = random_model(rng, {.max_vertices = 3, .edge_prob = 0.9, .max_cells = 32});
        if (m.space.components.size() != 1) continue;  // need Volterra operators here
        current_model_ = model_to_json(m);
        ++done;
        QsoOperator op = QsoOperator::generated(m);
        SkewMatrix a = volterra_canonical(op);
        for (int p = 0; p < 20; ++p) {
            SimplexPoint x = SimplexPoint::make(rng.simplex_point(op.dim()));
            SimplexPoint lhs = apply(op, x), rhs = apply_volterra(a, x);
            for (std::size_t i = 0; i < op.dim(); ++i)
                check(std::abs(lhs[i] - rhs[i]) <= 1e-12,
                      "canonical form disagrees by " + str(lhs[i] - rhs[i]));
        }
    }
    check(done == 30, "could not sample enough connected models");
}

void Suite::boundary_approach(RandomSource& rng) {
    int done = 0;
    for (trial_ = 0; done < 20 && trial_ < 500; ++trial_) {
        ModelSpec m = random_model(
            rng, {.max_vertices = 2, .edge_prob = 1.0, .max_cells = 8, .distinct_weights = true});
        if (m.space.components.size() != 1) continue;
        current_model_ = model_to_json(m);
        ++done;
        QsoOperator op = QsoOperator::generated(m);
        SimplexPoint x0 = SimplexPoint::make(rng.simplex_point(op.dim()));
        if (is_fixed(op, x0, 1e-12)) continue;  // astronomically unlikely
        Trajectory t = iterate(op, x0, {.max_steps = 10000});
        check(t.final_point().min_coordinate() < 1e-6,
              "interior start did not approach the boundary: min coordinate " +
                  str(t.final_point().min_coordinate()));
    }
    check(done == 20, "could not sample enough connected models");
}

void Suite::marginal_commutation(RandomSource& rng) {
    for (trial_ = 0; trial_ < opts_.trials; ++trial_) {
        ModelSpec m = random_model(
            rng, {.max_vertices = static_cast<std::size_t>(opts_.max_vertices), .max_cells = 64});
        current_model_ = model_to_json(m);
        QsoOperator op = QsoOperator::generated(m);
        ReducedSystem sys = reduce(m);
        if (opts_.inject_fault && trial_ == 0 && sys.components.front().a.n >= 2) {
            // Test-only fault: corrupt one reduced coefficient. The property
            // below must notice, proving the harness can actually fail.
            auto& a = sys.components.front().a;
            a.at(0, 1) += 1e-6;
            a.at(1, 0) -= 1e-6;
        }
        for (int p = 0; p < 5; ++p) {
            SimplexPoint lambda = SimplexPoint::make(rng.simplex_point(op.dim()));
            SimplexPoint advanced = apply(op, lambda);
            auto stepped = reduced_step(sys, marginalize_all(m.space, lambda));
            double res = 0.0;
            for (std::size_t c = 0; c < sys.size(); ++c) {
                Marginal direct = marginalize(m.space, advanced, static_cast<int>(c + 1));
                for (std::size_t w = 0; w < direct.x.size(); ++w)
                    res = std::max(res, std::abs(direct.x[w] - stepped[c].x[w]));
            }
            check(res <= 1e-12, "marginal of the full step deviates from the reduced step by " +
                                    str(res));
        }
    }
}

void Suite::reduced_skew_structure(RandomSource& rng) {
    for (trial_ = 0; trial_ < std::max(1, opts_.trials / 4); ++trial_) {
        ModelSpec m = random_model(rng, {.max_vertices = static_cast<std::size_t>(opts_.max_vertices),
                                         .max_cells = 64});
        current_model_ = model_to_json(m);
        ReducedSystem sys = reduce(m);
        for (const auto& rc : sys.components) {
            for (std::size_t w = 0; w < rc.a.n; ++w)
                for (std::size_t v = 0; v < rc.a.n; ++v) {
                    check(rc.a.at(w, v) == -rc.a.at(v, w), "reduced matrix not exactly skew");
                    check(std::abs(rc.a.at(w, v)) <= 1.0, "reduced coefficient out of range");
                    check((rc.a.at(w, v) == 0.0) == (rc.mu[w] == rc.mu[v]),
                          "zero coefficient does not match equal masses");
                }
        }
    }
}

void Suite::reduced_forms_agreement(RandomSource& rng) {
    for (trial_ = 0; trial_ < std::max(1, opts_.trials / 4); ++trial_) {
        ModelSpec m = random_model(rng, {.max_vertices = static_cast<std::size_t>(opts_.max_vertices),
                                         .max_cells = 64});
        current_model_ = model_to_json(m);
        ReducedSystem sys = reduce(m);
        std::vector<Marginal> xs;
        for (const auto& rc : sys.components)
            xs.push_back({rc.component, rng.simplex_point(rc.a.n)});
        auto lhs = reduced_step(sys, xs), rhs = reduced_step_expanded(sys, xs);
        for (std::size_t c = 0; c < xs.size(); ++c)
            for (std::size_t w = 0; w < lhs[c].x.size(); ++w)
                check(std::abs(lhs[c].x[w] - rhs[c].x[w]) <= 1e-12,
                      "multiplicative and expanded forms disagree by " +
                          str(lhs[c].x[w] - rhs[c].x[w]));
    }
}

void Suite::product_preservation(RandomSource& rng) {
    for (trial_ = 0; trial_ < std::max(1, opts_.trials / 8); ++trial_) {
        ModelSpec m = random_model(rng, {.max_vertices = 5, .max_cells = 64});
        current_model_ = model_to_json(m);
        QsoOperator op = QsoOperator::generated(m);
        // Product initial state from random interior marginals.
        std::vector<double> lambda(m.space.cell_count, 1.0);
        std::vector<std::vector<double>> marg;
        for (const auto& c : m.space.components) marg.push_back(rng.simplex_point(c.config_count()));
        for (std::size_t idx = 0; idx < m.space.cell_count; ++idx) {
            Cell cell = m.space.cell_of(idx);
            for (std::size_t c = 0; c < cell.size(); ++c) lambda[idx] *= marg[c][cell[c]];
        }
        SimplexPoint x = SimplexPoint::make(std::move(lambda));
        check(is_product_form(m.space, x, 1e-12), "constructed state not product");
        for (int l = 0; l < 10; ++l) {
            x = apply(op, x);
            check(is_product_form(m.space, x, 1e-10),
                  "product form lost after " + str(l + 1) + " steps");
        }
    }
}

void Suite::reconstruction_consistency(RandomSource& rng) {
    for (trial_ = 0; trial_ < std::max(1, opts_.trials / 4); ++trial_) {
        ModelSpec m = random_model(rng, {.max_vertices = 5, .max_cells = 64});
        current_model_ = model_to_json(m);
        std::vector<Marginal> limits;
        std::size_t sum_sizes = 0;
        for (const auto& c : m.space.components) {
            limits.push_back(
                {c.index, rng.simplex_point(c.config_count())});
            sum_sizes += c.config_count();
        }
        Reconstruction rec = reconstruct(m.space, limits);
        for (std::size_t c = 0; c < limits.size(); ++c) {
            Marginal got = marginalize(m.space, rec.product_solution, static_cast<int>(c + 1));
            for (std::size_t w = 0; w < got.x.size(); ++w)
                check(std::abs(got.x[w] - limits[c].x[w]) <= 1e-12,
                      "product solution violates its marginal constraints");
        }
        // Interior marginals: solution-set dimension has a closed form.
        std::size_t expected =
            m.space.cell_count - (sum_sizes - m.space.components.size()) - 1;
        check(rec.affine_dim == expected, "affine dimension " + str(rec.affine_dim) +
                                              ", expected " + str(expected));
    }
}

void Suite::condensation_order(RandomSource& rng) {
    for (trial_ = 0; trial_ < opts_.trials; ++trial_) {
        std::size_t n = 2 + rng.index(11);
        SkewMatrix a = random_skew(rng, n);
        current_model_.clear();
        Tournament t = build_tournament(a);
        Condensation c = condensation(t);

        // Oracle: mutual reachability by transitive closure.
        std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
        for (std::size_t i = 0; i < n; ++i) reach[i][i] = true;
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                if (i != k && t.edge(k, i)) reach[k][i] = true;
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (reach[i][k] && reach[k][j]) reach[i][j] = true;

        std::vector<int> class_of(n, -1);
        std::size_t covered = 0;
        for (std::size_t ci = 0; ci < c.classes.size(); ++ci)
            for (std::size_t v : c.classes[ci]) {
                check(class_of[v] == -1, "vertex in two classes");
                class_of[v] = static_cast<int>(ci);
                ++covered;
            }
        check(covered == n, "classes do not cover all vertices");
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                check((class_of[i] == class_of[j]) == bool(reach[i][j] && reach[j][i]),
                      "classes disagree with mutual-reachability oracle");
        // Total order: every edge between classes points later -> earlier.
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j && class_of[i] != class_of[j] && t.edge(i, j))
                    check(class_of[i] > class_of[j], "between-class edge points the wrong way");
        check(is_strong(t) == (c.classes.size() == 1), "strength disagrees with condensation");

        auto pred = predict_decay(a);
        check(pred.survivors.size() + pred.decaying.size() == n, "prediction does not partition");
    }
}

void Suite::mass_transitivity(RandomSource& rng) {
    for (trial_ = 0; trial_ < std::max(1, opts_.trials / 4); ++trial_) {
        std::size_t size = 2 + rng.index(4);
        auto w = distinct_weights(rng, size, 0.3, 1.0, 0.02);
        ModelSpec m = ModelSpec::make(Graph::make({1}, {}),
                                      {{kSymbols.begin(), kSymbols.begin() + size}}, {w});
        current_model_ = model_to_json(m);
        ReducedSystem sys = reduce(m);
        Condensation c = condensation(build_tournament(sys.components[0].a));
        check(c.classes.size() == size, "distinct masses must give a transitive tournament");
        // Classes must come out in decreasing measure-mass order.
        for (std::size_t i = 0; i + 1 < c.classes.size(); ++i)
            check(w[c.classes[i][0]] > w[c.classes[i + 1][0]],
                  "condensation order does not follow measure mass");
        auto pred = predict_decay(sys.components[0].a);
        std::size_t argmax = std::max_element(w.begin(), w.end()) - w.begin();
        check(pred.survivors == std::vector<std::size_t>{argmax},
              "survivor is not the configuration of maximal mass");
    }
}

void Suite::geometric_decay(RandomSource& rng) {
    for (trial_ = 0; trial_ < std::max(1, opts_.trials / 20); ++trial_) {
        std::size_t size = 2 + rng.index(4);
        auto w = distinct_weights(rng, size, 0.3, 1.0, 0.05);
        ModelSpec m = ModelSpec::make(Graph::make({1}, {}),
                                      {{kSymbols.begin(), kSymbols.begin() + size}}, {w});
        current_model_ = model_to_json(m);
        SkewMatrix a = reduce(m).components[0].a;
        auto pred = predict_decay(a);

        std::vector<double> x0 = rng.simplex_point(size);
        for (auto& v : x0) v = 0.9 * v + 0.1 / static_cast<double>(size);  // keep a floor
        Trajectory t = iterate_volterra(a, SimplexPoint::make(x0),
                                        {.max_steps = 800,
                                         .tol = 1e-280,
                                         .record_stride = 1,
                                         .max_records = 1u << 20});
        for (std::size_t j : pred.decaying) {
            DecayFit fit = decay_fit(t, j);
            check(fit.status == DecayFit::Status::Fitted, "decay fit has insufficient data");
            check(fit.geometric,
                  "predicted decaying coordinate " + str(j + 1) + " not geometric: slope " +
                      str(fit.slope) + ", goodness " + str(fit.goodness));
        }
        for (std::size_t j : pred.survivors)
            check(t.final_point()[j] >= 1e-3,
                  "surviving coordinate " + str(j + 1) + " fell to " + str(t.final_point()[j]));
    }
}

bool Suite::run() {
    property("graph_partition", 1, [this](RandomSource& r) { graph_partition(r); });
    property("cell_index_bijection", 2, [this](RandomSource& r) { cell_index_bijection(r); });
    property("measure_total", 3, [this](RandomSource& r) { measure_total(r); });
    property("volterra_iff_connected", 4, [this](RandomSource& r) { volterra_iff_connected(r); });
    property("closed_form_agreement", 5, [this](RandomSource& r) { closed_form_agreement(r); });
    property("stochasticity_closure", 6, [this](RandomSource& r) { stochasticity_closure(r); });
    property("binary_pair_coefficients", 7,
             [this](RandomSource& r) { binary_pair_coefficients(r); });
    property("simplex_preservation", 8, [this](RandomSource& r) { simplex_preservation(r); });
    property("face_invariance", 9, [this](RandomSource& r) { face_invariance(r); });
    property("vertex_fixedness", 10, [this](RandomSource& r) { vertex_fixedness(r); });
    property("canonical_form_equivalence", 11,
             [this](RandomSource& r) { canonical_form_equivalence(r); });
    property("boundary_approach", 12, [this](RandomSource& r) { boundary_approach(r); });
    property("marginal_commutation", 13, [this](RandomSource& r) { marginal_commutation(r); });
    property("reduced_skew_structure", 14, [this](RandomSource& r) { reduced_skew_structure(r); });
    property("reduced_forms_agreement", 15,
             [this](RandomSource& r) { reduced_forms_agreement(r); });
    property("product_preservation", 16, [this](RandomSource& r) { product_preservation(r); });
    property("reconstruction_consistency", 17,
             [this](RandomSource& r) { reconstruction_consistency(r); });
    property("condensation_order", 18, [this](RandomSource& r) { condensation_order(r); });
    property("mass_transitivity", 19, [this](RandomSource& r) { mass_transitivity(r); });
    property("geometric_decay", 20, [this](RandomSource& r) { geometric_decay(r); });
    return !failed_;
}

}  // namespace

int run_verify(const VerifyOptions& opts, std::ostream& out) {
    Suite suite(opts, out);
    bool ok = suite.run();
    out << (ok ? "verification passed" : "verification FAILED") << " (seed " << opts.seed << ")\n";
    return ok ? 0 : 1;
}

}  // namespace qso
