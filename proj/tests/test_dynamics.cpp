#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qso/dynamics.hpp"
#include "qso/rng.hpp"

using namespace qso;

namespace {

ModelSpec binary_pair(double alpha, double beta) {
    return ModelSpec::make(Graph::make({1, 2}, {}), {{"A", "a"}, {"A", "a"}},
                           {{alpha, 1 - alpha}, {beta, 1 - beta}});
}

// A synthetic trajectory with explicitly chosen recorded states, stride 1.
Trajectory synthetic(const std::vector<std::vector<double>>& pattern, std::size_t steps) {
    Trajectory t;
    t.x0 = SimplexPoint::make(pattern.front());
    t.steps = steps;
    t.reason = StopReason::Budget;
    for (std::size_t l = 0; l <= steps; ++l)
        t.records.emplace_back(l, SimplexPoint::make(pattern[l % pattern.size()]));
    double res = 0.0;
    const auto& a = t.records[t.records.size() - 2].second;
    const auto& b = t.records.back().second;
    for (std::size_t i = 0; i < a.dim(); ++i) res = std::max(res, std::abs(b[i] - a[i]));
    t.final_residual = res;
    return t;
}

}  // namespace

TEST_CASE("simplex point validation") {
    CHECK_THROWS_AS(SimplexPoint::make({0.5, 0.5, -1e-9}), ValidationError);
    CHECK_THROWS_AS(SimplexPoint::make({0.6, 0.6}), ValidationError);
    CHECK_THROWS_AS(SimplexPoint::make({0.5, 0.5 + 2e-9}), ValidationError);
    CHECK_THROWS_AS(SimplexPoint::make({}), ValidationError);

    SimplexPoint p = SimplexPoint::make({0.5, 0.5 + 1e-13, -1e-13});
    CHECK(p[2] == 0.0);  // clamped
    CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p.is_boundary());

    CHECK(SimplexPoint::uniform(4)[2] == 0.25);
    CHECK(SimplexPoint::vertex(3, 1).x == std::vector<double>{0, 1, 0});
    CHECK(SimplexPoint::make({0.2, 0.3, 0.5}).is_interior());
    CHECK(SimplexPoint::make({0.2, 0.3, 0.5}).min_coordinate() == 0.2);
}

TEST_CASE("one application of the 4-cell operator from the barycenter") {
    // Hand-computed image of the uniform state for alpha_1=0.7, beta_1=0.6:
    // marginals after one step are (0.6, 0.4) and (0.55, 0.45), and the image
    // is their product.
    QsoOperator op = QsoOperator::generated(binary_pair(0.7, 0.6));
    SimplexPoint y = apply(op, SimplexPoint::uniform(4));
    CHECK(y[0] == doctest::Approx(0.33).epsilon(1e-14));
    CHECK(y[1] == doctest::Approx(0.27).epsilon(1e-14));
    CHECK(y[2] == doctest::Approx(0.22).epsilon(1e-14));
    CHECK(y[3] == doctest::Approx(0.18).epsilon(1e-14));
}

TEST_CASE("apply agrees with the naive tensor contraction") {
    ModelSpec m = ModelSpec::make(Graph::make({1, 2, 3}, {{1, 2}}), {{"A", "a"}, {"A", "B"}},
                                  {{0.1, 0.2, 0.3, 0.4}, {0.45, 0.55}});
    QsoOperator op = QsoOperator::generated(m);
    HeredityTensor t = materialize(m);
    RandomSource rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        SimplexPoint x = SimplexPoint::make(rng.simplex_point(op.dim()));
        SimplexPoint y = apply(op, x);
        auto ref = oracles::naive_apply(t, x.x);
        for (std::size_t k = 0; k < op.dim(); ++k)
            CHECK(std::abs(y[k] - ref[k]) <= 1e-14);
    }
}

TEST_CASE("canonical Volterra step") {
    SkewMatrix a = SkewMatrix::make(2, {0, 0.4, -0.4, 0});
    SimplexPoint y = apply_volterra(a, SimplexPoint::make({0.5, 0.5}));
    CHECK(y[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(y[1] == doctest::Approx(0.4).epsilon(1e-15));
    SimplexPoint z = apply_volterra(a, y);
    CHECK(z[0] == doctest::Approx(0.696).epsilon(1e-14));
}

TEST_CASE("iterate: stop reasons, budget, record structure") {
    QsoOperator op = QsoOperator::generated(binary_pair(0.7, 0.6));

    Trajectory conv = iterate(op, SimplexPoint::uniform(4), {.max_steps = 10000});
    CHECK(conv.reason == StopReason::Converged);
    CHECK(conv.steps >= 2 * conv.window);  // enough history to classify
    CHECK(conv.steps < 10000);

    Trajectory budget = iterate(op, SimplexPoint::uniform(4), {.max_steps = 30});
    CHECK(budget.reason == StopReason::Budget);
    CHECK(budget.steps == 30);

    // Records: start at 0, end at the final step, indices strictly increasing,
    // and the last window+1 records are consecutive.
    for (const Trajectory* t : {&conv, &budget}) {
        CHECK(t->records.front().first == 0);
        CHECK(t->records.back().first == t->steps);
        for (std::size_t r = 1; r < t->records.size(); ++r)
            CHECK(t->records[r].first > t->records[r - 1].first);
        std::size_t consecutive = std::min(t->window + 1, t->steps + 1);
        for (std::size_t r = t->records.size() - consecutive + 1; r < t->records.size(); ++r)
            CHECK(t->records[r].first == t->records[r - 1].first + 1);
    }

    // Automatic stride keeps the record count near the configured bound.
    Trajectory lng = iterate(op, SimplexPoint::uniform(4),
                             {.max_steps = 30, .tol = 1e-300, .max_records = 16});
    CHECK(lng.records.size() <= 16 + lng.window + 2);
}

TEST_CASE("iterate aborts when a step leaves the simplex") {
    StepFn bad = [](const std::vector<double>& x, std::vector<double>& y) {
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = 1.1 * x[i];  // drift 0.1 per step
    };
    CHECK_THROWS_AS(iterate(bad, 2, SimplexPoint::make({0.5, 0.5}), {.max_steps = 10}),
                    NumericalIntegrityError);

    StepFn negative = [](const std::vector<double>& x, std::vector<double>& y) {
        y = x;
        y[0] += 1e-6;
        y[1] -= 1e-6;  // becomes properly negative once x[1] is small enough
    };
    CHECK_THROWS_AS(iterate(negative, 2, SimplexPoint::make({1.0 - 1e-7, 1e-7}), {.max_steps = 10}),
                    NumericalIntegrityError);
}

TEST_CASE("iterate tracks drift diagnostics") {
    QsoOperator op = QsoOperator::generated(binary_pair(0.7, 0.6));
    Trajectory t = iterate(op, SimplexPoint::uniform(4), {.max_steps = 5000});
    CHECK(t.max_drift <= 1e-9);
    CHECK(t.min_pre_clamp >= -1e-12);
}

TEST_CASE("classification: convergence to a vertex with set memberships") {
    QsoOperator op = QsoOperator::generated(binary_pair(0.7, 0.6));
    Trajectory t = iterate(op, SimplexPoint::uniform(4), {.max_steps = 10000});
    LimitReport rep = classify_limit(t, standard_fixed_sets(op.model().space));
    CHECK(rep.classification == LimitClass::ConvergedToPoint);
    REQUIRE(rep.limit.has_value());
    CHECK((*rep.limit)[0] == doctest::Approx(1.0).epsilon(1e-9));
    // (1,0,0,0) lies in S1 (x3 = x4 = 0) and S3 (x2 = x4 = 0).
    CHECK(rep.memberships == std::vector<std::string>{"S1", "S3"});
    CHECK(rep.approached_boundary());
}

TEST_CASE("classification: degenerate regimes land in the fixed planes") {
    // beta_1 = 1/2 freezes the second marginal; the limit lies in S1.
    QsoOperator op1 = QsoOperator::generated(binary_pair(0.7, 0.5));
    LimitReport r1 = classify_limit(iterate(op1, SimplexPoint::uniform(4), {.max_steps = 10000}),
                                    standard_fixed_sets(op1.model().space));
    CHECK(r1.classification == LimitClass::ConvergedToPoint);
    CHECK((*r1.limit)[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK((*r1.limit)[1] == doctest::Approx(0.5).epsilon(1e-9));
    bool in_s1 = false;
    for (const auto& s : r1.memberships) in_s1 = in_s1 || s == "S1";
    CHECK(in_s1);

    // alpha_1 = 1/2 freezes the first marginal; the limit lies in S3.
    QsoOperator op2 = QsoOperator::generated(binary_pair(0.5, 0.6));
    LimitReport r2 = classify_limit(iterate(op2, SimplexPoint::uniform(4), {.max_steps = 10000}),
                                    standard_fixed_sets(op2.model().space));
    CHECK(r2.classification == LimitClass::ConvergedToPoint);
    bool in_s3 = false;
    for (const auto& s : r2.memberships) in_s3 = in_s3 || s == "S3";
    CHECK(in_s3);
}

TEST_CASE("classification: synthetic tails") {
    // Period-2 oscillation inside S5 (both marginals uniform): ConvergedToSet.
    Trajectory set_osc = synthetic({{0.4, 0.1, 0.4, 0.1}, {0.1, 0.4, 0.1, 0.4}}, 200);
    ModelSpec m = binary_pair(0.5, 0.5);
    LimitReport rs = classify_limit(set_osc, standard_fixed_sets(m.space));
    CHECK(rs.classification == LimitClass::ConvergedToSet);
    CHECK(rs.memberships == std::vector<std::string>{"S5"});

    // Same oscillation but in no named set: NonConvergent.
    Trajectory free_osc = synthetic({{0.7, 0.1, 0.1, 0.1}, {0.1, 0.7, 0.1, 0.1}}, 200);
    CHECK(classify_limit(free_osc, standard_fixed_sets(m.space)).classification ==
          LimitClass::NonConvergent);

    // Amplitude above tol but below the 10x sustained threshold: Undecided.
    Trajectory faint = synthetic({{0.25 + 2.5e-9, 0.25 - 2.5e-9, 0.25, 0.25},
                                  {0.25 - 2.5e-9, 0.25 + 2.5e-9, 0.25, 0.25}},
                                 200);
    CHECK(classify_limit(faint, standard_fixed_sets(m.space)).classification ==
          LimitClass::Undecided);

    // Too short to classify.
    Trajectory shrt = synthetic({{0.5, 0.5, 0.0, 0.0}}, 80);
    CHECK_THROWS_AS(classify_limit(shrt, {}), TooShort);
}

TEST_CASE("log-decay fits") {
    // Exact geometric decay x_1 = 2^-l: slope -ln 2, perfect goodness.
    Trajectory t;
    t.x0 = SimplexPoint::make({1.0, 0.0});
    t.steps = 400;
    t.reason = StopReason::Budget;
    for (std::size_t l = 0; l <= 400; ++l) {
        double v = std::pow(2.0, -static_cast<double>(l));
        t.records.emplace_back(l, SimplexPoint::make({v, 1.0 - v}));
    }
    DecayFit f = fit_log_decay(t, 0);
    CHECK(f.status == DecayFit::Status::Fitted);
    CHECK(f.slope == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
    CHECK(f.goodness == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.geometric);

    // The complementary coordinate converges to 1: flat in the tail, no decay.
    DecayFit g = fit_log_decay(t, 1);
    CHECK(g.status == DecayFit::Status::Fitted);
    CHECK_FALSE(g.geometric);

    // A coordinate that already reached the floor reports CoordinateZero.
    Trajectory z = t;
    for (auto& [idx, p] : z.records)
        if (idx > 350) p = SimplexPoint::make({0.0, 1.0});
    CHECK(fit_log_decay(z, 0).status == DecayFit::Status::CoordinateZero);

    // Not enough tail points.
    Trajectory s;
    s.x0 = SimplexPoint::make({0.5, 0.5});
    s.steps = 150;
    s.reason = StopReason::Budget;
    for (std::size_t l = 0; l <= 150; ++l)
        s.records.emplace_back(l, SimplexPoint::make({0.5, 0.5}));
    CHECK(fit_log_decay(s, 0).status == DecayFit::Status::InsufficientData);
}

TEST_CASE("fixed points") {
    QsoOperator op = QsoOperator::generated(binary_pair(0.7, 0.6));
    for (std::size_t k = 0; k < 4; ++k)
        CHECK(is_fixed(op, SimplexPoint::vertex(4, k), 1e-15));
    CHECK_FALSE(is_fixed(op, SimplexPoint::uniform(4), 1e-6));

    // With alpha_1 = beta_1 = 1/2 every product state is fixed; the S5 point
    // (0.4, 0.1, 0.4, 0.1) has uniform marginals, hence is fixed too.
    QsoOperator deg = QsoOperator::generated(binary_pair(0.5, 0.5));
    CHECK(is_fixed(deg, SimplexPoint::make({0.4, 0.1, 0.4, 0.1}), 1e-15));

    SkewMatrix cyc = SkewMatrix::make(3, {0, 1, -1, -1, 0, 1, 1, -1, 0});
    CHECK(is_fixed_volterra(cyc, SimplexPoint::make({1.0 / 3, 1.0 / 3, 1.0 / 3}), 1e-15));
    CHECK_FALSE(is_fixed_volterra(cyc, SimplexPoint::make({0.5, 0.3, 0.2}), 1e-6));
}

TEST_CASE("standard fixed sets exist only for the 2x2 shape") {
    ModelSpec m = binary_pair(0.7, 0.6);
    auto sets = standard_fixed_sets(m.space);
    REQUIRE(sets.size() == 6);
    CHECK(sets[0].name == "S1");
    CHECK(sets[0].violation(SimplexPoint::make({0.5, 0.5, 0.0, 0.0})) == 0.0);
    CHECK(sets[4].violation(SimplexPoint::make({0.4, 0.1, 0.4, 0.1})) == 0.0);
    CHECK(sets[1].violation(SimplexPoint::make({0.5, 0.5, 0.0, 0.0})) == 0.5);

    ModelSpec tri = ModelSpec::make(Graph::make({1}, {}), {{"A", "B", "C"}}, {{0.5, 0.3, 0.2}});
    CHECK(standard_fixed_sets(tri.space).empty());
}

TEST_CASE("rock-paper-scissors run: honest detector behavior") {
    // The canonical strong 3-cycle never converges mathematically, but its
    // dwell times near the vertices double every revolution. In double
    // precision the spiral reaches a vertex-adjacent state whose residuals
    // vanish, so the window detector reports convergence. This pins that
    // behavior so any change to it is visible.
    SkewMatrix cyc = SkewMatrix::make(3, {0, 1, -1, -1, 0, 1, 1, -1, 0});
    Trajectory t = iterate_volterra(cyc, SimplexPoint::make({0.5, 0.3, 0.2}), {.max_steps = 100000});
    CHECK(t.reason == StopReason::Converged);
    CHECK(t.steps == 132);  // deterministic: the first full window of sub-tol dwell
    LimitReport rep = classify_limit(t);
    CHECK(rep.classification == LimitClass::ConvergedToPoint);
    // The "limit" is the vertex the spiral was dwelling at when the window
    // filled -- not a true limit of the orbit.
    CHECK((*rep.limit)[1] == doctest::Approx(1.0).epsilon(1e-12));
}
