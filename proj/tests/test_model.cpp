#include <doctest.h>

#include "oracles.hpp"
#include "qso/model.hpp"

using namespace qso;

TEST_CASE("graph validation") {
    CHECK_NOTHROW(Graph::make({1, 2, 3}, {{1, 2}}));
    CHECK_THROWS_AS(Graph::make({1, 2, 2}, {}), ValidationError);       // duplicate vertex
    CHECK_THROWS_AS(Graph::make({0, 1}, {}), ValidationError);         // non-positive id
    CHECK_THROWS_AS(Graph::make({1, 2}, {{1, 1}}), ValidationError);   // loop
    CHECK_THROWS_AS(Graph::make({1, 2}, {{1, 3}}), ValidationError);   // unknown endpoint
    CHECK_THROWS_AS(Graph::make({1, 2}, {{1, 2}, {2, 1}}), ValidationError);  // dup edge

    Graph g = Graph::make({1, 2, 3}, {{3, 1}});
    CHECK(g.edges == std::vector<std::pair<int, int>>{{1, 3}});  // normalized (lo, hi)
}

TEST_CASE("connected components: canonical order") {
    Graph g = Graph::make({5, 1, 3, 2}, {{5, 1}});
    auto comps = connected_components(g);
    REQUIRE(comps.size() == 3);
    CHECK(comps[0] == std::vector<int>{1, 5});  // sorted by smallest vertex, ascending inside
    CHECK(comps[1] == std::vector<int>{2});
    CHECK(comps[2] == std::vector<int>{3});
}

TEST_CASE("connected components agree with a closure oracle") {
    // A few deterministic shapes: path, star, two triangles, isolated points.
    std::vector<Graph> graphs = {
        Graph::make({1, 2, 3, 4, 5}, {{1, 2}, {2, 3}, {3, 4}, {4, 5}}),
        Graph::make({1, 2, 3, 4, 5}, {{1, 2}, {1, 3}, {1, 4}, {1, 5}}),
        Graph::make({1, 2, 3, 4, 5, 6}, {{1, 2}, {2, 3}, {1, 3}, {4, 5}, {5, 6}, {4, 6}}),
        Graph::make({1, 2, 3, 4}, {}),
    };
    for (const auto& g : graphs) CHECK(connected_components(g) == oracles::closure_components(g));
}

TEST_CASE("configuration space indexing") {
    // Path on three vertices, binary alphabet: one component, 8 cells.
    Graph g = Graph::make({1, 2, 3}, {{1, 2}, {2, 3}});
    ConfigurationSpace space = ConfigurationSpace::make(g, {{"A", "a"}});
    REQUIRE(space.components.size() == 1);
    CHECK(space.cell_count == 8);
    CHECK(space.components[0].config_count() == 8);

    for (std::size_t i = 0; i < 8; ++i) CHECK(space.index_of(space.cell_of(i)) == i);
    CHECK(space.cell_label(space.cell_of(0)) == "(A,A,A)");
    CHECK(space.cell_label(space.cell_of(1)) == "(A,A,a)");  // last vertex varies fastest
    CHECK(space.cell_label(space.cell_of(4)) == "(a,A,A)");
}

TEST_CASE("configuration space: two components, first most significant") {
    Graph g = Graph::make({1, 2}, {});
    ConfigurationSpace space = ConfigurationSpace::make(g, {{"A", "a"}, {"B", "b"}});
    REQUIRE(space.cell_count == 4);
    CHECK(space.cell_of(0) == Cell{0, 0});
    CHECK(space.cell_of(1) == Cell{0, 1});
    CHECK(space.cell_of(2) == Cell{1, 0});
    CHECK(space.cell_of(3) == Cell{1, 1});
    CHECK(space.cell_label(space.cell_of(2)) == "(a,B)");

    CHECK_THROWS_AS(ConfigurationSpace::make(g, {{"A", "a"}}), ValidationError);  // one per comp
    CHECK_THROWS_AS(ConfigurationSpace::make(g, {{"A", "A"}, {"B", "b"}}),
                    ValidationError);  // duplicate symbol
}

TEST_CASE("cell cap enforcement") {
    Graph g = Graph::make({1, 2, 3}, {{1, 2}, {2, 3}});
    try {
        ConfigurationSpace::make(g, {{"A", "a"}}, 4);
        FAIL("expected CapExceeded");
    } catch (const CapExceeded& e) {
        CHECK(e.required == 8);
        CHECK(e.cap == 4);
    }
    CHECK(enumerate_cells(ConfigurationSpace::make(g, {{"A", "a"}})).size() == 8);
    CHECK_THROWS_AS(enumerate_cells(ConfigurationSpace::make(g, {{"A", "a"}}), 4), CapExceeded);
}

TEST_CASE("component measure validation") {
    CHECK_THROWS_AS(ComponentMeasure::make(1, {0.5, 0.5, 0.0}), ValidationError);  // zero weight
    CHECK_THROWS_AS(ComponentMeasure::make(1, {0.5, 0.5, 1e-13}), ValidationError);
    CHECK_THROWS_AS(ComponentMeasure::make(1, {0.6, 0.6}), ValidationError);  // sum far off 1
    CHECK_THROWS_AS(ComponentMeasure::make(1, {0.5, 0.5 + 2e-9}), ValidationError);

    // Within tolerance: accepted and renormalized to a unit total.
    ComponentMeasure m = ComponentMeasure::make(1, {0.5, 0.5 + 0.5e-9});
    CHECK(m.of(0) + m.of(1) == doctest::Approx(1.0).epsilon(1e-15));

    // The error names the offending configuration.
    try {
        ComponentMeasure::make(2, {0.5, -0.1, 0.6});
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
}

TEST_CASE("product measure of a cell") {
    ModelSpec m = ModelSpec::make(Graph::make({1, 2}, {}), {{"A", "a"}, {"A", "a"}},
                                  {{0.7, 0.3}, {0.6, 0.4}});
    CHECK(measure_of(m.measure, {0, 0}) == doctest::Approx(0.42).epsilon(1e-15));
    CHECK(measure_of(m.measure, {0, 1}) == doctest::Approx(0.28).epsilon(1e-15));
    CHECK(measure_of(m.measure, {1, 0}) == doctest::Approx(0.18).epsilon(1e-15));
    CHECK(measure_of(m.measure, {1, 1}) == doctest::Approx(0.12).epsilon(1e-15));

    double total = 0.0;
    for (const Cell& c : enumerate_cells(m.space)) total += measure_of(m.measure, c);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(
        ModelSpec::make(Graph::make({1, 2}, {}), {{"A", "a"}, {"A", "a"}}, {{0.7, 0.3}}),
        ValidationError);  // one weight table per component
}
