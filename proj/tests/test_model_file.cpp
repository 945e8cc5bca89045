#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qso/cli.hpp"
#include "qso/dynamics.hpp"
#include "qso/model_file.hpp"
#include "qso/rng.hpp"

using namespace qso;

namespace {

const std::string kModels = std::string(QSO_SOURCE_DIR) + "/models/";

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("parsing the bundled model files") {
    ModelFile pair = load_model_file(kModels + "binary_pair.json");
    REQUIRE(pair.has_model());
    CHECK(pair.model().space.cell_count == 4);
    CHECK(pair.model().measure.components[0].of(0) == doctest::Approx(0.7).epsilon(1e-15));

    ModelFile cyc = load_model_file(kModels + "cyclic3.json");
    REQUIRE(cyc.has_skew());
    CHECK(cyc.skew().n == 3);
    CHECK(cyc.skew().at(0, 1) == 1.0);

    ModelFile chain = load_model_file(kModels + "chain3.json");
    REQUIRE(chain.has_model());
    CHECK(chain.model().space.cell_count == 8);
    CHECK(chain.model().space.components.size() == 1);
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS(parse_model_file("not json"), ValidationError);
    CHECK_THROWS_AS(parse_model_file("[1,2]"), ValidationError);
    CHECK_THROWS_AS(parse_model_file("{}"), ValidationError);  // none of the three forms
    // Two forms at once.
    CHECK_THROWS_AS(parse_model_file(R"({"skew": [[0]], "tensor": [[[1]]]})"), ValidationError);
    // Graph form missing pieces.
    CHECK_THROWS_AS(parse_model_file(R"({"graph": {"vertices": [1]}, "measures": [[1.0]]})"),
                    ValidationError);
    CHECK_THROWS_AS(
        parse_model_file(R"({"graph": {"vertices": [1]}, "alphabet": ["A", "a"]})"),
        ValidationError);
    // Ragged tensor.
    CHECK_THROWS_AS(parse_model_file(R"({"tensor": [[[1, 0], [0, 1]]]})"), ValidationError);
    // Zero weight names the configuration.
    try {
        parse_model_file(
            R"({"graph": {"vertices": [1]}, "alphabet": ["A", "a"], "measures": [[1.0, 0.0]]})");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("configuration 1") != std::string::npos);
    }
    CHECK_THROWS_AS(load_model_file("/nonexistent/x.json"), ValidationError);
}

TEST_CASE("alphabet shorthand replicates across components") {
    ModelFile f = parse_model_file(R"({
        "graph": {"vertices": [1, 2], "edges": []},
        "alphabet": ["A", "a"],
        "measures": [[0.7, 0.3], [0.6, 0.4]]
    })");
    REQUIRE(f.has_model());
    CHECK(f.model().space.components[1].alphabet == std::vector<std::string>{"A", "a"});
}

TEST_CASE("model serialization round-trips") {
    ModelFile f = load_model_file(kModels + "binary_pair.json");
    ModelFile g = parse_model_file(model_to_json(f.model()));
    REQUIRE(g.has_model());
    CHECK(g.model().space.cell_count == 4);
    for (std::size_t c = 0; c < 2; ++c)
        for (std::uint32_t w = 0; w < 2; ++w)
            CHECK(g.model().measure.components[c].of(w) == f.model().measure.components[c].of(w));
}

TEST_CASE("tensor export round-trip reproduces the dynamics") {
    ModelFile f = load_model_file(kModels + "binary_pair.json");
    QsoOperator gen = QsoOperator::generated(f.model());

    ModelFile back = parse_model_file(tensor_to_json(materialize(f.model())));
    REQUIRE(back.has_tensor());
    QsoOperator exp = QsoOperator::explicit_tensor(back.tensor());

    RandomSource rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        SimplexPoint x = SimplexPoint::make(rng.simplex_point(4));
        SimplexPoint a = apply(gen, x), b = apply(exp, x);
        for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12);
    }
}

TEST_CASE("cmd_build prints the summary and maps failures to exit 2") {
    std::ostringstream out, err;
    CHECK(cmd_build(kModels + "binary_pair.json", std::nullopt, out, err) == exit_ok);
    CHECK(out.str().find("4 cells, 2 components, Volterra: no") != std::string::npos);

    std::ostringstream out2, err2;
    CHECK(cmd_build(kModels + "chain3.json", std::nullopt, out2, err2) == exit_ok);
    CHECK(out2.str().find("Volterra: yes") != std::string::npos);

    std::ostringstream out3, err3;
    CHECK(cmd_build("/nonexistent/x.json", std::nullopt, out3, err3) == exit_validation);
    CHECK_FALSE(err3.str().empty());

    // A zero weight is a validation failure naming the configuration.
    auto bad = temp_file("qso_bad_model.json");
    std::ofstream(bad) << R"({"graph": {"vertices": [1]}, "alphabet": ["A", "a"],
                              "measures": [[1.0, 0.0]]})";
    std::ostringstream out4, err4;
    CHECK(cmd_build(bad.string(), std::nullopt, out4, err4) == exit_validation);
    CHECK(err4.str().find("configuration") != std::string::npos);
    std::filesystem::remove(bad);
}

TEST_CASE("cmd_build --export-tensor round-trips through cmd_iterate") {
    auto exported = temp_file("qso_export.json");
    std::ostringstream out, err;
    REQUIRE(cmd_build(kModels + "binary_pair.json", exported.string(), out, err) == exit_ok);

    std::ostringstream out2, err2;
    RunConfig cfg;
    cfg.uniform = true;
    CHECK(cmd_iterate(exported.string(), cfg, out2, err2) == exit_ok);
    CHECK(out2.str().find("ConvergedToPoint") != std::string::npos);
    std::filesystem::remove(exported);
}

TEST_CASE("cmd_iterate writes CSV whose rows re-validate and match exactly") {
    auto csv = temp_file("qso_traj.csv");
    RunConfig cfg;
    cfg.uniform = true;
    cfg.max_steps = 3000;
    cfg.csv_path = csv.string();
    std::ostringstream out, err;
    REQUIRE(cmd_iterate(kModels + "binary_pair.json", cfg, out, err) == exit_ok);

    std::ifstream in(csv);
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header == "l,x_1,x_2,x_3,x_4");
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        long l = -1;
        row >> l;
        std::vector<double> x(4);
        for (auto& v : x) REQUIRE((row >> v));
        CHECK(l >= 0);
        CHECK_NOTHROW(SimplexPoint::make(x));  // shortest round-trip keeps rows valid
        ++rows;
    }
    CHECK(rows > 50);
    std::filesystem::remove(csv);
}

TEST_CASE("cmd_iterate rejects a wrong-length x0") {
    RunConfig cfg;
    cfg.x0 = std::vector<double>{0.5, 0.5};
    std::ostringstream out, err;
    CHECK(cmd_iterate(kModels + "binary_pair.json", cfg, out, err) == exit_validation);
    CHECK(err.str().find("dimension mismatch") != std::string::npos);
}

TEST_CASE("cmd_reduce prints the matrices and the residual verdict") {
    std::ostringstream out, err;
    CHECK(cmd_reduce(kModels + "binary_pair.json", 1, out, err) == exit_ok);
    CHECK(out.str().find("0.4") != std::string::npos);
    CHECK(out.str().find("max commutation residual") != std::string::npos);
    CHECK(out.str().find("within the 1e-12 contract") != std::string::npos);

    // Tensor-only input carries no measure to reduce.
    auto exported = temp_file("qso_export2.json");
    std::ostringstream o1, e1;
    REQUIRE(cmd_build(kModels + "binary_pair.json", exported.string(), o1, e1) == exit_ok);
    std::ostringstream out2, err2;
    CHECK(cmd_reduce(exported.string(), 1, out2, err2) == exit_validation);
    std::filesystem::remove(exported);

    // Single-component models get the already-Volterra note.
    std::ostringstream out3, err3;
    CHECK(cmd_reduce(kModels + "mass_532.json", 1, out3, err3) == exit_ok);
    CHECK(out3.str().find("already Volterra") != std::string::npos);
}

TEST_CASE("cmd_tournament reports predictions and degeneracies") {
    std::ostringstream out, err;
    CHECK(cmd_tournament(kModels + "mass_532.json", std::nullopt, false, 1, out, err) == exit_ok);
    CHECK(out.str().find("not strong") != std::string::npos);
    CHECK(out.str().find("survivors: {1}") != std::string::npos);
    CHECK(out.str().find("decaying: {2, 3}") != std::string::npos);

    std::ostringstream out2, err2;
    CHECK(cmd_tournament(kModels + "cyclic3.json", std::nullopt, false, 1, out2, err2) == exit_ok);
    CHECK(out2.str().find("strong") != std::string::npos);
    CHECK(out2.str().find("no decay prediction") != std::string::npos);

    // A tied pair (alpha_1 = 1/2) degrades to the empirical fallback.
    std::ostringstream out3, err3;
    CHECK(cmd_tournament(kModels + "binary_pair_a05.json", std::nullopt, false, 1, out3, err3) ==
          exit_ok);
    CHECK(out3.str().find("degenerate coefficients") != std::string::npos);
    CHECK(out3.str().find("confirmation run") != std::string::npos);

    // Component selection.
    std::ostringstream out4, err4;
    CHECK(cmd_tournament(kModels + "binary_pair.json", 2, false, 1, out4, err4) == exit_ok);
    CHECK(out4.str().find("component 2") != std::string::npos);
    CHECK(out4.str().find("component 1 (") == std::string::npos);
    std::ostringstream out5, err5;
    CHECK(cmd_tournament(kModels + "binary_pair.json", 9, false, 1, out5, err5) ==
          exit_validation);
}

TEST_CASE("commands are deterministic under a fixed seed") {
    std::ostringstream a, b, err;
    RunConfig cfg;
    cfg.random = true;
    cfg.seed = 42;
    REQUIRE(cmd_iterate(kModels + "binary_pair.json", cfg, a, err) == exit_ok);
    REQUIRE(cmd_iterate(kModels + "binary_pair.json", cfg, b, err) == exit_ok);
    CHECK(a.str() == b.str());
}
