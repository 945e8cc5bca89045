#include "qso/model_file.hpp"

#include <json.hpp>  // vendored single-header nlohmann::json

#include <fstream>
#include <sstream>

using nlohmann::json;

namespace qso {

namespace {

std::vector<std::vector<double>> parse_measures(const json& j) {
    if (!j.is_array()) throw ValidationError("\"measures\" must be an array of weight arrays");
    std::vector<std::vector<double>> out;
    for (const auto& row : j) {
        if (!row.is_array()) throw ValidationError("each measure must be an array of weights");
        out.push_back(row.get<std::vector<double>>());
    }
    return out;
}

ModelFile parse(const json& j) {
    const bool has_graph = j.contains("graph");
    const bool has_tensor = j.contains("tensor");
    const bool has_skew = j.contains("skew");
    if (has_graph + has_tensor + has_skew != 1)
        throw ValidationError(
            "model file must contain exactly one of: graph (+alphabet/alphabets+measures), "
            "tensor, skew");

    ModelFile f;
    if (has_tensor) {
        const auto& t = j.at("tensor");
        if (!t.is_array() || t.empty()) throw ValidationError("\"tensor\" must be a non-empty 3d array");
        std::size_t n = t.size();
        std::vector<double> entries;
        entries.reserve(n * n * n);
        for (const auto& plane : t) {
            if (!plane.is_array() || plane.size() != n)
                throw ValidationError("\"tensor\" must be n x n x n");
            for (const auto& row : plane) {
                if (!row.is_array() || row.size() != n)
                    throw ValidationError("\"tensor\" must be n x n x n");
                for (const auto& v : row) entries.push_back(v.get<double>());
            }
        }
        f.content = HeredityTensor::from_raw(n, std::move(entries));
        return f;
    }
    if (has_skew) {
        const auto& s = j.at("skew");
        if (!s.is_array() || s.empty()) throw ValidationError("\"skew\" must be a non-empty matrix");
        std::size_t n = s.size();
        std::vector<double> entries;
        entries.reserve(n * n);
        for (const auto& row : s) {
            if (!row.is_array() || row.size() != n) throw ValidationError("\"skew\" must be n x n");
            for (const auto& v : row) entries.push_back(v.get<double>());
        }
        f.content = SkewMatrix::make(n, std::move(entries));
        return f;
    }

    const auto& gj = j.at("graph");
    std::vector<int> vertices = gj.at("vertices").get<std::vector<int>>();
    std::vector<std::pair<int, int>> edges;
    if (gj.contains("edges"))
        for (const auto& e : gj.at("edges")) {
            if (!e.is_array() || e.size() != 2) throw ValidationError("edges must be [u,v] pairs");
            edges.emplace_back(e[0].get<int>(), e[1].get<int>());
        }
    Graph g = Graph::make(std::move(vertices), std::move(edges));

    std::size_t m = connected_components(g).size();
    std::vector<std::vector<std::string>> alphabets;
    if (j.contains("alphabets")) {
        for (const auto& a : j.at("alphabets")) alphabets.push_back(a.get<std::vector<std::string>>());
    } else if (j.contains("alphabet")) {
        // Shorthand: one shared alphabet for every component.
        auto a = j.at("alphabet").get<std::vector<std::string>>();
        alphabets.assign(m, a);
    } else {
        throw ValidationError("graph models need \"alphabet\" or \"alphabets\"");
    }

    if (!j.contains("measures")) throw ValidationError("graph models need \"measures\"");
    f.content = ModelSpec::make(std::move(g), std::move(alphabets), parse_measures(j.at("measures")));
    return f;
}

}  // namespace

ModelFile parse_model_file(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("model file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("model file must be a JSON object");
    return parse(j);
}

ModelFile load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model_file(buf.str());
}

std::string model_to_json(const ModelSpec& model) {
    json j;
    j["graph"]["vertices"] = model.graph.vertices;
    auto& edges = j["graph"]["edges"] = json::array();
    for (const auto& [u, v] : model.graph.edges) edges.push_back({u, v});
    auto& alphabets = j["alphabets"] = json::array();
    auto& measures = j["measures"] = json::array();
    for (std::size_t c = 0; c < model.space.components.size(); ++c) {
        alphabets.push_back(model.space.components[c].alphabet);
        measures.push_back(model.measure.components[c].weights);
    }
    return j.dump(2);
}

std::string tensor_to_json(const HeredityTensor& t) {
    json planes = json::array();
    for (std::size_t i = 0; i < t.n; ++i) {
        json plane = json::array();
        for (std::size_t j = 0; j < t.n; ++j) {
            json row = json::array();
            for (std::size_t k = 0; k < t.n; ++k) row.push_back(t.at(i, j, k));
            plane.push_back(std::move(row));
        }
        planes.push_back(std::move(plane));
    }
    json out;
    out["tensor"] = std::move(planes);
    return out.dump();
}

void write_tensor_json(const HeredityTensor& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write tensor export: " + path);
    out << tensor_to_json(t) << "\n";
}

}  // namespace qso
