#include "qso/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

namespace qso {

Graph Graph::make(std::vector<int> vertices, std::vector<std::pair<int, int>> edges) {
    std::set<int> seen;
    for (int v : vertices) {
        if (v <= 0) throw ValidationError("vertex identifiers must be positive, got " + std::to_string(v));
        if (!seen.insert(v).second)
            throw ValidationError("duplicate vertex " + std::to_string(v));
    }
    std::set<std::pair<int, int>> eset;
    for (auto& [u, v] : edges) {
        if (u == v) throw ValidationError("loop at vertex " + std::to_string(u));
        if (!seen.count(u) || !seen.count(v))
            throw ValidationError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                                  ") references an unknown vertex");
        if (u > v) std::swap(u, v);
        if (!eset.insert({u, v}).second)
            throw ValidationError("duplicate edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
    }
    Graph g;
    g.vertices = std::move(vertices);
    g.edges.assign(eset.begin(), eset.end());
    return g;
}

std::vector<std::vector<int>> connected_components(const Graph& g) {
    // Union-find over vertex ids; small graphs, no need for ranks.
    std::unordered_map<int, int> parent;
    for (int v : g.vertices) parent[v] = v;
    std::function<int(int)> find = [&](int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (const auto& [u, v] : g.edges) parent[find(u)] = find(v);

    std::unordered_map<int, std::vector<int>> groups;
    for (int v : g.vertices) groups[find(v)].push_back(v);

    std::vector<std::vector<int>> comps;
    comps.reserve(groups.size());
    for (auto& [root, vs] : groups) {
        std::sort(vs.begin(), vs.end());
        comps.push_back(std::move(vs));
    }
    // Canonical order: by smallest contained vertex.
    std::sort(comps.begin(), comps.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return comps;
}

std::size_t Component::config_count() const {
    std::size_t c = 1;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        if (c > std::numeric_limits<std::size_t>::max() / alphabet.size())
            throw CapExceeded(std::numeric_limits<std::size_t>::max(), cell_cap(),
                              "component configuration count overflows");
        c *= alphabet.size();
    }
    return c;
}

std::size_t cell_cap() {
    if (const char* env = std::getenv("QSO_CELL_CAP")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
        throw ValidationError(std::string("QSO_CELL_CAP is not a positive integer: ") + env);
    }
    return 4096;
}

ConfigurationSpace ConfigurationSpace::make(const Graph& g,
                                            std::vector<std::vector<std::string>> alphabets,
                                            std::size_t cap) {
    auto parts = connected_components(g);
    if (alphabets.size() != parts.size())
        throw ValidationError("expected " + std::to_string(parts.size()) + " alphabets (one per component), got " +
                              std::to_string(alphabets.size()));

    ConfigurationSpace s;
    s.components.reserve(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (alphabets[i].empty())
            throw ValidationError("component " + std::to_string(i + 1) + " has an empty alphabet");
        std::set<std::string> uniq(alphabets[i].begin(), alphabets[i].end());
        if (uniq.size() != alphabets[i].size())
            throw ValidationError("component " + std::to_string(i + 1) + " alphabet has duplicate symbols");
        Component c;
        c.index = static_cast<int>(i + 1);
        c.vertices = parts[i];
        c.alphabet = std::move(alphabets[i]);
        s.components.push_back(std::move(c));
    }

    s.cell_count = s.components.empty() ? 0 : 1;
    for (const auto& c : s.components) {
        std::size_t cc = c.config_count();
        if (cc != 0 && s.cell_count > cap / cc + 1)  // conservative overflow guard
            throw CapExceeded(std::numeric_limits<std::size_t>::max(), cap, "configuration space");
        s.cell_count *= cc;
    }
    if (s.cell_count > cap) throw CapExceeded(s.cell_count, cap, "configuration space");

    // Lexicographic strides: component 1 is the most significant digit.
    s.strides_.assign(s.components.size(), 1);
    for (std::size_t i = s.components.size(); i-- > 1;)
        s.strides_[i - 1] = s.strides_[i] * s.components[i].config_count();
    return s;
}

std::size_t ConfigurationSpace::index_of(const Cell& c) const {
    if (c.size() != components.size()) throw DimensionMismatch(components.size(), c.size());
    std::size_t idx = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] >= components[i].config_count())
            throw ValidationError("configuration index out of range for component " +
                                  std::to_string(i + 1));
        idx += c[i] * strides_[i];
    }
    return idx;
}

Cell ConfigurationSpace::cell_of(std::size_t index) const {
    if (index >= cell_count)
        throw ValidationError("cell index " + std::to_string(index) + " out of range");
    Cell c(components.size());
    for (std::size_t i = 0; i < components.size(); ++i) {
        c[i] = static_cast<std::uint32_t>(index / strides_[i]);
        index %= strides_[i];
    }
    return c;
}

std::string ConfigurationSpace::cell_label(const Cell& c) const {
    // Per component, decode the configuration back into one symbol per vertex
    // (ascending vertex order, alphabet position as digit, first vertex most
    // significant).
    std::string out = "(";
    bool first = true;
    for (std::size_t i = 0; i < components.size(); ++i) {
        const auto& comp = components[i];
        std::size_t base = comp.alphabet.size();
        std::size_t rest = c[i];
        std::vector<std::size_t> digits(comp.vertices.size());
        for (std::size_t d = comp.vertices.size(); d-- > 0;) {
            digits[d] = rest % base;
            rest /= base;
        }
        for (std::size_t d = 0; d < digits.size(); ++d) {
            if (!first) out += ",";
            out += comp.alphabet[digits[d]];
            first = false;
        }
    }
    return out + ")";
}

std::vector<Cell> enumerate_cells(const ConfigurationSpace& space, std::size_t cap) {
    if (space.cell_count > cap) throw CapExceeded(space.cell_count, cap, "cell enumeration");
    std::vector<Cell> cells;
    cells.reserve(space.cell_count);
    for (std::size_t i = 0; i < space.cell_count; ++i) cells.push_back(space.cell_of(i));
    return cells;
}

ComponentMeasure ComponentMeasure::make(int component_index, std::vector<double> weights) {
    if (weights.empty())
        throw ValidationError("component " + std::to_string(component_index) + " measure is empty");
    double sum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] > 1e-12))
            throw ValidationError("component " + std::to_string(component_index) +
                                  " configuration " + std::to_string(i) +
                                  " has non-positive weight " + std::to_string(weights[i]));
        sum += weights[i];
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("component " + std::to_string(component_index) +
                              " weights sum to " + std::to_string(sum) + ", expected 1");
    for (auto& w : weights) w /= sum;
    ComponentMeasure m;
    m.component_index = component_index;
    m.weights = std::move(weights);
    return m;
}

ProductMeasure ProductMeasure::make(const ConfigurationSpace& space,
                                    std::vector<std::vector<double>> weights) {
    if (weights.size() != space.components.size())
        throw ValidationError("expected " + std::to_string(space.components.size()) +
                              " measures (one per component), got " + std::to_string(weights.size()));
    ProductMeasure mu;
    mu.components.reserve(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i].size() != space.components[i].config_count())
            throw ValidationError("component " + std::to_string(i + 1) + " measure has " +
                                  std::to_string(weights[i].size()) + " weights, expected " +
                                  std::to_string(space.components[i].config_count()));
        mu.components.push_back(ComponentMeasure::make(static_cast<int>(i + 1), std::move(weights[i])));
    }
    return mu;
}

double measure_of(const ProductMeasure& mu, const Cell& cell) {
    if (cell.size() != mu.components.size())
        throw DimensionMismatch(mu.components.size(), cell.size());
    double p = 1.0;
    for (std::size_t i = 0; i < cell.size(); ++i) p *= mu.components[i].of(cell[i]);
    return p;
}

ModelSpec ModelSpec::make(Graph g, std::vector<std::vector<std::string>> alphabets,
                          std::vector<std::vector<double>> weights, std::size_t cap) {
    ModelSpec m;
    m.space = ConfigurationSpace::make(g, std::move(alphabets), cap);
    m.measure = ProductMeasure::make(m.space, std::move(weights));
    m.graph = std::move(g);
    return m;
}

}  // namespace qso
