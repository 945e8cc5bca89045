#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qso/errors.hpp"

namespace qso {

// A cell is one configuration of the whole system, stored as the tuple of
// per-component configuration indices (component order is canonical).
using Cell = std::vector<std::uint32_t>;

// Finite graph without loops or multiple edges. Vertices are positive integer
// identifiers; edges are unordered pairs stored normalized (lo, hi).
struct Graph {
    std::vector<int> vertices;
    std::vector<std::pair<int, int>> edges;

    // Validates: distinct positive vertices, no loops, no duplicate edges,
    // endpoints present in the vertex list. Normalizes edge order.
    static Graph make(std::vector<int> vertices, std::vector<std::pair<int, int>> edges);
};

// One maximal connected component of the graph plus its symbol alphabet.
// A component configuration assigns a symbol to each of its vertices, so the
// component carries |alphabet|^|vertices| configurations.
struct Component {
    int index = 0;                      // 1-based, canonical order
    std::vector<int> vertices;          // ascending
    std::vector<std::string> alphabet;  // size >= 1, order is the digit order

    std::size_t config_count() const;
};

// Vertex partition into maximal connected components, canonical order:
// components sorted by their smallest vertex, vertices ascending inside.
std::vector<std::vector<int>> connected_components(const Graph& g);

// Default cell-count cap; QSO_CELL_CAP overrides (see README).
std::size_t cell_cap();

// The full configuration space: components with alphabets and the bijection
// between cells and 0-based indices. Indexing is lexicographic: the first
// component is the most significant digit; inside a component, vertices in
// ascending order with alphabet position as digit value.
struct ConfigurationSpace {
    std::vector<Component> components;
    std::size_t cell_count = 0;

    // alphabets: one alphabet per component, in canonical component order.
    static ConfigurationSpace make(const Graph& g, std::vector<std::vector<std::string>> alphabets,
                                   std::size_t cap = cell_cap());

    std::size_t dim() const { return components.size(); }

    std::size_t index_of(const Cell& c) const;
    Cell cell_of(std::size_t index) const;

    // Human-readable form, e.g. "(A,a)" listing symbols vertex by vertex.
    std::string cell_label(const Cell& c) const;

  private:
    std::vector<std::size_t> strides_;  // strides_[i] = prod of later components' counts
    friend struct ProductMeasure;
};

// Enumerates all cells in index order. Guarded by the cap because this is the
// exponential object of the whole construction.
std::vector<Cell> enumerate_cells(const ConfigurationSpace& space,
                                  std::size_t cap = cell_cap());

// Strictly positive probability measure on one component's configurations.
struct ComponentMeasure {
    int component_index = 0;      // 1-based
    std::vector<double> weights;  // over that component's configurations

    // Rejects weights <= 1e-12 and totals off 1 by more than 1e-9; then
    // renormalizes so downstream ratios see an exact unit total.
    static ComponentMeasure make(int component_index, std::vector<double> weights);

    double of(std::uint32_t config) const { return weights[config]; }
    std::size_t size() const { return weights.size(); }
};

// Product measure over the full space: mu(cell) = prod_i mu_i(cell_i).
struct ProductMeasure {
    std::vector<ComponentMeasure> components;

    static ProductMeasure make(const ConfigurationSpace& space,
                               std::vector<std::vector<double>> weights);
};

double measure_of(const ProductMeasure& mu, const Cell& cell);

// Generative description of an operator: graph + alphabets + product measure.
struct ModelSpec {
    Graph graph;
    ConfigurationSpace space;
    ProductMeasure measure;

    static ModelSpec make(Graph g, std::vector<std::vector<std::string>> alphabets,
                          std::vector<std::vector<double>> weights,
                          std::size_t cap = cell_cap());
};

}  // namespace qso
