#pragma once

#include <cstddef>
#include <vector>

#include "qso/construct.hpp"
#include "qso/dynamics.hpp"

namespace qso {

// Complete directed graph over the coordinates of a Volterra operator:
// the edge between k and i is directed k -> i iff a_{ki} < 0 (coordinate i
// suppresses coordinate k; edges point from the harmed to the harming side).
struct Tournament {
    std::size_t n = 0;
    std::vector<std::uint8_t> edges_;  // edges_[k*n+i] = 1 iff edge k -> i

    bool edge(std::size_t k, std::size_t i) const { return edges_[k * n + i] != 0; }
};

// Requires every off-diagonal |a_{ki}| > 1e-12; ties have no tournament and
// throw DegenerateCoefficients listing the pairs (callers fall back to
// empirical classification).
Tournament build_tournament(const SkewMatrix& a);

bool is_strong(const Tournament& t);

// Strong components in the total order induced by between-class edges,
// dominant class first: every edge between two classes points from the later
// class into the earlier one, so classes[0] is the sink that all others feed.
struct Condensation {
    std::vector<std::vector<std::size_t>> classes;
    bool strong() const { return classes.size() == 1; }
};

Condensation condensation(const Tournament& t);

struct DecayPrediction {
    std::vector<std::size_t> survivors;  // the dominant (sink) class
    std::vector<std::size_t> decaying;   // everything else: geometric extinction
};

// Long-run prediction from the condensation: coordinates outside the dominant
// strong class die out at a geometric rate; the dominant class survives.
// (The sink-class convention is derived from the 2-dim case: a_{12} > 0 makes
// x_1 the survivor and directs the edge 2 -> 1, so survivors receive edges.)
DecayPrediction predict_decay(const SkewMatrix& a);

// Empirical check of the geometric-decay prediction for one coordinate.
DecayFit decay_fit(const Trajectory& traj, std::size_t coord);

}  // namespace qso
