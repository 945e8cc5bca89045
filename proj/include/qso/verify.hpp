#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qso/model.hpp"
#include "qso/rng.hpp"

namespace qso {

// Parameters of the randomized model generator shared by the verification
// harness and tests. Alphabets default to size >= 2: a component with a
// single symbol is dynamically inert and breaks the Volterra-iff-connected
// equivalence (see the unit test pinning that counterexample).
struct GenOptions {
    std::size_t max_vertices = 8;
    std::size_t min_alphabet = 2;
    std::size_t max_alphabet = 3;
    double edge_prob = 0.35;
    std::size_t max_cells = 512;
    bool distinct_weights = false;  // enforce pairwise-distinct measure weights
};

ModelSpec random_model(RandomSource& rng, const GenOptions& opt = {});

struct VerifyOptions {
    std::uint64_t seed = 20250815;
    int trials = 200;        // scale of the heavier randomized properties
    int max_vertices = 8;
    bool inject_fault = false;  // test-only: perturb one marginal to prove the
                                // harness actually detects violations
};

// Runs every randomized property suite; deterministic for a fixed seed.
// Prints one line per property; on failure prints a reproducer (seed,
// property, trial, model JSON) and returns 1, else 0.
int run_verify(const VerifyOptions& opts, std::ostream& out);

}  // namespace qso
