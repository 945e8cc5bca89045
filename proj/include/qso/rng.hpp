#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace qso {

// Deterministic random source. We draw doubles from the raw 53 high bits of
// mt19937_64 instead of std::uniform_real_distribution so that a given seed
// produces bit-identical streams on every platform/toolchain -- seeded
// verification runs and acceptance fixtures depend on that.
class RandomSource {
  public:
    explicit RandomSource(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t u64() { return gen_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform index in [0, n).
    std::size_t index(std::size_t n) {
        // Rejection-free modulo is fine here: n is tiny next to 2^64, bias < 2^-50.
        return static_cast<std::size_t>(gen_() % n);
    }

    bool coin(double p = 0.5) { return uniform() < p; }

    // Uniform point of the open simplex (Dirichlet(1,..,1) via exponentials).
    std::vector<double> simplex_point(std::size_t n) {
        std::vector<double> x(n);
        double s = 0.0;
        for (auto& v : x) {
            v = -std::log(1.0 - uniform());  // Exp(1), strictly positive
            s += v;
        }
        for (auto& v : x) v /= s;
        return x;
    }

    // Independent child stream; tag keeps sibling streams decorrelated.
    RandomSource fork(std::uint64_t tag) {
        return RandomSource(splitmix(gen_() ^ (tag * 0x9e3779b97f4a7c15ull)));
    }

  private:
    static std::uint64_t splitmix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    std::mt19937_64 gen_;
};

}  // namespace qso
