#include "qso/tournament.hpp"

#include <algorithm>
#include <cmath>

namespace qso {

Tournament build_tournament(const SkewMatrix& a) {
    std::vector<std::pair<std::size_t, std::size_t>> tied;
    for (std::size_t k = 0; k < a.n; ++k)
        for (std::size_t i = k + 1; i < a.n; ++i)
            if (std::abs(a.at(k, i)) <= 1e-12) tied.emplace_back(k, i);
    if (!tied.empty()) throw DegenerateCoefficients(std::move(tied));

    Tournament t;
    t.n = a.n;
    t.edges_.assign(a.n * a.n, 0);
    for (std::size_t k = 0; k < a.n; ++k)
        for (std::size_t i = 0; i < a.n; ++i)
            if (i != k && a.at(k, i) < 0.0) t.edges_[k * a.n + i] = 1;
    return t;
}

namespace {

// Iterative Tarjan over the tournament's adjacency; n is small but recursion
// depth would be n, so keep an explicit stack anyway.
std::vector<std::vector<std::size_t>> strong_components(const Tournament& t) {
    const std::size_t n = t.n;
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> comps;
    int counter = 0;

    struct Frame {
        std::size_t v;
        std::size_t next;  // next out-neighbour candidate to examine
    };
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        std::vector<Frame> frames{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            auto& f = frames.back();
            if (f.next < n) {
                std::size_t w = f.next++;
                if (w == f.v || !t.edge(f.v, w)) continue;
                if (index[w] == -1) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
            } else {
                std::size_t v = f.v;
                frames.pop_back();
                if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
                if (low[v] == index[v]) {
                    std::vector<std::size_t> comp;
                    while (true) {
                        std::size_t w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        comp.push_back(w);
                        if (w == v) break;
                    }
                    std::sort(comp.begin(), comp.end());
                    comps.push_back(std::move(comp));
                }
            }
        }
    }
    return comps;
}

}  // namespace

Condensation condensation(const Tournament& t) {
    auto comps = strong_components(t);
    // Between any two strong classes of a tournament every edge points the
    // same way, so class-level out-degree is a total order: the sink class
    // (out-degree 0) is the dominant one and goes first.
    std::vector<std::size_t> outdeg(comps.size(), 0);
    for (std::size_t a = 0; a < comps.size(); ++a)
        for (std::size_t b = 0; b < comps.size(); ++b)
            if (a != b && t.edge(comps[a][0], comps[b][0])) ++outdeg[a];
    std::vector<std::size_t> order(comps.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return outdeg[a] < outdeg[b]; });

    Condensation c;
    c.classes.reserve(comps.size());
    for (std::size_t i : order) c.classes.push_back(std::move(comps[i]));
    return c;
}

bool is_strong(const Tournament& t) { return condensation(t).strong(); }

DecayPrediction predict_decay(const SkewMatrix& a) {
    Condensation c = condensation(build_tournament(a));
    DecayPrediction p;
    p.survivors = c.classes.front();
    for (std::size_t i = 1; i < c.classes.size(); ++i)
        p.decaying.insert(p.decaying.end(), c.classes[i].begin(), c.classes[i].end());
    std::sort(p.decaying.begin(), p.decaying.end());
    return p;
}

DecayFit decay_fit(const Trajectory& traj, std::size_t coord) { return fit_log_decay(traj, coord); }

}  // namespace qso
