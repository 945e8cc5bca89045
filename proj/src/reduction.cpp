#include "qso/reduction.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace qso {

Marginal marginalize(const ConfigurationSpace& space, const SimplexPoint& lambda, int component) {
    if (component < 1 || static_cast<std::size_t>(component) > space.components.size())
        throw ValidationError("component index " + std::to_string(component) + " out of range");
    if (lambda.dim() != space.cell_count) throw DimensionMismatch(space.cell_count, lambda.dim());

    const std::size_t ci = static_cast<std::size_t>(component - 1);
    Marginal m;
    m.component = component;
    m.x.assign(space.components[ci].config_count(), 0.0);
    for (std::size_t idx = 0; idx < space.cell_count; ++idx)
        m.x[space.cell_of(idx)[ci]] += lambda[idx];
    return m;
}

std::vector<Marginal> marginalize_all(const ConfigurationSpace& space, const SimplexPoint& lambda) {
    std::vector<Marginal> out;
    out.reserve(space.components.size());
    for (std::size_t i = 1; i <= space.components.size(); ++i)
        out.push_back(marginalize(space, lambda, static_cast<int>(i)));
    return out;
}

ReducedSystem reduce(const ModelSpec& model) {
    ReducedSystem sys;
    sys.components.reserve(model.space.components.size());
    for (std::size_t c = 0; c < model.space.components.size(); ++c) {
        const auto& mu = model.measure.components[c];
        const std::size_t s = mu.size();
        ReducedComponent rc;
        rc.component = static_cast<int>(c + 1);
        rc.mu = mu.weights;
        rc.a = SkewMatrix::zero(s);
        for (std::size_t w = 0; w < s; ++w)
            for (std::size_t v = 0; v < s; ++v)
                if (w != v) rc.a.at(w, v) = (mu.of(w) - mu.of(v)) / (mu.of(w) + mu.of(v));
        sys.components.push_back(std::move(rc));
    }
    return sys;
}

std::vector<Marginal> reduced_step(const ReducedSystem& sys, const std::vector<Marginal>& xs) {
    if (xs.size() != sys.size()) throw DimensionMismatch(sys.size(), xs.size());
    std::vector<Marginal> out;
    out.reserve(xs.size());
    for (std::size_t c = 0; c < xs.size(); ++c) {
        SimplexPoint p = apply_volterra(sys.components[c].a, SimplexPoint::make(xs[c].x));
        out.push_back({xs[c].component, std::move(p.x)});
    }
    return out;
}

std::vector<Marginal> reduced_step_expanded(const ReducedSystem& sys,
                                            const std::vector<Marginal>& xs) {
    if (xs.size() != sys.size()) throw DimensionMismatch(sys.size(), xs.size());
    std::vector<Marginal> out;
    out.reserve(xs.size());
    for (std::size_t c = 0; c < xs.size(); ++c) {
        const auto& mu = sys.components[c].mu;
        const auto& x = xs[c].x;
        const std::size_t s = x.size();
        std::vector<double> next(s);
        for (std::size_t w = 0; w < s; ++w) {
            double acc = x[w];
            for (std::size_t v = 0; v < s; ++v)
                if (v != w) acc += 2.0 * mu[w] / (mu[w] + mu[v]) * x[v];
            next[w] = x[w] * acc;
        }
        double sum = 0.0;
        for (double v : next) sum += v;
        for (double& v : next) v /= sum;
        out.push_back({xs[c].component, std::move(next)});
    }
    return out;
}

double commutation_residual(const ModelSpec& model, const SimplexPoint& lambda) {
    QsoOperator op = QsoOperator::generated(model);
    SimplexPoint advanced = apply(op, lambda);

    ReducedSystem sys = reduce(model);
    std::vector<Marginal> reduced = reduced_step(sys, marginalize_all(model.space, lambda));

    double res = 0.0;
    for (std::size_t c = 0; c < sys.size(); ++c) {
        Marginal direct = marginalize(model.space, advanced, static_cast<int>(c + 1));
        for (std::size_t w = 0; w < direct.x.size(); ++w)
            res = std::max(res, std::abs(direct.x[w] - reduced[c].x[w]));
    }
    return res;
}

Reconstruction reconstruct(const ConfigurationSpace& space, const std::vector<Marginal>& limits) {
    const std::size_t m = space.components.size();
    if (limits.size() != m) throw DimensionMismatch(m, limits.size());
    for (std::size_t c = 0; c < m; ++c) {
        if (limits[c].x.size() != space.components[c].config_count())
            throw DimensionMismatch(space.components[c].config_count(), limits[c].x.size());
        double sum = 0.0;
        for (double v : limits[c].x) {
            if (v < -1e-12) throw ValidationError("marginal has a negative entry");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("marginal does not sum to 1");
    }

    const std::size_t n = space.cell_count;
    Reconstruction rec;

    // The product of the marginals always satisfies the constraints.
    std::vector<double> prod(n, 1.0);
    for (std::size_t idx = 0; idx < n; ++idx) {
        Cell cell = space.cell_of(idx);
        for (std::size_t c = 0; c < m; ++c) prod[idx] *= std::max(limits[c].x[cell[c]], 0.0);
    }
    rec.product_solution = SimplexPoint::make(std::move(prod));

    // Defensive feasibility check of the marginal constraints.
    for (std::size_t c = 0; c < m; ++c) {
        Marginal got = marginalize(space, rec.product_solution, static_cast<int>(c + 1));
        for (std::size_t w = 0; w < got.x.size(); ++w)
            if (std::abs(got.x[w] - limits[c].x[w]) > 1e-9)
                throw InconsistentMarginals("marginal constraints are infeasible at component " +
                                            std::to_string(c + 1));
    }

    // Dimension of the affine solution set: zero marginals force their cells
    // to zero, the rest is the rank of the marginal-sum constraint system
    // restricted to the free cells.
    std::vector<std::size_t> free_cells;
    for (std::size_t idx = 0; idx < n; ++idx) {
        Cell cell = space.cell_of(idx);
        bool forced_zero = false;
        for (std::size_t c = 0; c < m; ++c)
            if (limits[c].x[cell[c]] <= 0.0) forced_zero = true;
        if (!forced_zero) free_cells.push_back(idx);
    }

    std::size_t rows = 0;
    for (std::size_t c = 0; c < m; ++c) rows += space.components[c].config_count();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows),
                                              static_cast<Eigen::Index>(free_cells.size()));
    for (std::size_t col = 0; col < free_cells.size(); ++col) {
        Cell cell = space.cell_of(free_cells[col]);
        std::size_t row0 = 0;
        for (std::size_t c = 0; c < m; ++c) {
            A(static_cast<Eigen::Index>(row0 + cell[c]), static_cast<Eigen::Index>(col)) = 1.0;
            row0 += space.components[c].config_count();
        }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    lu.setThreshold(1e-10);
    std::size_t rank = free_cells.empty() ? 0 : static_cast<std::size_t>(lu.rank());
    rec.affine_dim = free_cells.size() - rank;
    rec.unique = rec.affine_dim == 0;
    return rec;
}

bool is_product_form(const ConfigurationSpace& space, const SimplexPoint& lambda, double tol) {
    auto marg = marginalize_all(space, lambda);
    const std::size_t m = space.components.size();
    for (std::size_t idx = 0; idx < space.cell_count; ++idx) {
        Cell cell = space.cell_of(idx);
        double p = 1.0;
        for (std::size_t c = 0; c < m; ++c) p *= marg[c].x[cell[c]];
        if (std::abs(p - lambda[idx]) > tol) return false;
    }
    return true;
}

}  // namespace qso
