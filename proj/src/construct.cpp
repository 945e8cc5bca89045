#include "qso/construct.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qso {

namespace {

constexpr double kVolterraTol = 1e-12;

// Per-component admissible denominator: mass of the projection set
// {phi_i, psi_i}, i.e. mu_i(phi_i) when the projections coincide.
double component_denominator(const ComponentMeasure& mu, std::uint32_t a, std::uint32_t b) {
    return a == b ? mu.of(a) : mu.of(a) + mu.of(b);
}

bool admissible(const Cell& sigma, const Cell& s1, const Cell& s2) {
    for (std::size_t i = 0; i < sigma.size(); ++i)
        if (sigma[i] != s1[i] && sigma[i] != s2[i]) return false;
    return true;
}

}  // namespace

HeredityTensor HeredityTensor::from_raw(std::size_t n, std::vector<double> entries) {
    if (entries.size() != n * n * n)
        throw ValidationError("tensor has " + std::to_string(entries.size()) + " entries, expected " +
                              std::to_string(n * n * n));
    HeredityTensor t;
    t.n = n;
    t.p = std::move(entries);
    auto report = validate(t);
    if (!report.empty()) {
        std::string msg = "tensor rejected:";
        for (std::size_t i = 0; i < report.size() && i < 8; ++i) msg += "\n  " + report[i].describe();
        if (report.size() > 8) msg += "\n  ... (" + std::to_string(report.size() - 8) + " more)";
        throw ValidationError(msg);
    }
    // Accepted within 1e-9: symmetrize, clamp stray negatives, renormalize rows.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                double v = 0.5 * (t.at(i, j, k) + t.at(j, i, k));
                if (v < 0.0) v = 0.0;
                t.at(i, j, k) = v;
                sum += v;
            }
            for (std::size_t k = 0; k < n; ++k) {
                t.at(i, j, k) /= sum;
                t.at(j, i, k) = t.at(i, j, k);
            }
        }
    return t;
}

SkewMatrix SkewMatrix::make(std::size_t n, std::vector<double> entries) {
    if (entries.size() != n * n)
        throw ValidationError("skew matrix has " + std::to_string(entries.size()) +
                              " entries, expected " + std::to_string(n * n));
    SkewMatrix a;
    a.n = n;
    a.a = std::move(entries);
    for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(a.at(k, k)) > 1e-9)
            throw ValidationError("skew matrix diagonal entry (" + std::to_string(k + 1) + "," +
                                  std::to_string(k + 1) + ") is nonzero");
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(a.at(k, i) + a.at(i, k)) > 1e-9)
                throw ValidationError("skew-symmetry violated at (" + std::to_string(k + 1) + "," +
                                      std::to_string(i + 1) + ")");
            if (std::abs(a.at(k, i)) > 1.0 + 1e-9)
                throw ValidationError("|a| > 1 at (" + std::to_string(k + 1) + "," +
                                      std::to_string(i + 1) + ")");
        }
    }
    // Exact symmetrization; clamp the magnitude into [-1, 1].
    for (std::size_t k = 0; k < n; ++k) {
        a.at(k, k) = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) {
            double v = 0.5 * (a.at(k, i) - a.at(i, k));
            v = std::clamp(v, -1.0, 1.0);
            a.at(k, i) = v;
            a.at(i, k) = -v;
        }
    }
    return a;
}

SkewMatrix SkewMatrix::zero(std::size_t n) {
    SkewMatrix a;
    a.n = n;
    a.a.assign(n * n, 0.0);
    return a;
}

std::string Violation::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::Negative:
            os << "negative entry p[" << i + 1 << "][" << j + 1 << "][" << k + 1 << "] = " << magnitude;
            break;
        case Kind::RowSum:
            os << "row (" << i + 1 << "," << j + 1 << ") sums to 1" << (magnitude >= 0 ? "+" : "")
               << magnitude;
            break;
        case Kind::Symmetry:
            os << "asymmetry |p[" << i + 1 << "][" << j + 1 << "][" << k + 1 << "] - p[" << j + 1
               << "][" << i + 1 << "][" << k + 1 << "]| = " << magnitude;
            break;
    }
    return os.str();
}

std::vector<Violation> validate(const HeredityTensor& t) {
    std::vector<Violation> out;
    const std::size_t n = t.n;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                double v = t.at(i, j, k);
                if (v < -1e-12)
                    out.push_back({Violation::Kind::Negative, i, j, k, v});
                sum += v;
                if (j >= i) {
                    double d = std::abs(v - t.at(j, i, k));
                    if (d > 1e-9) out.push_back({Violation::Kind::Symmetry, i, j, k, d});
                }
            }
            if (std::abs(sum - 1.0) > 1e-9)
                out.push_back({Violation::Kind::RowSum, i, j, 0, sum - 1.0});
        }
    return out;
}

std::vector<Cell> admissible_set(const ConfigurationSpace& space, const Cell& s1, const Cell& s2) {
    const std::size_t m = space.components.size();
    if (s1.size() != m || s2.size() != m) throw DimensionMismatch(m, std::min(s1.size(), s2.size()));

    std::vector<std::size_t> diff;  // components where the parents disagree
    for (std::size_t i = 0; i < m; ++i)
        if (s1[i] != s2[i]) diff.push_back(i);

    std::vector<Cell> cells;
    cells.reserve(std::size_t{1} << diff.size());
    Cell c = s1;
    // Every subset of the disagreeing components switched to s2's projection.
    for (std::size_t mask = 0; mask < (std::size_t{1} << diff.size()); ++mask) {
        for (std::size_t b = 0; b < diff.size(); ++b)
            c[diff[b]] = (mask >> b & 1) ? s2[diff[b]] : s1[diff[b]];
        cells.push_back(c);
    }
    return cells;
}

double heredity_coefficient(const ModelSpec& model, const Cell& s1, const Cell& s2,
                            const Cell& sigma) {
    if (!admissible(sigma, s1, s2)) return 0.0;
    // Denominator by direct summation over the admissible set.
    double denom = 0.0;
    for (const Cell& c : admissible_set(model.space, s1, s2)) denom += measure_of(model.measure, c);
    return measure_of(model.measure, sigma) / denom;
}

double product_coefficient(const ConfigurationSpace& space, const ProductMeasure& mu,
                           const Cell& phi, const Cell& psi, const Cell& sigma) {
    (void)space;
    if (!admissible(sigma, phi, psi)) return 0.0;
    double p = 1.0;
    for (std::size_t i = 0; i < sigma.size(); ++i)
        p *= mu.components[i].of(sigma[i]) / component_denominator(mu.components[i], phi[i], psi[i]);
    return p;
}

HeredityTensor materialize(const ModelSpec& model) {
    const std::size_t n = model.space.cell_count;
    if (n > tensor_cap) throw CapExceeded(n, tensor_cap, "tensor materialization");

    auto cells = enumerate_cells(model.space);
    HeredityTensor t;
    t.n = n;
    t.p.assign(n * n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double denom = 0.0;
            auto adm = admissible_set(model.space, cells[i], cells[j]);
            for (const Cell& c : adm) denom += measure_of(model.measure, c);
            for (const Cell& c : adm) {
                std::size_t k = model.space.index_of(c);
                double v = measure_of(model.measure, c) / denom;
                t.at(i, j, k) = v;
                t.at(j, i, k) = v;
            }
        }
    return t;
}

QsoOperator QsoOperator::generated(ModelSpec model) {
    QsoOperator op;
    op.model_ = std::make_shared<const ModelSpec>(std::move(model));
    return op;
}

QsoOperator QsoOperator::explicit_tensor(HeredityTensor t) {
    QsoOperator op;
    op.tensor_ = std::make_shared<const HeredityTensor>(std::move(t));
    return op;
}

std::size_t QsoOperator::dim() const {
    return model_ ? model_->space.cell_count : tensor_->n;
}

const ModelSpec& QsoOperator::model() const {
    if (!model_) throw Error("operator has no generating model");
    return *model_;
}

const HeredityTensor& QsoOperator::tensor() const {
    if (!tensor_) throw Error("operator has no explicit tensor");
    return *tensor_;
}

double QsoOperator::coefficient(std::size_t i, std::size_t j, std::size_t k) const {
    if (tensor_) return tensor_->at(i, j, k);
    const auto& sp = model_->space;
    return heredity_coefficient(*model_, sp.cell_of(i), sp.cell_of(j), sp.cell_of(k));
}

bool is_volterra(const QsoOperator& op) {
    const std::size_t n = op.dim();
    if (!op.is_generated()) {
        const auto& t = op.tensor();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k)
                    if (k != i && k != j && t.at(i, j, k) > kVolterraTol) return false;
        return true;
    }
    // Generated operators: the coefficient of every admissible cell is a
    // positive measure ratio, so it suffices that no pair admits a third cell.
    const auto& model = op.model();
    auto cells = enumerate_cells(model.space);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (const Cell& c : admissible_set(model.space, cells[i], cells[j])) {
                std::size_t k = model.space.index_of(c);
                if (k != i && k != j &&
                    heredity_coefficient(model, cells[i], cells[j], c) > kVolterraTol)
                    return false;
            }
    return true;
}

SkewMatrix volterra_canonical(const QsoOperator& op) {
    if (!is_volterra(op))
        throw NotVolterra("operator violates the Volterra condition; no canonical skew form");
    const std::size_t n = op.dim();
    SkewMatrix a = SkewMatrix::zero(n);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            if (i != k) a.at(k, i) = 2.0 * op.coefficient(i, k, k) - 1.0;
    return a;
}

}  // namespace qso
