#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qso/model.hpp"

namespace qso {

// Dense cubic tensor of heredity coefficients p[i][j][k]: the probability
// that parental types i, j produce offspring type k. Row-stochastic over k
// and symmetric in (i, j).
struct HeredityTensor {
    std::size_t n = 0;
    std::vector<double> p;  // n^3, layout (i*n + j)*n + k

    double at(std::size_t i, std::size_t j, std::size_t k) const { return p[(i * n + j) * n + k]; }
    double& at(std::size_t i, std::size_t j, std::size_t k) { return p[(i * n + j) * n + k]; }

    // Accepts a user-supplied tensor if nonnegativity, row sums and symmetry
    // hold within 1e-9; symmetrizes and renormalizes rows exactly.
    static HeredityTensor from_raw(std::size_t n, std::vector<double> entries);
};

// Skew-symmetric coefficient matrix of the canonical Volterra form
// x'_k = x_k (1 + sum_i a_{ki} x_i), with |a_{ki}| <= 1 and zero diagonal.
struct SkewMatrix {
    std::size_t n = 0;
    std::vector<double> a;  // n^2, row-major

    double at(std::size_t k, std::size_t i) const { return a[k * n + i]; }
    double& at(std::size_t k, std::size_t i) { return a[k * n + i]; }

    // Validates skew-symmetry, zero diagonal and |a| <= 1 (tolerance 1e-9,
    // then exact symmetrization).
    static SkewMatrix make(std::size_t n, std::vector<double> entries);
    static SkewMatrix zero(std::size_t n);
};

// One violated tensor constraint; validate() reports all of them.
struct Violation {
    enum class Kind { Negative, RowSum, Symmetry };
    Kind kind;
    std::size_t i = 0, j = 0, k = 0;  // k unused for RowSum
    double magnitude = 0.0;           // size of the violation

    std::string describe() const;
};

std::vector<Violation> validate(const HeredityTensor& t);

// Cells agreeing, component by component, with sigma1 or sigma2. This is the
// support of the offspring distribution of the pair: 2^d cells where d is the
// number of components on which the parents differ.
std::vector<Cell> admissible_set(const ConfigurationSpace& space, const Cell& s1, const Cell& s2);

// Heredity coefficient by the defining ratio: mu(sigma) over the admissible
// set's total mass, the denominator evaluated by direct summation.
double heredity_coefficient(const ModelSpec& model, const Cell& s1, const Cell& s2,
                            const Cell& sigma);

// Same coefficient by the closed-form product over components. For the
// component factors the denominator is the mass of the component's admissible
// projection set {phi_i, psi_i} -- which is mu_i(phi_i) when the projections
// coincide, and mu_i(phi_i) + mu_i(psi_i) otherwise. Agreement of this route
// with heredity_coefficient is a tested identity, not an assumption.
double product_coefficient(const ConfigurationSpace& space, const ProductMeasure& mu,
                           const Cell& phi, const Cell& psi, const Cell& sigma);

// Cap for dense materialization (n^3 doubles).
inline constexpr std::size_t tensor_cap = 64;

// Dense tensor of a generated model; n <= tensor_cap.
HeredityTensor materialize(const ModelSpec& model);

// A quadratic stochastic operator: either generated from a model (coefficients
// computed on demand; dynamics never needs the n^3 tensor) or an explicit
// tensor. Immutable; evaluation is pure.
class QsoOperator {
  public:
    static QsoOperator generated(ModelSpec model);
    static QsoOperator explicit_tensor(HeredityTensor t);

    std::size_t dim() const;
    bool is_generated() const { return model_ != nullptr; }
    const ModelSpec& model() const;
    const HeredityTensor& tensor() const;

    // p_{ij,k}, lazily computed for generated operators.
    double coefficient(std::size_t i, std::size_t j, std::size_t k) const;

  private:
    QsoOperator() = default;
    std::shared_ptr<const ModelSpec> model_;
    std::shared_ptr<const HeredityTensor> tensor_;
};

// Volterra test by definition: every coefficient p_{ij,k} with k not in {i,j}
// at most 1e-12. (For generated operators this scans admissible sets pairwise
// rather than materializing.)
bool is_volterra(const QsoOperator& op);

// Canonical skew form a_{ki} = 2 p_{ik,k} - 1; throws NotVolterra otherwise.
SkewMatrix volterra_canonical(const QsoOperator& op);

}  // namespace qso
