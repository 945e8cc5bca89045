#pragma once

#include <cstddef>
#include <vector>

#include "qso/dynamics.hpp"
#include "qso/model.hpp"

namespace qso {

// Marginal distribution of one component: X_{i,w} = sum of lambda over all
// cells whose component-i configuration is w.
struct Marginal {
    int component = 0;       // 1-based
    std::vector<double> x;   // over that component's configurations, sums to 1
};

Marginal marginalize(const ConfigurationSpace& space, const SimplexPoint& lambda, int component);
std::vector<Marginal> marginalize_all(const ConfigurationSpace& space, const SimplexPoint& lambda);

// One independent Volterra operator per component, with entries
// a_{w,v} = (mu_i(w) - mu_i(v)) / (mu_i(w) + mu_i(v)).
struct ReducedComponent {
    int component = 0;
    SkewMatrix a;
    std::vector<double> mu;  // the component measure the entries came from
};

struct ReducedSystem {
    std::vector<ReducedComponent> components;
    std::size_t size() const { return components.size(); }
};

// The reduction of a product-measure model to independent per-component
// Volterra operators. Built directly from the component measures;
// the full tensor is never formed.
ReducedSystem reduce(const ModelSpec& model);

// Advances every marginal one step by its component's Volterra operator
// (the multiplicative canonical form).
std::vector<Marginal> reduced_step(const ReducedSystem& sys, const std::vector<Marginal>& xs);

// Same step written as the expanded quadratic form
// X'_w = X_w (X_w + sum_{v != w} 2 mu(w)/(mu(w)+mu(v)) X_v).
// Kept as an independent route: agreement with reduced_step (they differ by
// the sum-to-one identity) is a tested property.
std::vector<Marginal> reduced_step_expanded(const ReducedSystem& sys,
                                            const std::vector<Marginal>& xs);

// The commutation defect between "apply the full operator, then marginalize"
// and "marginalize, then apply the reduced operators": max over components
// and configurations of the absolute difference. The reduction contract is
// that this is <= 1e-12 for every product-measure model.
double commutation_residual(const ModelSpec& model, const SimplexPoint& lambda);

struct Reconstruction {
    SimplexPoint product_solution;  // outer product of the marginals
    std::size_t affine_dim = 0;     // dimension of the full solution set
    bool unique = false;            // nonnegativity + zeros pin one solution
};

// Recovers full states compatible with given limit marginals. The product
// solution always satisfies the marginal constraints; the affine dimension of
// the whole solution set is computed by rank (zero marginals force cells to
// zero first). Throws InconsistentMarginals if the product solution fails the
// constraints (defensive; cannot occur for valid marginals).
Reconstruction reconstruct(const ConfigurationSpace& space, const std::vector<Marginal>& limits);

// True iff lambda equals the outer product of its own marginals within tol.
bool is_product_form(const ConfigurationSpace& space, const SimplexPoint& lambda, double tol);

}  // namespace qso
