#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "fleetsense/summation.hpp"
#include "fleetsense/visit_model.hpp"

namespace fleetsense {

// x * log2(x) with the 0 * log2(0) = 0 convention. std::log2 is exact for
// powers of two, which keeps uniform-distribution entropies exact.
inline double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

namespace detail {
template <typename D>
double entropy_bits(const Eigen::ArrayBase<D>& p) {
    return -pairwise_sum(p.derived().unaryExpr([](double x) { return xlog2x(x); }));
}
} // namespace detail

// H(v) = -sum pi log2 pi over the trajectory distribution (Shannon, bits).
// All-zero (degenerate) layers yield 0.
template <typename D>
double trajectory_entropy(const Eigen::ArrayBase<D>& pi) {
    return detail::entropy_bits(pi);
}

inline double trajectory_entropy(const SparseLayers& pi, int v) {
    std::vector<double> terms;
    for (SparseLayers::InnerIterator it(pi, v); it; ++it) terms.push_back(xlog2x(it.value()));
    return -pairwise_sum(terms);
}

// H(u|S) = -sum p~ log2 p~ applied directly to the effective coverage layer
// (no renormalization); zero exactly when every entry is 0 or 1.
template <typename D>
double effective_entropy(const Eigen::ArrayBase<D>& p_tilde) {
    return detail::entropy_bits(p_tilde);
}

// effective entropy of candidate v against the current coverage, computed
// over the candidate's support only (p~ is 0 off-support)
inline double effective_entropy(const SparseLayers& q, int v, const Layer& P, const Layer& w) {
    std::vector<double> terms;
    for (SparseLayers::InnerIterator it(q, v); it; ++it) {
        const Eigen::Index s = it.row();
        terms.push_back(xlog2x(it.value() * (1.0 - P[s]) * w[s]));
    }
    return -pairwise_sum(terms);
}

} // namespace fleetsense
