#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fleetsense/errors.hpp"
#include "fleetsense/summation.hpp"
#include "fleetsense/visit_model.hpp"

namespace fleetsense {

// Above this fleet size the from-scratch coverage product switches to
// exp(sum(log1p(-q))) to avoid underflow of long products.
inline constexpr std::size_t kLogSpaceFleetThreshold = 32;

// Coverage of the fleet so far, updated one accepted candidate at a time.
struct CoverageState {
    Layer P;                   // P_{g,t}(S); identically 0 for the empty fleet
    std::vector<int> selected; // vehicle indices in pick order
    double utility_value = 0.0;

    static CoverageState empty(Index layer_size) {
        CoverageState s;
        s.P = Layer::Zero(layer_size);
        return s;
    }
};

namespace detail {
inline void check_same_size(Index a, Index b, const char* what) {
    if (a != b)
        throw DimensionError(std::string(what) + ": layer sizes differ (" + std::to_string(a) +
                             " vs " + std::to_string(b) + ")");
}
} // namespace detail

// P = 1 - prod_v (1 - q_v), elementwise. The probability that at least one
// fleet member covers each cell, assuming independent visits.
inline Layer coverage_probability(std::span<const Layer> q_layers, Index layer_size) {
    for (const auto& q : q_layers) {
        detail::check_same_size(q.size(), layer_size, "coverage_probability");
        if ((q < 0.0).any() || (q > 1.0).any())
            throw ValidationError("coverage_probability: layer entry outside [0, 1]");
    }
    if (q_layers.size() <= kLogSpaceFleetThreshold) {
        Layer one_minus = Layer::Ones(layer_size);
        for (const auto& q : q_layers) one_minus *= (1.0 - q);
        return 1.0 - one_minus;
    }
    // log-space: log1p(-1) = -inf makes q = 1 absorbing exactly
    Layer log_sum = Layer::Zero(layer_size);
    for (const auto& q : q_layers) log_sum += (-q).log1p();
    return log_sum.unaryExpr([](double l) { return -std::expm1(l); });
}

// sparse-column variant over an explicit member set
inline Layer coverage_probability(const SparseLayers& q, std::span<const int> members,
                                  Index layer_size) {
    detail::check_same_size(q.rows(), layer_size, "coverage_probability");
    if (members.size() <= kLogSpaceFleetThreshold) {
        Layer one_minus = Layer::Ones(layer_size);
        for (int v : members)
            for (SparseLayers::InnerIterator it(q, v); it; ++it)
                one_minus[it.row()] *= (1.0 - it.value());
        return 1.0 - one_minus;
    }
    Layer log_sum = Layer::Zero(layer_size);
    for (int v : members)
        for (SparseLayers::InnerIterator it(q, v); it; ++it)
            log_sum[it.row()] += std::log1p(-it.value());
    Layer P(layer_size);
    for (Index i = 0; i < layer_size; ++i) P[i] = -std::expm1(log_sum[i]);
    return P;
}

// f(S) = sum_{g,t} w * P, accumulated pairwise
template <typename D1, typename D2>
double sensing_utility(const Eigen::ArrayBase<D1>& P, const Eigen::ArrayBase<D2>& w) {
    detail::check_same_size(P.size(), w.size(), "sensing_utility");
    return pairwise_sum(w.derived() * P.derived());
}

// P' = 1 - (1 - P)(1 - q_u). The (q == 0) branch keeps untouched cells
// bit-identical so adding an empty candidate is an exact no-op.
template <typename D1, typename D2>
Layer incremental_coverage(const Eigen::ArrayBase<D1>& P, const Eigen::ArrayBase<D2>& q_u) {
    detail::check_same_size(P.size(), q_u.size(), "incremental_coverage");
    return (q_u.derived() == 0.0)
        .select(P.derived(), 1.0 - (1.0 - P.derived()) * (1.0 - q_u.derived()));
}

inline void incremental_coverage_inplace(Layer& P, const SparseLayers& q, int v) {
    detail::check_same_size(P.size(), q.rows(), "incremental_coverage");
    for (SparseLayers::InnerIterator it(q, v); it; ++it) {
        const Index s = it.row();
        P[s] = 1.0 - (1.0 - P[s]) * (1.0 - it.value());
    }
}

// Delta_u = sum w * (P' - P) = sum w * (1 - P) * q_u, the stable form
template <typename D1, typename D2, typename D3>
double marginal_gain(const Eigen::ArrayBase<D1>& P, const Eigen::ArrayBase<D2>& q_u,
                     const Eigen::ArrayBase<D3>& w) {
    detail::check_same_size(P.size(), q_u.size(), "marginal_gain");
    detail::check_same_size(P.size(), w.size(), "marginal_gain");
    return pairwise_sum(w.derived() * (1.0 - P.derived()) * q_u.derived());
}

inline double marginal_gain(const Layer& P, const SparseLayers& q, int v, const Layer& w) {
    detail::check_same_size(P.size(), q.rows(), "marginal_gain");
    detail::check_same_size(P.size(), w.size(), "marginal_gain");
    std::vector<double> terms;
    for (SparseLayers::InnerIterator it(q, v); it; ++it) {
        const Index s = it.row();
        terms.push_back(w[s] * (1.0 - P[s]) * it.value());
    }
    return pairwise_sum(terms);
}

// p~ = q_u * (1 - P) * w  (effective coverage of a candidate given S)
template <typename D1, typename D2, typename D3>
Layer effective_coverage(const Eigen::ArrayBase<D1>& q_u, const Eigen::ArrayBase<D2>& P,
                         const Eigen::ArrayBase<D3>& w) {
    detail::check_same_size(q_u.size(), P.size(), "effective_coverage");
    detail::check_same_size(q_u.size(), w.size(), "effective_coverage");
    return q_u.derived() * (1.0 - P.derived()) * w.derived();
}

} // namespace fleetsense
