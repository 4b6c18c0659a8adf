#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <vector>

namespace fleetsense {

// Pairwise (tree) summation. Keeps rounding drift O(log n) so the 1e-9
// equivalence tolerances used throughout hold even for ~1e5-cell layers.
inline double pairwise_sum(const double* x, std::ptrdiff_t n) {
    if (n <= 32) {
        double s = 0.0;
        for (std::ptrdiff_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::ptrdiff_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(v.data(), static_cast<std::ptrdiff_t>(v.size()));
}

template <typename Derived>
double pairwise_sum(const Eigen::ArrayBase<Derived>& expr) {
    const Eigen::ArrayXd tmp = expr;
    return pairwise_sum(tmp.data(), tmp.size());
}

} // namespace fleetsense
