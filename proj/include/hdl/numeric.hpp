#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hdl {

// Pairwise (cascade) summation: blocks of 64 are summed directly, longer
// ranges split in half. Error grows like log(n) instead of n, which keeps
// high-degree moment sums accurate at n = 1e6 without the cost of a fully
// compensated loop.
double pairwise_sum(const double* data, std::size_t n);

inline double pairwise_sum(std::span<const double> v) {
    return pairwise_sum(v.data(), v.size());
}

// Pairwise-summed dot product.
double pairwise_dot(const double* a, const double* b, std::size_t n);

// (k-1)!! for the central moments of a Gaussian; k!! = k(k-2)(k-4)...
double double_factorial(int k);

// E(X^k) for X ~ N(0, variance).
double gaussian_central_moment(int k, double variance);

// Binomial coefficient as double (exact for the small orders used here).
double binomial(int n, int k);

// Median of a list (copies and sorts; average of the two middles for even
// lengths). Empty input returns NaN.
double median(std::vector<double> values);

}  // namespace hdl
