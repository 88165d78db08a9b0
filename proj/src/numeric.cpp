#include "hdl/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hdl {

namespace {
constexpr std::size_t kBlock = 64;
}

double pairwise_sum(const double* data, std::size_t n) {
    if (n <= kBlock) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += data[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

double pairwise_dot(const double* a, const double* b, std::size_t n) {
    if (n <= kBlock) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_dot(a, b, half) + pairwise_dot(a + half, b + half, n - half);
}

double double_factorial(int k) {
    double out = 1.0;
    for (int i = k; i >= 2; i -= 2) out *= i;
    return out;
}

double gaussian_central_moment(int k, double variance) {
    if (k < 0) return 0.0;
    if (k == 0) return 1.0;
    if (k % 2 == 1) return 0.0;
    return double_factorial(k - 1) * std::pow(variance, k / 2.0);
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double out = 1.0;
    for (int i = 1; i <= k; ++i) {
        out *= static_cast<double>(n - k + i);
        out /= static_cast<double>(i);
    }
    return out;
}

double median(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size() / 2;
    if (values.size() % 2 == 1) return values[m];
    return 0.5 * (values[m - 1] + values[m]);
}

}  // namespace hdl
