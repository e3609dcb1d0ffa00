#pragma once

// Test-only reference computations. Nothing here calls into the engine's
// numerical paths; they exist to check those paths independently.

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

#include "sdsem/model.hpp"

namespace sdsem::testing {

inline constexpr double kLogisticRate = 0.10;
inline constexpr double kLogisticCapacity = 200.0 / 3.0;

/// Closed-form logistic x(t) = K / (1 + (K/x0 - 1) e^{-r t}).
inline double logistic(double x0, double r, double capacity, double t) {
    return capacity / (1.0 + (capacity / x0 - 1.0) * std::exp(-r * t));
}

/// Plain Gaussian elimination with partial pivoting on a copy.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (a[pivot][col] == 0.0) throw std::runtime_error("singular");
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
        x[i] = s / a[i][i];
    }
    return x;
}

/// Linear static system (exponents in {0,1}, no interactions, no disturbances)
/// solved as (I - L) y = c by elimination, straight from the spec's matrices.
inline std::vector<double> linear_static_oracle(const ModelSpec& spec, const std::vector<double>& x) {
    const std::size_t n = spec.dims.n;
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    std::vector<double> c(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        a[i][i] = 1.0;
        for (std::size_t j = 0; j < spec.dims.m; ++j) {
            const double b = spec.statics.B2(i, j);
            if (b == 0.0) continue;
            c[i] += spec.statics.Gamma2(i, j) == 0.0 ? b : b * x[j];
        }
        for (std::size_t j = 0; j < n; ++j) {
            const double b = spec.statics.B3(i, j);
            if (b == 0.0) continue;
            if (spec.statics.Gamma3(i, j) == 0.0) {
                c[i] += b;
            } else {
                a[i][j] -= b;
            }
        }
    }
    return gauss_solve(std::move(a), std::move(c));
}

/// Unbiased (divisor N - 1) covariance of two sample vectors.
inline double sample_cov(const std::vector<double>& a, const std::vector<double>& b) {
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(a.size());
    mb /= static_cast<double>(b.size());
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
    return s / static_cast<double>(a.size() - 1);
}

}  // namespace sdsem::testing
