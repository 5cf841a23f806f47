#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace nnscore {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(sum_i exp(v[i])) with max-subtraction. Empty input yields -inf.
inline double log_sum_exp(std::span<const double> values) {
    double max_val = kNegInf;
    for (double v : values) max_val = std::max(max_val, v);
    if (!std::isfinite(max_val)) return max_val;
    double sum = 0.0;
    for (double v : values) sum += std::exp(v - max_val);
    return max_val + std::log(sum);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

inline double distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

}  // namespace nnscore
