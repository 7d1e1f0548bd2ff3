#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace ssnb {

// log(sum_i exp(x[i])), shifted by the max so nothing overflows.
inline double log_sum_exp(std::span<const double> xs) {
    if (xs.empty()) return -std::numeric_limits<double>::infinity();
    double max_x = *std::max_element(xs.begin(), xs.end());
    if (!std::isfinite(max_x)) return max_x;
    double sum = 0.0;
    for (double x : xs) sum += std::exp(x - max_x);
    return max_x + std::log(sum);
}

// Kahan compensated accumulator. The EM trace monotonicity check works at
// 1e-9 on sums of thousands of terms, which plain summation noise can reach.
class KahanSum {
public:
    void add(double x) {
        double y = x - compensation_;
        double t = sum_ + y;
        compensation_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

// Median; sorts a copy. Even sizes average the middle pair.
inline double median(std::vector<double> xs) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(xs.begin(), xs.end());
    size_t mid = xs.size() / 2;
    if (xs.size() % 2 == 1) return xs[mid];
    return 0.5 * (xs[mid - 1] + xs[mid]);
}

// Shortest round-trip decimal form, byte-stable across runs.
inline std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

}  // namespace ssnb
