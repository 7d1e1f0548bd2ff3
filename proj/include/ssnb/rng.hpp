#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace ssnb {

// splitmix64 finalizer, used to derive independent seeds per stream.
inline uint64_t mix_seed(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t mix_seed(uint64_t a, uint64_t b) { return mix_seed(mix_seed(a) ^ b); }
inline uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c) { return mix_seed(mix_seed(a, b) ^ c); }

// Deterministic random source: mt19937_64 (bit-exact per the standard) plus
// hand-rolled samplers, since std:: distributions differ across library
// implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform integer in [0, n), n > 0. Rejection on the top range keeps the
    // draw unbiased.
    uint64_t below(uint64_t n) {
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // Uniform in [0, 1) with 53 random bits.
    double real01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (size_t i = items.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    // Knuth's product method; means above 30 are halved recursively so the
    // exp() never underflows.
    int poisson(double mean) {
        if (mean <= 0.0) return 0;
        int total = 0;
        while (mean > 30.0) {
            double half = mean / 2.0;
            total += poisson_small(half);
            mean -= half;
        }
        return total + poisson_small(mean);
    }

    // Polar (Marsaglia) method.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * real01() - 1.0;
            v = 2.0 * real01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double scale = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * scale;
        have_spare_ = true;
        return u * scale;
    }

    // Marsaglia-Tsang; shapes below 1 use the boost G(a) = G(a+1) * U^(1/a).
    double gamma(double shape) {
        if (shape < 1.0) {
            double g = gamma(shape + 1.0);
            double u = real01();
            while (u == 0.0) u = real01();
            return g * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            double u = real01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    // Symmetric Dirichlet draw of the given size.
    std::vector<double> dirichlet(size_t size, double concentration) {
        std::vector<double> draw(size);
        double sum = 0.0;
        for (double& g : draw) {
            g = gamma(concentration);
            sum += g;
        }
        if (sum <= 0.0) {
            // All-zero underflow; fall back to uniform.
            for (double& g : draw) g = 1.0 / static_cast<double>(size);
            return draw;
        }
        for (double& g : draw) g /= sum;
        return draw;
    }

private:
    int poisson_small(double mean) {
        const double threshold = std::exp(-mean);
        int k = 0;
        double product = 1.0;
        for (;;) {
            product *= real01();
            if (product <= threshold) return k;
            ++k;
        }
    }

    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace ssnb
