#pragma once
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>
#include <Eigen/Dense>

namespace bglmb {

/// Deterministic random source. Every stochastic operation in the toolkit
/// takes one of these explicitly; draws never go through hidden globals, so
/// a run is reproducible from its seed alone. The gaussian/poisson draws are
/// hand-rolled on top of mt19937_64 to keep streams identical across
/// standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard normal (Marsaglia polar).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    Eigen::VectorXd normal_vec(int n) {
        Eigen::VectorXd out(n);
        for (int i = 0; i < n; ++i) out(i) = normal();
        return out;
    }

    /// Poisson draw, Knuth product method. Rates above 500 are split into
    /// independent chunks so exp(-rate) stays far from underflow.
    int poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        int n = 0;
        while (lambda > 500.0) {
            n += poisson(500.0);
            lambda -= 500.0;
        }
        const double limit = std::exp(-lambda);
        double prod = uniform();
        while (prod > limit) {
            ++n;
            prod *= uniform();
        }
        return n;
    }

    /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t integer(std::uint64_t n) {
        const std::uint64_t lim = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= lim);
        return x % n;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[integer(i)]);
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace bglmb
