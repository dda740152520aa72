#pragma once

// Random instance generators shared by the unit tests and the acceptance runner.

#include <solocp/types.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace solocp::testing {

inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng));
}

/// Variances drawn log-uniformly over [1e-3, 1e3]; tau0 <= tau1.
inline Hyperparameters random_hypers(std::mt19937_64& rng) {
    Hyperparameters h;
    double a = log_uniform(rng, 1e-3, 1e3);
    double b = log_uniform(rng, 1e-3, 1e3);
    if (a > b) std::swap(a, b);
    h.tau0_sq = a;
    h.tau1_sq = b;
    h.tau_sq = log_uniform(rng, 1e-3, 1e3);
    h.q = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    return h;
}

/// Piecewise-constant mean with a few random jumps plus unit-scale noise.
inline std::vector<double> random_values(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> y(n);
    double level = z(rng);
    for (double& v : y) {
        if (u(rng) < 0.15) level += 3.0 * z(rng);
        v = level + z(rng);
    }
    return y;
}

inline double random_sigma(std::mt19937_64& rng) { return log_uniform(rng, 0.2, 5.0); }

inline TimeSeries random_series(std::mt19937_64& rng, std::size_t t) {
    return validate_series(random_values(rng, t), random_sigma(rng));
}

/// M bins with 1..max_count observations each.
inline BinnedSeries random_binned(std::mt19937_64& rng, std::size_t m, std::size_t max_count) {
    std::uniform_int_distribution<std::size_t> count(1, max_count);
    std::vector<std::vector<double>> bins(m);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double level = z(rng);
    for (auto& b : bins) {
        if (u(rng) < 0.15) level += 3.0 * z(rng);
        b.resize(count(rng));
        for (double& v : b) v = level + z(rng);
    }
    return BinnedSeries::from_bins(bins, random_sigma(rng));
}

/// |a - b| <= tol * max(|a|, |b|), with exact equality accepted.
inline bool rel_close(double a, double b, double tol) {
    if (a == b) return true;
    return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

/// Random strictly increasing set drawn from {2..limit}.
inline ChangePointSet random_set(std::mt19937_64& rng, std::size_t max_size, std::size_t limit) {
    std::uniform_int_distribution<std::size_t> size(0, max_size);
    std::uniform_int_distribution<std::size_t> pick(2, limit);
    std::vector<std::size_t> v(size(rng));
    for (auto& x : v) x = pick(rng);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return ChangePointSet(std::move(v));
}

}  // namespace solocp::testing
