#pragma once

// Dense reference computations for the spike-and-slab change point models.
// Everything is built from the full design matrix X (one row per observation,
// X[r, s] = 1 when the observation's bin index >= s) and the marginal
// covariance σ²(I + X D X'), so none of it shares code with the recursions.

#include <solocp/types.hpp>

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace solocp::oracle {

inline constexpr std::size_t kDefaultSiteCap = 200;
inline constexpr std::size_t kJointCap = 20;

struct OracleResult {
    std::size_t site = 0;
    std::array<double, 2> mu{};
    std::array<double, 2> xi{};
    std::array<double, 2> log_marginal{};
    double inclusion_prob = 0.0;
};

/// Exact per-site posterior under the solo.cp model for site j (1-based).
/// For j >= 2 the baseline level has a flat prior, so log_marginal is defined
/// up to a constant shared by both k.
/// Throws SingularCovariance, or InvalidConfig when the total observation
/// count exceeds `cap`.
OracleResult oracle_site_posterior(const BinnedSeries& series, std::size_t site,
                                   const Hyperparameters& hypers,
                                   std::size_t cap = kDefaultSiteCap);
OracleResult oracle_site_posterior(const TimeSeries& series, std::size_t site,
                                   const Hyperparameters& hypers,
                                   std::size_t cap = kDefaultSiteCap);

/// log N(Y; 0, σ²(I + X D_z X')) with D_z = diag(τ²_{z_t}) under the basad.cp model.
double oracle_joint_marginal(const BinnedSeries& series, std::span<const std::uint8_t> z,
                             const Hyperparameters& hypers);

/// Exact P(Z | Y) over all 2^M configurations, keyed by bitmask (bit t = site t + 1).
/// Requires M <= 16.
std::vector<double> enumerate_z_posterior(const BinnedSeries& series, const Hyperparameters& hypers);

/// Exact marginal P(Z_j = 1 | Y) for every site, by enumeration.
std::vector<double> enumerate_inclusion(const BinnedSeries& series, const Hyperparameters& hypers);

}  // namespace solocp::oracle
