#pragma once

// Two-block Gibbs sampler for the basad.cp model: Δf | Z jointly, then every
// Z_t | Δf_t independently. Δf is drawn through the level vector f = XΔf,
// whose conditional precision (N + L' D_Z^{-1} L) / σ² is tridiagonal.

#include <solocp/types.hpp>

#include <cstdint>
#include <random>
#include <vector>

namespace solocp::gibbs {

struct GibbsConfig {
    std::size_t iterations = 5000;
    std::size_t burn_in = 1000;
    std::uint64_t seed = 0;
    /// Independent chains, run in parallel and averaged.
    std::size_t chains = 1;

    /// Throws InvalidConfig.
    void validate() const;
};

struct GibbsState {
    std::vector<double> delta_f;
    std::vector<std::uint8_t> z;
    std::mt19937_64 rng;

    GibbsState(std::size_t sites, std::uint64_t seed);
};

/// Draws Δf from its Gaussian full conditional given z. Throws
/// LinearSolveFailure if the banded factorization breaks down.
void sample_deltaf_given_z(GibbsState& state, const BinnedSeries& series,
                           const Hyperparameters& hypers);

/// Draws each Z_t from its Bernoulli full conditional given Δf_t.
void sample_z_given_deltaf(GibbsState& state, double noise_var, const Hyperparameters& hypers);

/// P(Z_t = 1 | Δf_t) for a single increment.
double slab_conditional(double delta_f, double noise_var, const Hyperparameters& hypers) noexcept;

struct GibbsSummary {
    /// Post burn-in mean of z per site; entry 0 is site 1.
    std::vector<double> inclusion;
    /// Per-site Monte Carlo standard error by non-overlapping batch means.
    std::vector<double> mc_standard_error;
    /// Post burn-in visit counts of whole z configurations, keyed by bitmask;
    /// only filled when the series has at most 16 sites.
    std::vector<std::uint64_t> configuration_counts;
    std::size_t kept_draws = 0;
};

GibbsSummary run_gibbs(const BinnedSeries& series, const Hyperparameters& hypers,
                       const GibbsConfig& config);

/// Post burn-in inclusion frequencies with site 1 reported as 0, matching
/// all_inclusion_probabilities.
std::vector<double> gibbs_inclusion_probabilities(const BinnedSeries& series,
                                                  const Hyperparameters& hypers,
                                                  const GibbsConfig& config);
std::vector<double> gibbs_inclusion_probabilities(const TimeSeries& series,
                                                  const Hyperparameters& hypers,
                                                  const GibbsConfig& config);

/// Cholesky factor of a symmetric positive-definite tridiagonal matrix.
struct TridiagonalCholesky {
    std::vector<double> diag;  // R_ii
    std::vector<double> upper; // R_{i,i+1}

    /// Throws LinearSolveFailure when a pivot is not positive.
    static TridiagonalCholesky factor(std::span<const double> diag, std::span<const double> off);
    /// Solves R' R x = b.
    std::vector<double> solve(std::span<const double> b) const;
    /// Solves R x = b.
    std::vector<double> solve_upper(std::span<const double> b) const;
};

}  // namespace solocp::gibbs
