#pragma once

// Closed-form marginal posteriors of the solo.cp model.
//
// For a candidate site j >= 2, every increment other than Δf_j carries a
// N(0, σ²τ²) prior, the baseline level f_1 = Δf_1 a flat prior, and Δf_j a
// spike-and-slab N(0, σ²τ_k²) prior. (For j = 1 the baseline itself is the
// tested increment.) The flat baseline makes every site j >= 2 invariant to
// adding a constant to the data. The tail
// increments Δf_M, ..., Δf_{j+1} are integrated out first (tail pass, shared
// by all sites), then Δf_1, ..., Δf_{j-1} from the front (inner pass, one per
// site). What is left is a one-dimensional Gaussian likelihood for Δf_j.
//
// Notation used below, for site index i (1-based):
//   N_i  = Σ_{k>=i} n_k              tail observation count
//   S_i  = Σ_{k>=i} Σ y              tail observation sum
//   P_i  = Σ_{k>=i} n'_k             shrinkage mass removed by the tail pass
//   A_i^j = N_i - P_{j+1}             effective count seen by the inner pass

#include <solocp/types.hpp>

#include <vector>

namespace solocp {

/// Site-independent quantities of the tail pass. Vectors are indexed by
/// site - 1; the prefix vectors shrink_mass / shrink_sum have one extra
/// trailing zero so that entry M holds P_{M+1} = 0.
struct ForwardCache {
    std::vector<double> tail_count;  // N_i
    std::vector<double> tail_sum;    // S_i
    std::vector<double> n_prime;     // n'_i, entry 0 unused (= 0)
    std::vector<double> ybar_prime;  // ȳ'_i, entry 0 unused (= 0)
    std::vector<double> shrink_mass; // P_i
    std::vector<double> shrink_sum;  // Q_i = Σ_{k>=i} n'_k ȳ'_k
    double tau_sq = 0.0;

    std::size_t sites() const noexcept { return tail_count.size(); }
};

/// Per-site quantities of the inner pass, entries for i = 1..j.
struct InnerCache {
    std::size_t site = 0;
    std::vector<double> n_dprime;
    std::vector<double> ybar_dprime;
    std::vector<double> gamma;
    /// A_j^j γ_j: data precision (in units of 1/σ²) left on Δf_j.
    double precision = 0.0;
};

/// Tail pass for one-observation-per-index data.
ForwardCache forward_pass(const TimeSeries& series, const Hyperparameters& hypers);
/// Tail pass for binned data.
ForwardCache forward_pass(const BinnedSeries& series, const Hyperparameters& hypers);

InnerCache inner_pass(const ForwardCache& fwd, std::size_t site);

PosteriorSiteSummary site_posterior(const InnerCache& inner, double noise_var,
                                    const Hyperparameters& hypers);

/// Posterior summaries for every site 1..M. Sites are computed in parallel
/// with OpenMP; each site is a pure function of the forward cache so the
/// result does not depend on the schedule.
std::vector<PosteriorSiteSummary> site_posteriors(const BinnedSeries& series,
                                                  const Hyperparameters& hypers);
std::vector<PosteriorSiteSummary> site_posteriors(const TimeSeries& series,
                                                  const Hyperparameters& hypers);

/// Inclusion probabilities with site 1 (the baseline level) reported as 0.
std::vector<double> probabilities_of(const std::vector<PosteriorSiteSummary>& sites);
/// log ω₁ − log ω₀ per site. Monotone in the inclusion probability but does
/// not saturate, so it still ranks sites whose probabilities round to 1.
std::vector<double> log_bayes_factors(const std::vector<PosteriorSiteSummary>& sites);

std::vector<double> all_inclusion_probabilities(const BinnedSeries& series,
                                                const Hyperparameters& hypers);
std::vector<double> all_inclusion_probabilities(const TimeSeries& series,
                                                const Hyperparameters& hypers);

namespace reference {

/// Single-threaded loop over sites; kept for testing the parallel kernel.
std::vector<PosteriorSiteSummary> site_posteriors_serial(const BinnedSeries& series,
                                                         const Hyperparameters& hypers);
std::vector<PosteriorSiteSummary> site_posteriors_serial(const TimeSeries& series,
                                                         const Hyperparameters& hypers);

}  // namespace reference

}  // namespace solocp
