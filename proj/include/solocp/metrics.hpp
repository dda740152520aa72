#pragma once

#include <solocp/types.hpp>

#include <array>
#include <optional>
#include <string>

namespace solocp::metrics {

/// max over b of the distance to the nearest member of a. Throws EmptySet.
double one_sided_hausdorff(const ChangePointSet& a, const ChangePointSet& b);

/// d(est | truth) + d(truth | est). Throws EmptySet.
double hausdorff(const ChangePointSet& est, const ChangePointSet& truth);

/// Proportions of reference points whose nearest neighbour in `other` lies at
/// distance 0, 1, 2 and >= 3. An empty `other` puts everything in the last
/// bucket. Throws EmptySet for an empty reference.
std::array<double, 4> distance_histogram(const ChangePointSet& reference, const ChangePointSet& other);

struct EvalReport {
    /// Series length when exactly one of the two sets is empty; 0 when both are.
    double hausdorff = 0.0;
    /// False when the sentinel was used.
    bool hausdorff_defined = true;
    long k_bias = 0;  // K - K̂
    /// Normalized by K; absent when the truth is empty.
    std::optional<std::array<double, 4>> hist_true;
    /// Normalized by K̂; absent when nothing was detected.
    std::optional<std::array<double, 4>> hist_est;
};

EvalReport evaluate(const ChangePointSet& selected, const ChangePointSet& truth,
                    std::size_t series_length);

/// Running means over replications. Histograms are averaged over the
/// replications where they are defined.
struct Aggregate {
    std::size_t replications = 0;
    std::array<double, 4> hist_true{};
    std::size_t hist_true_n = 0;
    std::array<double, 4> hist_est{};
    std::size_t hist_est_n = 0;
    double k_bias = 0.0;
    double hausdorff = 0.0;
    double seconds = 0.0;
    std::size_t sentinel_hits = 0;

    void add(const EvalReport& report, double seconds_taken);
    /// Means; call once after all add()s.
    Aggregate finalized() const;
};

/// Column header and row of the result tables:
/// true_0,true_1,true_2,true_ge3,est_0,est_1,est_2,est_ge3,k_bias,hausdorff,time_s
std::string csv_header();
std::string csv_row(const Aggregate& mean, bool with_time = true);

}  // namespace solocp::metrics
