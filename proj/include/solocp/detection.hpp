#pragma once

#include <solocp/types.hpp>

#include <span>

namespace solocp {

/// Sites whose probability is strictly above the threshold. probs[j - 1] is site j.
ChangePointSet threshold_select(std::span<const double> probs, double threshold);

/// Splits the sorted candidates wherever consecutive members are more than
/// delta apart (connected components of the |a - b| <= delta graph).
ClusterPartition cluster_partition(const ChangePointSet& candidates, std::size_t delta);

/// Highest-probability member of each group. Equal probabilities are
/// resolved by `tie_scores` when given (a finer, monotone ranking such as log
/// Bayes factors; probabilities near 1 round to exactly 1.0), then by the
/// smallest site.
ChangePointSet pick_representatives(const ClusterPartition& partition,
                                    std::span<const double> probs,
                                    std::span<const double> tie_scores = {});

/// Thresholding, clustering and representative selection on precomputed probabilities.
DetectionResult detect_from_probabilities(std::vector<double> probs, const Hyperparameters& hypers,
                                          std::span<const double> tie_scores = {});

/// solo.cp end to end.
DetectionResult detect(const TimeSeries& series, const Hyperparameters& hypers);
DetectionResult detect(const BinnedSeries& series, const Hyperparameters& hypers);

struct SingleChangePoint {
    std::size_t site = 0;
    /// |μ_{1,j} + μ'_{1,T-j+2}| / 2 at the selected site.
    double criterion = 0.0;
    /// criterion below 2σ sqrt(log T / T); no change point is likely present.
    bool low_confidence = false;
};

/// Single change point locator built from the slab posterior means of the
/// series and of its reversed, negated copy, restricted to sites with
/// min(T - j, j) >= edge * T. Throws EmptySearchWindow.
SingleChangePoint single_cp_locate(const TimeSeries& series, const Hyperparameters& hypers,
                                   double edge);

}  // namespace solocp
