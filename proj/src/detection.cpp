#include <solocp/detection.hpp>

#include <solocp/solo_posterior.hpp>

#include <algorithm>
#include <cmath>

namespace solocp {

ChangePointSet threshold_select(std::span<const double> probs, double threshold) {
    std::vector<std::size_t> sites;
    // Site 1 is the baseline level, never a change point.
    for (std::size_t j = 2; j <= probs.size(); ++j) {
        if (probs[j - 1] > threshold) sites.push_back(j);
    }
    return ChangePointSet(std::move(sites));
}

ClusterPartition cluster_partition(const ChangePointSet& candidates, std::size_t delta) {
    ClusterPartition partition;
    for (std::size_t site : candidates) {
        if (partition.groups.empty() || site - partition.groups.back().back() > delta) {
            partition.groups.emplace_back();
        }
        partition.groups.back().push_back(site);
    }
    return partition;
}

ChangePointSet pick_representatives(const ClusterPartition& partition,
                                    std::span<const double> probs,
                                    std::span<const double> tie_scores) {
    if (!tie_scores.empty() && tie_scores.size() != probs.size()) {
        throw Error(ErrorCode::InvalidConfig, "one tie score per site required");
    }
    std::vector<std::size_t> picks;
    picks.reserve(partition.groups.size());
    for (const auto& group : partition.groups) {
        std::size_t best = group.front();
        for (std::size_t site : group) {
            if (site > probs.size()) {
                throw Error(ErrorCode::InvalidChangePoints, "cluster member without a probability");
            }
            const double p = probs[site - 1];
            const double pb = probs[best - 1];
            if (p > pb || (p == pb && !tie_scores.empty() && tie_scores[site - 1] > tie_scores[best - 1])) {
                best = site;
            }
        }
        picks.push_back(best);
    }
    return ChangePointSet(std::move(picks));
}

DetectionResult detect_from_probabilities(std::vector<double> probs, const Hyperparameters& hypers,
                                          std::span<const double> tie_scores) {
    DetectionResult result;
    result.raw_candidates = threshold_select(probs, hypers.threshold);
    result.clusters = cluster_partition(result.raw_candidates, hypers.delta);
    result.selected = pick_representatives(result.clusters, probs, tie_scores);
    result.probabilities = std::move(probs);
    return result;
}

namespace {

DetectionResult detect_sites(const std::vector<PosteriorSiteSummary>& sites, const Hyperparameters& hypers) {
    const std::vector<double> scores = log_bayes_factors(sites);
    return detect_from_probabilities(probabilities_of(sites), hypers, scores);
}

}  // namespace

DetectionResult detect(const TimeSeries& series, const Hyperparameters& hypers) {
    return detect_sites(site_posteriors(series, hypers), hypers);
}

DetectionResult detect(const BinnedSeries& series, const Hyperparameters& hypers) {
    return detect_sites(site_posteriors(series, hypers), hypers);
}

SingleChangePoint single_cp_locate(const TimeSeries& series, const Hyperparameters& hypers,
                                   double edge) {
    if (!(edge > 0.0 && edge < 0.5)) {
        throw Error(ErrorCode::InvalidConfig, "edge fraction must lie in (0, 1/2)");
    }
    const std::size_t t = series.size();
    std::vector<double> mirrored(t);
    for (std::size_t i = 0; i < t; ++i) mirrored[i] = -series[t - 1 - i];
    const TimeSeries reversed = validate_series(std::move(mirrored), series.noise_sd());

    const auto forward = site_posteriors(series, hypers);
    const auto backward = site_posteriors(reversed, hypers);

    const double td = static_cast<double>(t);
    SingleChangePoint best;
    bool found = false;
    // Original site j (first index of the new level) is site T - j + 2 of the mirrored series.
    for (std::size_t j = 2; j <= t; ++j) {
        const double lo = static_cast<double>(std::min(t - j, j));
        if (lo < edge * td) continue;
        const double value = std::abs(forward[j - 1].mu[1] + backward[t - j + 1].mu[1]) / 2.0;
        if (!found || value > best.criterion) {
            best.site = j;
            best.criterion = value;
            found = true;
        }
    }
    if (!found) {
        throw Error(ErrorCode::EmptySearchWindow, "no site satisfies the edge constraint");
    }
    best.low_confidence = best.criterion < 2.0 * series.noise_sd() * std::sqrt(std::log(td) / td);
    return best;
}

}  // namespace solocp
