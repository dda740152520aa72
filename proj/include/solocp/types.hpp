#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace solocp {

enum class ErrorCode {
    NonFiniteValue,
    TooShort,
    NonPositiveSigma,
    InvalidHyperparameters,
    InvalidChangePoints,
    NumericOverflow,
    EmptySearchWindow,
    LinearSolveFailure,
    InvalidConfig,
    SingularCovariance,
    UnknownSignal,
    InvalidSignal,
    InvalidNoise,
    InvalidBlockCount,
    EmptySet,
    IoError,
    ParseError,
};

std::string_view error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Observations y_1..y_T with one sample per time index and a known noise sd.
class TimeSeries {
public:
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double noise_sd() const noexcept { return noise_sd_; }
    double noise_var() const noexcept { return noise_sd_ * noise_sd_; }

    TimeSeries with_noise_sd(double sd) const;

private:
    friend TimeSeries validate_series(std::vector<double> values, double noise_sd);
    TimeSeries(std::vector<double> values, double noise_sd)
        : values_(std::move(values)), noise_sd_(noise_sd) {}

    std::vector<double> values_;
    double noise_sd_;
};

/// Throws NonFiniteValue, TooShort (T < 2) or NonPositiveSigma.
TimeSeries validate_series(std::vector<double> values, double noise_sd);

/// M groups of observations; group t holds n_t >= 1 samples.
///
/// Each group carries an integer position label (its grid index or bin id)
/// so that results computed on group indices can be reported in the caller's
/// coordinates. Positions default to 1..M and are strictly increasing.
class BinnedSeries {
public:
    static BinnedSeries from_bins(const std::vector<std::vector<double>>& bins, double noise_sd,
                                  std::vector<std::size_t> positions = {});
    static BinnedSeries from_series(const TimeSeries& series);

    std::size_t num_bins() const noexcept { return counts_.size(); }
    std::size_t total_count() const noexcept { return values_.size(); }
    double noise_sd() const noexcept { return noise_sd_; }
    double noise_var() const noexcept { return noise_sd_ * noise_sd_; }

    std::span<const std::size_t> counts() const noexcept { return counts_; }
    std::span<const double> sums() const noexcept { return sums_; }
    std::span<const std::size_t> positions() const noexcept { return positions_; }
    /// All observations in bin order.
    std::span<const double> values() const noexcept { return values_; }
    std::span<const double> bin(std::size_t t) const;

    bool unit_counts() const noexcept { return values_.size() == counts_.size(); }
    /// Requires unit_counts().
    TimeSeries to_series() const;
    BinnedSeries with_noise_sd(double sd) const;

private:
    BinnedSeries() = default;

    std::vector<double> values_;
    std::vector<std::size_t> offsets_;  // size M + 1
    std::vector<std::size_t> counts_;
    std::vector<double> sums_;
    std::vector<std::size_t> positions_;
    double noise_sd_ = 1.0;
};

struct Hyperparameters {
    double tau0_sq = 0.0;  // spike variance (relative to sigma^2)
    double tau1_sq = 0.0;  // slab variance
    double tau_sq = 0.0;   // shared shrinkage variance for the non-tested increments
    double q = 0.1;        // prior inclusion probability
    double threshold = 0.5;
    std::size_t delta = 2;  // cluster radius

    /// Throws InvalidHyperparameters.
    void validate() const;

    /// solo.cp defaults keyed on the number of sites: tau0^2 = 1/M, tau1^2 = M,
    /// q = 0.1 and (tau^2, delta) = (2/sqrt(M), 5) when M > 500, else (2/M, 2).
    static Hyperparameters solo_defaults(std::size_t sites);
    /// basad.cp defaults: tau0^2 = 1/(10 M), tau1^2 = log M, q = 0.1.
    static Hyperparameters basad_defaults(std::size_t sites);
};

/// Per-site posterior summary of the solo.cp model. Index 0 is the spike,
/// index 1 the slab. Weights are kept as logarithms.
struct PosteriorSiteSummary {
    std::size_t site = 0;  // 1-based
    std::array<double, 2> mu{};
    std::array<double, 2> xi{};
    std::array<double, 2> log_omega{};
    double inclusion_prob = 0.0;
};

/// q w1 / (q w1 + (1 - q) w0) evaluated from log-weights.
double inclusion_from_log_weights(double q, double log_w0, double log_w1) noexcept;

/// Strictly increasing set of change point locations (first index of a new segment).
class ChangePointSet {
public:
    ChangePointSet() = default;
    /// Throws InvalidChangePoints unless strictly increasing with every entry >= 2.
    explicit ChangePointSet(std::vector<std::size_t> locations);

    std::size_t count() const noexcept { return locations_.size(); }
    bool empty() const noexcept { return locations_.empty(); }
    std::span<const std::size_t> locations() const noexcept { return locations_; }
    std::size_t operator[](std::size_t i) const { return locations_[i]; }

    auto begin() const noexcept { return locations_.begin(); }
    auto end() const noexcept { return locations_.end(); }

    friend bool operator==(const ChangePointSet&, const ChangePointSet&) = default;

private:
    std::vector<std::size_t> locations_;
};

struct ClusterPartition {
    std::vector<std::vector<std::size_t>> groups;
};

struct DetectionResult {
    ChangePointSet raw_candidates;
    ClusterPartition clusters;
    ChangePointSet selected;
    /// probabilities[j - 1] is P(Z_j = 1 | Y); site 1 is the baseline and reported as 0.
    std::vector<double> probabilities;
};

/// Maps site indices of a binned series to its position labels.
ChangePointSet to_positions(const ChangePointSet& sites, const BinnedSeries& series);

}  // namespace solocp
