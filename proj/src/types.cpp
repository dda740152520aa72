#include <solocp/types.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace solocp {

std::string_view error_name(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::NonPositiveSigma: return "NonPositiveSigma";
    case ErrorCode::InvalidHyperparameters: return "InvalidHyperparameters";
    case ErrorCode::InvalidChangePoints: return "InvalidChangePoints";
    case ErrorCode::NumericOverflow: return "NumericOverflow";
    case ErrorCode::EmptySearchWindow: return "EmptySearchWindow";
    case ErrorCode::LinearSolveFailure: return "LinearSolveFailure";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::UnknownSignal: return "UnknownSignal";
    case ErrorCode::InvalidSignal: return "InvalidSignal";
    case ErrorCode::InvalidNoise: return "InvalidNoise";
    case ErrorCode::InvalidBlockCount: return "InvalidBlockCount";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

namespace {

void check_sigma(double sd) {
    if (!std::isfinite(sd) || sd <= 0.0) {
        throw Error(ErrorCode::NonPositiveSigma, "noise sd must be finite and > 0");
    }
}

}  // namespace

TimeSeries validate_series(std::vector<double> values, double noise_sd) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw Error(ErrorCode::NonFiniteValue,
                        "observation " + std::to_string(i + 1) + " is not finite");
        }
    }
    if (values.size() < 2) {
        throw Error(ErrorCode::TooShort, "need at least 2 observations");
    }
    check_sigma(noise_sd);
    return TimeSeries(std::move(values), noise_sd);
}

TimeSeries TimeSeries::with_noise_sd(double sd) const {
    check_sigma(sd);
    return TimeSeries(values_, sd);
}

BinnedSeries BinnedSeries::from_bins(const std::vector<std::vector<double>>& bins,
                                     double noise_sd, std::vector<std::size_t> positions) {
    if (bins.size() < 2) {
        throw Error(ErrorCode::TooShort, "need at least 2 bins");
    }
    check_sigma(noise_sd);
    if (positions.empty()) {
        positions.resize(bins.size());
        for (std::size_t t = 0; t < bins.size(); ++t) positions[t] = t + 1;
    }
    if (positions.size() != bins.size()) {
        throw Error(ErrorCode::InvalidConfig, "one position label per bin required");
    }
    for (std::size_t t = 0; t < positions.size(); ++t) {
        if (positions[t] < 1 || (t > 0 && positions[t] <= positions[t - 1])) {
            throw Error(ErrorCode::InvalidConfig, "bin positions must be >= 1 and strictly increasing");
        }
    }

    BinnedSeries out;
    out.noise_sd_ = noise_sd;
    out.positions_ = std::move(positions);
    out.offsets_.reserve(bins.size() + 1);
    out.offsets_.push_back(0);
    for (std::size_t t = 0; t < bins.size(); ++t) {
        if (bins[t].empty()) {
            throw Error(ErrorCode::TooShort, "bin " + std::to_string(t + 1) + " is empty");
        }
        double sum = 0.0;
        for (double y : bins[t]) {
            if (!std::isfinite(y)) {
                throw Error(ErrorCode::NonFiniteValue,
                            "bin " + std::to_string(t + 1) + " holds a non-finite value");
            }
            out.values_.push_back(y);
            sum += y;
        }
        out.counts_.push_back(bins[t].size());
        out.sums_.push_back(sum);
        out.offsets_.push_back(out.values_.size());
    }
    return out;
}

BinnedSeries BinnedSeries::from_series(const TimeSeries& series) {
    BinnedSeries out;
    const std::size_t n = series.size();
    out.noise_sd_ = series.noise_sd();
    out.values_.assign(series.values().begin(), series.values().end());
    out.sums_ = out.values_;
    out.counts_.assign(n, 1);
    out.offsets_.resize(n + 1);
    out.positions_.resize(n);
    for (std::size_t t = 0; t <= n; ++t) out.offsets_[t] = t;
    for (std::size_t t = 0; t < n; ++t) out.positions_[t] = t + 1;
    return out;
}

std::span<const double> BinnedSeries::bin(std::size_t t) const {
    return std::span<const double>(values_).subspan(offsets_.at(t), counts_.at(t));
}

TimeSeries BinnedSeries::to_series() const {
    if (!unit_counts()) {
        throw Error(ErrorCode::InvalidConfig, "series has bins with more than one observation");
    }
    return validate_series(values_, noise_sd_);
}

BinnedSeries BinnedSeries::with_noise_sd(double sd) const {
    check_sigma(sd);
    BinnedSeries out = *this;
    out.noise_sd_ = sd;
    return out;
}

void Hyperparameters::validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(tau0_sq) || !positive(tau1_sq) || !positive(tau_sq)) {
        throw Error(ErrorCode::InvalidHyperparameters, "variances must be finite and > 0");
    }
    if (tau1_sq < tau0_sq) {
        throw Error(ErrorCode::InvalidHyperparameters, "slab variance must be >= spike variance");
    }
    if (!(q >= 0.0 && q <= 1.0)) {
        throw Error(ErrorCode::InvalidHyperparameters, "q must lie in [0, 1]");
    }
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw Error(ErrorCode::InvalidHyperparameters, "threshold must lie in (0, 1)");
    }
}

Hyperparameters Hyperparameters::solo_defaults(std::size_t sites) {
    const double m = static_cast<double>(sites);
    Hyperparameters h;
    h.tau0_sq = 1.0 / m;
    h.tau1_sq = m;
    h.q = 0.1;
    h.threshold = 0.5;
    if (sites > 500) {
        h.tau_sq = 2.0 / std::sqrt(m);
        h.delta = 5;
    } else {
        h.tau_sq = 2.0 / m;
        h.delta = 2;
    }
    return h;
}

Hyperparameters Hyperparameters::basad_defaults(std::size_t sites) {
    Hyperparameters h = solo_defaults(sites);
    const double m = static_cast<double>(sites);
    h.tau0_sq = 1.0 / (10.0 * m);
    h.tau1_sq = std::log(m);
    return h;
}

double inclusion_from_log_weights(double q, double log_w0, double log_w1) noexcept {
    if (q <= 0.0) return 0.0;
    if (q >= 1.0) return 1.0;
    if (log_w0 == log_w1) return q;
    // 1 / (1 + exp(log((1-q) w0) - log(q w1)))
    const double log_odds = (std::log(q) + log_w1) - (std::log1p(-q) + log_w0);
    if (log_odds >= 0.0) {
        return 1.0 / (1.0 + std::exp(-log_odds));
    }
    const double e = std::exp(log_odds);
    return e / (1.0 + e);
}

ChangePointSet::ChangePointSet(std::vector<std::size_t> locations)
    : locations_(std::move(locations)) {
    for (std::size_t i = 0; i < locations_.size(); ++i) {
        if (locations_[i] < 2) {
            throw Error(ErrorCode::InvalidChangePoints, "change point locations start at 2");
        }
        if (i > 0 && locations_[i] <= locations_[i - 1]) {
            throw Error(ErrorCode::InvalidChangePoints, "locations must be strictly increasing");
        }
    }
}

ChangePointSet to_positions(const ChangePointSet& sites, const BinnedSeries& series) {
    std::vector<std::size_t> out;
    out.reserve(sites.count());
    for (std::size_t s : sites) {
        if (s > series.num_bins()) {
            throw Error(ErrorCode::InvalidChangePoints, "site beyond the last bin");
        }
        out.push_back(series.positions()[s - 1]);
    }
    return ChangePointSet(std::move(out));
}

}  // namespace solocp
