#pragma once

#include <solocp/types.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace solocp::lab {

/// Piecewise-constant mean: levels[0] before changepoints[0], levels[k] from
/// changepoints[k - 1] onwards.
struct SignalSpec {
    std::size_t length = 0;
    std::vector<std::size_t> changepoints;
    std::vector<double> levels;
    /// Change point count as labelled by the source, when it disagrees with
    /// changepoints.size().
    std::optional<std::size_t> reported_k;

    /// Throws InvalidSignal.
    void validate() const;
    /// f_1..f_T.
    std::vector<double> values() const;
    /// f evaluated at x in [0, 1), with index t covering [(t-1)/T, t/T).
    double at(double x) const;
    ChangePointSet truth() const { return ChangePointSet(changepoints); }
};

enum class NoiseFamily { gaussian, laplace, student_t, gaussian_mixture };

struct NoiseSpec {
    NoiseFamily family = NoiseFamily::gaussian;
    double sd = 1.0;          // gaussian
    double dispersion = 1.0;  // laplace scale b
    double df = 4.0;          // student_t degrees of freedom (> 2)
    double scale = 1.0;       // student_t multiplier
    std::vector<double> weights;     // gaussian_mixture
    std::vector<double> sds;         // gaussian_mixture component sds

    /// Throws InvalidNoise.
    void validate() const;
    /// Standard deviation of one draw.
    double analytic_sd() const;

    static NoiseSpec gaussian(double sd);
    static NoiseSpec laplace(double dispersion);
    static NoiseSpec student_t(double df, double scale = 1.0);
    static NoiseSpec mixture(std::vector<double> weights, std::vector<double> sds);
};

std::string_view family_name(NoiseFamily family) noexcept;
/// Throws InvalidNoise for unknown names.
NoiseFamily parse_family(std::string_view name);

/// BLOCKS, TEETH or BLOCKS2. Throws UnknownSignal.
SignalSpec builtin_signal(std::string_view name);

struct Scenario {
    SignalSpec signal;
    NoiseSpec noise;
};

/// "<SIGNAL>.<noise>" with noise one of out, gauss, lap, studt, using the
/// benchmark noise settings for that signal. Throws UnknownSignal.
Scenario builtin_scenario(std::string_view name);

std::vector<double> sample_noise(const NoiseSpec& spec, std::size_t count, std::uint64_t seed);

/// y = f + ε with noise_sd set to the noise family's standard deviation.
TimeSeries simulate(const SignalSpec& signal, const NoiseSpec& noise, std::uint64_t seed);

/// n uniform times on [0, 1], signal plus noise at each, grouped into `grid`
/// equal-width bins. An empty bin holds nothing to move, so merging it into
/// its left neighbour amounts to dropping it: the result may hold fewer than
/// `grid` bins, and positions() carries the 1-based grid index of every kept
/// bin so detections can be reported on the grid.
BinnedSeries simulate_binned(const SignalSpec& signal, const NoiseSpec& noise, std::size_t n,
                             std::size_t grid, std::uint64_t seed);

/// True change points in grid coordinates: the change at η lands on grid
/// position round((η - 1) / T * grid) + 1, the first bin whose majority lies
/// in the new segment.
ChangePointSet binned_truth(const SignalSpec& signal, std::size_t grid);

/// 1.4826 * median |d - median(d)| with d_t = (y_{t+1} - y_t) / sqrt(2).
/// Throws TooShort for fewer than 3 values.
double estimate_sigma_mad(std::span<const double> values);
double estimate_sigma_mad(const TimeSeries& series);

/// Ỹ_j = Σ_{i in block j} y_i / sqrt(|block j|) over m contiguous blocks of
/// size floor(T / m); the last block absorbs the remainder. Throws InvalidBlockCount.
std::vector<double> block_aggregate(const TimeSeries& series, std::size_t blocks);

}  // namespace solocp::lab
