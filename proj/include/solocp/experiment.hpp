#pragma once

// Experiment plumbing shared by the command line tool and the acceptance
// runner: config parsing, dataset generation, per-replication runs and
// report serialization.

#include <solocp/basad_gibbs.hpp>
#include <solocp/metrics.hpp>
#include <solocp/signal_lab.hpp>
#include <solocp/types.hpp>

#include <json.hpp>

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace solocp::exp {

enum class Method { solo, basad, single };
std::string_view method_name(Method m) noexcept;
/// Throws InvalidConfig.
Method parse_method(std::string_view name);

struct SigmaMode {
    enum class Kind { truth, mad, fixed } kind = Kind::truth;
    double value = 0.0;
};
/// "true", "mad" or "fixed:<value>". Throws InvalidConfig.
SigmaMode parse_sigma_mode(std::string_view text);
std::string sigma_mode_text(const SigmaMode& mode);

/// Per-field overrides on top of the length-keyed defaults.
struct HyperOverrides {
    std::optional<double> tau0_sq, tau1_sq, tau_sq, q, threshold;
    std::optional<std::size_t> delta;

    Hyperparameters apply(Hyperparameters base) const;
};

struct Binning {
    std::size_t n = 1024;
    std::size_t grid = 200;
};

struct Sweep {
    std::string parameter;  // "delta" or "q"
    std::vector<double> values;
};

struct ExperimentConfig {
    std::string label;
    lab::SignalSpec signal;
    lab::NoiseSpec noise;
    std::optional<Binning> binned;
    Method method = Method::solo;
    std::size_t replications = 1;
    std::uint64_t seed = 0;
    SigmaMode sigma;
    HyperOverrides hypers;
    gibbs::GibbsConfig gibbs;
    std::optional<Sweep> sweep;
    double edge = 0.05;

    /// Throws InvalidConfig.
    void validate() const;
};

/// Parses the JSON experiment config described in README.md.
/// Throws ParseError, InvalidConfig, UnknownSignal, InvalidSignal or InvalidNoise.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Default hyperparameters for a method on a series with `sites` sites.
Hyperparameters default_hypers(Method method, std::size_t sites);

/// One generated dataset. Unit-count data stays a TimeSeries so every method
/// applies; binned data is a BinnedSeries with grid positions.
struct Dataset {
    std::uint64_t seed = 0;
    std::variant<TimeSeries, BinnedSeries> data;
    ChangePointSet truth;
    /// Length of the coordinate axis the truth lives on (T, or the grid size).
    std::size_t axis_length = 0;
};

Dataset generate(const ExperimentConfig& config, std::size_t replication);

/// Applies the config's sigma mode to a dataset's series.
double resolve_sigma(const SigmaMode& mode, std::span<const double> values, double true_sd);

/// Runs `method` with `hypers` on either data shape. Locations come back in
/// the data's coordinates (grid positions for binned data). single needs
/// unit-count data and throws InvalidConfig otherwise.
DetectionResult run_method(Method method, const std::variant<TimeSeries, BinnedSeries>& data,
                           const Hyperparameters& hypers, const gibbs::GibbsConfig& gibbs,
                           double edge, std::uint64_t seed);

struct BenchRow {
    std::string label;
    metrics::Aggregate mean;
};

/// simulate → detect → evaluate for every replication (and every sweep value).
/// Replications run on up to `jobs` threads; rows are aggregated in
/// replication order so the numbers do not depend on scheduling.
std::vector<BenchRow> run_bench(const ExperimentConfig& config, std::size_t jobs);

std::string bench_csv(const std::vector<BenchRow>& rows, bool with_time);

/// Parsed detect input: header row, then t,y or t,y,bin.
struct InputData {
    std::vector<double> times;
    std::vector<double> values;
    /// Empty for two-column input.
    std::vector<std::size_t> bins;
};

/// Throws ParseError naming the offending line.
InputData read_csv(std::istream& in);
InputData read_csv_file(const std::filesystem::path& path);

/// The detect report: locations, count, probabilities, clusters, sigma_used,
/// method and hypers.
nlohmann::json detection_report(const DetectionResult& result, Method method, double sigma,
                                const Hyperparameters& hypers);

/// Number of worker threads: explicit value, else SOLOCP_JOBS, else 1.
std::size_t resolve_jobs(std::optional<std::size_t> requested);

}  // namespace solocp::exp
