#include <solocp/signal_lab.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace solocp::lab {

namespace {

[[noreturn]] void bad_signal(const std::string& what) { throw Error(ErrorCode::InvalidSignal, what); }
[[noreturn]] void bad_noise(const std::string& what) { throw Error(ErrorCode::InvalidNoise, what); }

double median_inplace(std::vector<double>& v) {
    const std::size_t n = v.size();
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

}  // namespace

void SignalSpec::validate() const {
    if (length < 2) bad_signal("signal length must be at least 2");
    if (levels.size() != changepoints.size() + 1) {
        bad_signal("need exactly one more level than change points");
    }
    for (std::size_t k = 0; k < changepoints.size(); ++k) {
        const std::size_t c = changepoints[k];
        if (c < 2 || c > length) bad_signal("change point " + std::to_string(c) + " out of range");
        if (k > 0 && c <= changepoints[k - 1]) bad_signal("change points must be strictly increasing");
    }
    for (double l : levels) {
        if (!std::isfinite(l)) bad_signal("levels must be finite");
    }
}

std::vector<double> SignalSpec::values() const {
    validate();
    std::vector<double> f(length);
    std::size_t seg = 0;
    for (std::size_t t = 1; t <= length; ++t) {
        while (seg < changepoints.size() && t >= changepoints[seg]) ++seg;
        f[t - 1] = levels[seg];
    }
    return f;
}

double SignalSpec::at(double x) const {
    const double scaled = std::floor(x * static_cast<double>(length));
    const std::size_t t =
        std::min(length, static_cast<std::size_t>(std::max(0.0, scaled)) + 1);
    const auto seg = std::upper_bound(changepoints.begin(), changepoints.end(), t) - changepoints.begin();
    return levels[static_cast<std::size_t>(seg)];
}

void NoiseSpec::validate() const {
    switch (family) {
    case NoiseFamily::gaussian:
        if (!(sd > 0.0) || !std::isfinite(sd)) bad_noise("gaussian sd must be positive");
        break;
    case NoiseFamily::laplace:
        if (!(dispersion > 0.0) || !std::isfinite(dispersion)) bad_noise("laplace dispersion must be positive");
        break;
    case NoiseFamily::student_t:
        if (!(df > 2.0) || !std::isfinite(df)) bad_noise("student_t needs df > 2 for a finite variance");
        if (!(scale > 0.0) || !std::isfinite(scale)) bad_noise("student_t scale must be positive");
        break;
    case NoiseFamily::gaussian_mixture: {
        if (weights.empty() || weights.size() != sds.size()) {
            bad_noise("mixture needs one sd per weight");
        }
        double total = 0.0;
        for (std::size_t k = 0; k < weights.size(); ++k) {
            if (!(weights[k] >= 0.0 && weights[k] <= 1.0)) bad_noise("mixture weights must lie in [0, 1]");
            if (!(sds[k] > 0.0) || !std::isfinite(sds[k])) bad_noise("mixture sds must be positive");
            total += weights[k];
        }
        if (std::abs(total - 1.0) > 1e-9) bad_noise("mixture weights must sum to 1");
        break;
    }
    }
}

double NoiseSpec::analytic_sd() const {
    validate();
    switch (family) {
    case NoiseFamily::gaussian: return sd;
    case NoiseFamily::laplace: return dispersion * std::sqrt(2.0);
    case NoiseFamily::student_t: return scale * std::sqrt(df / (df - 2.0));
    case NoiseFamily::gaussian_mixture: {
        double var = 0.0;
        for (std::size_t k = 0; k < weights.size(); ++k) var += weights[k] * sds[k] * sds[k];
        return std::sqrt(var);
    }
    }
    return sd;
}

NoiseSpec NoiseSpec::gaussian(double sd) {
    NoiseSpec s;
    s.family = NoiseFamily::gaussian;
    s.sd = sd;
    s.validate();
    return s;
}

NoiseSpec NoiseSpec::laplace(double dispersion) {
    NoiseSpec s;
    s.family = NoiseFamily::laplace;
    s.dispersion = dispersion;
    s.validate();
    return s;
}

NoiseSpec NoiseSpec::student_t(double df, double scale) {
    NoiseSpec s;
    s.family = NoiseFamily::student_t;
    s.df = df;
    s.scale = scale;
    s.validate();
    return s;
}

NoiseSpec NoiseSpec::mixture(std::vector<double> weights, std::vector<double> sds) {
    NoiseSpec s;
    s.family = NoiseFamily::gaussian_mixture;
    s.weights = std::move(weights);
    s.sds = std::move(sds);
    s.validate();
    return s;
}

std::string_view family_name(NoiseFamily family) noexcept {
    switch (family) {
    case NoiseFamily::gaussian: return "gaussian";
    case NoiseFamily::laplace: return "laplace";
    case NoiseFamily::student_t: return "student_t";
    case NoiseFamily::gaussian_mixture: return "gaussian_mixture";
    }
    return "unknown";
}

NoiseFamily parse_family(std::string_view name) {
    for (auto f : {NoiseFamily::gaussian, NoiseFamily::laplace, NoiseFamily::student_t,
                   NoiseFamily::gaussian_mixture}) {
        if (family_name(f) == name) return f;
    }
    throw Error(ErrorCode::InvalidNoise, "unknown noise family '" + std::string(name) + "'");
}

SignalSpec builtin_signal(std::string_view name) {
    SignalSpec s;
    if (name == "BLOCKS") {
        s.length = 2048;
        s.changepoints = {205, 267, 308, 472, 512, 820, 902, 1332, 1557, 1598, 1659};
        s.levels = {0, 14.64, -3.66, 7.32, -7.32, 10.98, -4.39, 3.29, 19.03, 7.68, 15.37, 0};
    } else if (name == "TEETH") {
        s.length = 140;
        s.changepoints = {31, 61, 91, 121};
        s.levels = {0, 1, 0, 1, 0};
    } else if (name == "BLOCKS2") {
        s.length = 1024;
        s.changepoints = {102, 236, 410, 666, 829};
        s.levels = {0, 14.64, -7.32, 3.29, 19.03, 0};
        s.reported_k = 6;
    } else {
        throw Error(ErrorCode::UnknownSignal, "unknown signal '" + std::string(name) + "'");
    }
    return s;
}

Scenario builtin_scenario(std::string_view name) {
    const auto dot = name.find('.');
    if (dot == std::string_view::npos) {
        throw Error(ErrorCode::UnknownSignal, "scenario must look like SIGNAL.noise, got '" +
                                                  std::string(name) + "'");
    }
    const std::string_view sig = name.substr(0, dot);
    const std::string_view kind = name.substr(dot + 1);
    Scenario out{builtin_signal(sig), {}};
    const bool teeth = sig == "TEETH";
    const bool blocks2 = sig == "BLOCKS2";
    if (kind == "out") {
        out.noise = teeth ? NoiseSpec::mixture({0.9, 0.1}, {0.25, 1.0})
                  : blocks2 ? NoiseSpec::mixture({0.9, 0.1}, {7.0, 28.0})
                            : NoiseSpec::mixture({0.95, 0.05}, {7.0, 28.0});
    } else if (kind == "gauss") {
        out.noise = NoiseSpec::gaussian(teeth ? 0.25 : 7.0);
    } else if (kind == "lap") {
        out.noise = NoiseSpec::laplace(teeth ? 0.3 : blocks2 ? 9.0 : 7.0);
    } else if (kind == "studt") {
        out.noise = teeth ? NoiseSpec::student_t(3.0, 1.0)
                  : blocks2 ? NoiseSpec::student_t(4.0, 7.0)
                            : NoiseSpec::student_t(4.0, 1.0);
    } else {
        throw Error(ErrorCode::UnknownSignal, "unknown noise kind '" + std::string(kind) + "'");
    }
    return out;
}

std::vector<double> sample_noise(const NoiseSpec& spec, std::size_t count, std::uint64_t seed) {
    spec.validate();
    std::mt19937_64 rng(seed);
    std::vector<double> out(count);
    switch (spec.family) {
    case NoiseFamily::gaussian: {
        std::normal_distribution<double> d(0.0, spec.sd);
        for (double& e : out) e = d(rng);
        break;
    }
    case NoiseFamily::laplace: {
        // Difference of two exponentials with mean b.
        std::exponential_distribution<double> d(1.0 / spec.dispersion);
        for (double& e : out) e = d(rng) - d(rng);
        break;
    }
    case NoiseFamily::student_t: {
        std::student_t_distribution<double> d(spec.df);
        for (double& e : out) e = spec.scale * d(rng);
        break;
    }
    case NoiseFamily::gaussian_mixture: {
        std::discrete_distribution<std::size_t> pick(spec.weights.begin(), spec.weights.end());
        std::normal_distribution<double> z;
        for (double& e : out) {
            const std::size_t k = pick(rng);
            e = spec.sds[k] * z(rng);
        }
        break;
    }
    }
    return out;
}

TimeSeries simulate(const SignalSpec& signal, const NoiseSpec& noise, std::uint64_t seed) {
    std::vector<double> y = signal.values();
    const std::vector<double> e = sample_noise(noise, y.size(), seed);
    for (std::size_t t = 0; t < y.size(); ++t) y[t] += e[t];
    return validate_series(std::move(y), noise.analytic_sd());
}

BinnedSeries simulate_binned(const SignalSpec& signal, const NoiseSpec& noise, std::size_t n,
                             std::size_t grid, std::uint64_t seed) {
    signal.validate();
    if (grid < 2) throw Error(ErrorCode::InvalidConfig, "grid must have at least 2 bins");
    if (n < 2) throw Error(ErrorCode::InvalidConfig, "need at least 2 sample points");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> times(n);
    for (double& x : times) x = unit(rng);
    std::sort(times.begin(), times.end());
    // Noise comes from its own stream so the sampled times do not depend on the family.
    const std::vector<double> e = sample_noise(noise, n, seed ^ 0x5bd1e995ULL);

    std::vector<std::vector<double>> grid_bins(grid);
    for (std::size_t i = 0; i < n; ++i) {
        const auto b = std::min(grid - 1, static_cast<std::size_t>(times[i] * static_cast<double>(grid)));
        grid_bins[b].push_back(signal.at(times[i]) + e[i]);
    }
    std::vector<std::vector<double>> bins;
    std::vector<std::size_t> positions;
    for (std::size_t b = 0; b < grid; ++b) {
        if (grid_bins[b].empty()) continue;
        bins.push_back(std::move(grid_bins[b]));
        positions.push_back(b + 1);
    }
    if (bins.size() < 2) throw Error(ErrorCode::TooShort, "fewer than two non-empty bins");
    return BinnedSeries::from_bins(bins, noise.analytic_sd(), std::move(positions));
}

ChangePointSet binned_truth(const SignalSpec& signal, std::size_t grid) {
    signal.validate();
    std::vector<std::size_t> out;
    const double t = static_cast<double>(signal.length);
    for (std::size_t c : signal.changepoints) {
        const auto pos = static_cast<std::size_t>(
            std::lround(static_cast<double>(c - 1) / t * static_cast<double>(grid))) + 1;
        if (pos >= 2 && pos <= grid && (out.empty() || pos > out.back())) out.push_back(pos);
    }
    return ChangePointSet(std::move(out));
}

double estimate_sigma_mad(std::span<const double> values) {
    if (values.size() < 3) throw Error(ErrorCode::TooShort, "MAD estimate needs at least 3 values");
    std::vector<double> d(values.size() - 1);
    for (std::size_t t = 0; t + 1 < values.size(); ++t) {
        d[t] = (values[t + 1] - values[t]) / std::sqrt(2.0);
    }
    std::vector<double> work = d;
    const double centre = median_inplace(work);
    for (double& v : d) v = std::abs(v - centre);
    return 1.4826 * median_inplace(d);
}

double estimate_sigma_mad(const TimeSeries& series) { return estimate_sigma_mad(series.values()); }

std::vector<double> block_aggregate(const TimeSeries& series, std::size_t blocks) {
    const std::size_t t = series.size();
    if (blocks == 0 || blocks > t) {
        throw Error(ErrorCode::InvalidBlockCount,
                    "block count must lie in [1, " + std::to_string(t) + "]");
    }
    const std::size_t width = t / blocks;
    std::vector<double> out(blocks);
    for (std::size_t j = 0; j < blocks; ++j) {
        const std::size_t begin = j * width;
        const std::size_t end = j + 1 == blocks ? t : begin + width;
        const auto v = series.values();
        const double sum = std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(begin),
                                           v.begin() + static_cast<std::ptrdiff_t>(end), 0.0);
        out[j] = sum / std::sqrt(static_cast<double>(end - begin));
    }
    return out;
}

}  // namespace solocp::lab
