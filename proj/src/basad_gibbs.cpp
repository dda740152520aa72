#include <solocp/basad_gibbs.hpp>

#include <cmath>
#include <exception>
#include <mutex>

namespace solocp::gibbs {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t chain_seed(std::uint64_t seed, std::size_t chain) {
    return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(chain)));
}

struct ChainTally {
    std::vector<double> z_sum;
    std::vector<std::vector<double>> batch_means;  // [batch][site]
    std::vector<std::uint64_t> configs;
    std::size_t kept = 0;
};

ChainTally run_chain(const BinnedSeries& series, const Hyperparameters& hypers,
                     const GibbsConfig& config, std::uint64_t seed, bool track_configs) {
    const std::size_t m = series.num_bins();
    const std::size_t kept = config.iterations - config.burn_in;
    const std::size_t batch = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(double(kept))));
    const std::size_t batches = kept / batch;

    ChainTally tally;
    tally.z_sum.assign(m, 0.0);
    tally.batch_means.assign(batches, std::vector<double>(m, 0.0));
    if (track_configs) tally.configs.assign(std::size_t{1} << m, 0);

    GibbsState state(m, seed);
    for (std::size_t it = 0; it < config.iterations; ++it) {
        sample_deltaf_given_z(state, series, hypers);
        sample_z_given_deltaf(state, series.noise_var(), hypers);
        if (it < config.burn_in) continue;
        const std::size_t draw = it - config.burn_in;
        const std::size_t b = draw / batch;
        std::uint64_t mask = 0;
        for (std::size_t t = 0; t < m; ++t) {
            const double z = state.z[t];
            tally.z_sum[t] += z;
            if (b < batches) tally.batch_means[b][t] += z;
            if (track_configs && state.z[t]) mask |= std::uint64_t{1} << t;
        }
        if (track_configs) ++tally.configs[mask];
    }
    for (auto& row : tally.batch_means) {
        for (double& v : row) v /= static_cast<double>(batch);
    }
    tally.kept = kept;
    return tally;
}

}  // namespace

void GibbsConfig::validate() const {
    if (iterations == 0 || burn_in >= iterations) {
        throw Error(ErrorCode::InvalidConfig, "need burn_in < iterations");
    }
    if (chains == 0) {
        throw Error(ErrorCode::InvalidConfig, "need at least one chain");
    }
}

GibbsState::GibbsState(std::size_t sites, std::uint64_t seed)
    : delta_f(sites, 0.0), z(sites, 0), rng(seed) {}

TridiagonalCholesky TridiagonalCholesky::factor(std::span<const double> diag,
                                                std::span<const double> off) {
    const std::size_t n = diag.size();
    TridiagonalCholesky r;
    r.diag.resize(n);
    r.upper.resize(n > 0 ? n - 1 : 0);
    for (std::size_t i = 0; i < n; ++i) {
        double pivot = diag[i];
        if (i > 0) pivot -= r.upper[i - 1] * r.upper[i - 1];
        if (!(pivot > 0.0) || !std::isfinite(pivot)) {
            throw Error(ErrorCode::LinearSolveFailure, "tridiagonal precision is not positive definite");
        }
        r.diag[i] = std::sqrt(pivot);
        if (i + 1 < n) r.upper[i] = off[i] / r.diag[i];
    }
    return r;
}

std::vector<double> TridiagonalCholesky::solve_upper(std::span<const double> b) const {
    const std::size_t n = diag.size();
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double v = b[i];
        if (i + 1 < n) v -= upper[i] * x[i + 1];
        x[i] = v / diag[i];
    }
    return x;
}

std::vector<double> TridiagonalCholesky::solve(std::span<const double> b) const {
    const std::size_t n = diag.size();
    // R' w = b
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = b[i];
        if (i > 0) v -= upper[i - 1] * w[i - 1];
        w[i] = v / diag[i];
    }
    return solve_upper(w);
}

void sample_deltaf_given_z(GibbsState& state, const BinnedSeries& series,
                           const Hyperparameters& hypers) {
    const std::size_t m = series.num_bins();
    const auto counts = series.counts();
    std::vector<double> prior_prec(m);
    for (std::size_t t = 0; t < m; ++t) {
        prior_prec[t] = 1.0 / (state.z[t] ? hypers.tau1_sq : hypers.tau0_sq);
    }
    // N + L' D^{-1} L with L the first-difference operator (Δf_1 = f_1).
    std::vector<double> diag(m);
    std::vector<double> off(m - 1);
    for (std::size_t t = 0; t < m; ++t) {
        diag[t] = static_cast<double>(counts[t]) + prior_prec[t];
        if (t + 1 < m) {
            diag[t] += prior_prec[t + 1];
            off[t] = -prior_prec[t + 1];
        }
    }
    const auto chol = TridiagonalCholesky::factor(diag, off);
    std::vector<double> level = chol.solve(series.sums());
    std::normal_distribution<double> normal;
    std::vector<double> noise(m);
    for (double& e : noise) e = normal(state.rng);
    const std::vector<double> jitter = chol.solve_upper(noise);
    const double sd = series.noise_sd();
    for (std::size_t t = 0; t < m; ++t) level[t] += sd * jitter[t];
    state.delta_f[0] = level[0];
    for (std::size_t t = 1; t < m; ++t) state.delta_f[t] = level[t] - level[t - 1];
}

double slab_conditional(double delta_f, double noise_var, const Hyperparameters& hypers) noexcept {
    if (hypers.q <= 0.0) return 0.0;
    if (hypers.q >= 1.0) return 1.0;
    if (hypers.tau0_sq == hypers.tau1_sq) return hypers.q;
    const double d2 = delta_f * delta_f / (2.0 * noise_var);
    const double slab = std::log(hypers.q) - 0.5 * std::log(hypers.tau1_sq) - d2 / hypers.tau1_sq;
    const double spike = std::log1p(-hypers.q) - 0.5 * std::log(hypers.tau0_sq) - d2 / hypers.tau0_sq;
    const double log_odds = slab - spike;
    if (log_odds >= 0.0) return 1.0 / (1.0 + std::exp(-log_odds));
    const double e = std::exp(log_odds);
    return e / (1.0 + e);
}

void sample_z_given_deltaf(GibbsState& state, double noise_var, const Hyperparameters& hypers) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (std::size_t t = 0; t < state.z.size(); ++t) {
        const double p = slab_conditional(state.delta_f[t], noise_var, hypers);
        state.z[t] = uniform(state.rng) < p ? 1 : 0;
    }
}

GibbsSummary run_gibbs(const BinnedSeries& series, const Hyperparameters& hypers,
                       const GibbsConfig& config) {
    config.validate();
    hypers.validate();
    const std::size_t m = series.num_bins();
    const bool track = m <= 16;

    std::vector<ChainTally> tallies(config.chains);
    std::exception_ptr failure;
    std::mutex failure_mutex;
#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < config.chains; ++c) {
        try {
            tallies[c] = run_chain(series, hypers, config, chain_seed(config.seed, c), track);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    GibbsSummary out;
    out.inclusion.assign(m, 0.0);
    out.mc_standard_error.assign(m, 0.0);
    if (track) out.configuration_counts.assign(std::size_t{1} << m, 0);
    std::size_t batches = 0;
    for (const auto& tally : tallies) {
        out.kept_draws += tally.kept;
        batches += tally.batch_means.size();
        for (std::size_t t = 0; t < m; ++t) out.inclusion[t] += tally.z_sum[t];
        for (std::size_t k = 0; k < tally.configs.size(); ++k) {
            out.configuration_counts[k] += tally.configs[k];
        }
    }
    for (double& v : out.inclusion) v /= static_cast<double>(out.kept_draws);

    if (batches > 1) {
        std::vector<double> mean(m, 0.0);
        for (const auto& tally : tallies) {
            for (const auto& row : tally.batch_means) {
                for (std::size_t t = 0; t < m; ++t) mean[t] += row[t];
            }
        }
        for (double& v : mean) v /= static_cast<double>(batches);
        std::vector<double> var(m, 0.0);
        for (const auto& tally : tallies) {
            for (const auto& row : tally.batch_means) {
                for (std::size_t t = 0; t < m; ++t) var[t] += (row[t] - mean[t]) * (row[t] - mean[t]);
            }
        }
        for (std::size_t t = 0; t < m; ++t) {
            out.mc_standard_error[t] =
                std::sqrt(var[t] / static_cast<double>(batches - 1) / static_cast<double>(batches));
        }
    }
    return out;
}

std::vector<double> gibbs_inclusion_probabilities(const BinnedSeries& series,
                                                  const Hyperparameters& hypers,
                                                  const GibbsConfig& config) {
    std::vector<double> p = run_gibbs(series, hypers, config).inclusion;
    p[0] = 0.0;
    return p;
}

std::vector<double> gibbs_inclusion_probabilities(const TimeSeries& series,
                                                  const Hyperparameters& hypers,
                                                  const GibbsConfig& config) {
    return gibbs_inclusion_probabilities(BinnedSeries::from_series(series), hypers, config);
}

}  // namespace solocp::gibbs
