#include <solocp/solo_posterior.hpp>

#include <cmath>
#include <exception>
#include <mutex>

namespace solocp {

namespace {

// Denominators are in units of observation counts; anything this small
// means the hyperparameters have driven the recursion out of range.
constexpr double kMinDenominator = 1e-12;

void check_denominator(double den, const char* what) {
    if (!(den > kMinDenominator) || !std::isfinite(den)) {
        throw Error(ErrorCode::NumericOverflow, std::string("degenerate denominator in ") + what);
    }
}

// Shared by both tail passes once N_i and S_i are in place.
void tail_recursion(ForwardCache& fwd) {
    const std::size_t m = fwd.sites();
    const double tau = fwd.tau_sq;
    fwd.n_prime.assign(m, 0.0);
    fwd.ybar_prime.assign(m, 0.0);
    fwd.shrink_mass.assign(m + 1, 0.0);
    fwd.shrink_sum.assign(m + 1, 0.0);
    for (std::size_t i = m; i >= 2; --i) {
        const std::size_t k = i - 1;
        const double eff = fwd.tail_count[k] - fwd.shrink_mass[k + 1];
        check_denominator(eff, "tail effective count");
        const double den = tau * eff + 1.0;
        check_denominator(den, "tail shrinkage weight");
        fwd.n_prime[k] = tau * eff * eff / den;
        fwd.ybar_prime[k] = (fwd.tail_sum[k] - fwd.shrink_sum[k + 1]) / eff;
        fwd.shrink_mass[k] = fwd.shrink_mass[k + 1] + fwd.n_prime[k];
        fwd.shrink_sum[k] = fwd.shrink_sum[k + 1] + fwd.n_prime[k] * fwd.ybar_prime[k];
    }
    fwd.shrink_mass[0] = fwd.shrink_mass[1];
    fwd.shrink_sum[0] = fwd.shrink_sum[1];
}

struct SiteTerms {
    double ybar;       // ȳ''_{j,j}
    double precision;  // A_j γ_j
};

// Front-to-back sweep for site j. `visit(i, n'', ȳ'', γ)` sees every step.
template <typename Visit>
SiteTerms inner_sweep(const ForwardCache& fwd, std::size_t site, Visit&& visit) {
    const double tau = fwd.tau_sq;
    const double mass = fwd.shrink_mass[site];  // P_{j+1}
    const double shift = fwd.shrink_sum[site];  // Q_{j+1}
    double r = 0.0;  // Σ_{k<i} n''_k γ_k²
    double l = 0.0;  // Σ_{k<i} n''_k γ_k ȳ''_k
    SiteTerms out{0.0, 0.0};
    for (std::size_t i = 1; i <= site; ++i) {
        const double eff = fwd.tail_count[i - 1] - mass;
        const double gamma = 1.0 - eff * r;
        const double ybar = fwd.tail_sum[i - 1] - shift - eff * l;
        double ndp;
        if (i == 1 && site > 1) {
            // Baseline level: flat prior, the τ² → ∞ limit of τ² / (τ² γ A + 1).
            check_denominator(eff, "baseline effective count");
            ndp = 1.0 / eff;
        } else {
            const double den = tau * gamma * eff + 1.0;
            check_denominator(den, "inner shrinkage weight");
            ndp = tau / den;
        }
        visit(i, ndp, ybar, gamma);
        r += ndp * gamma * gamma;
        l += ndp * gamma * ybar;
        if (i == site) {
            out.ybar = ybar;
            out.precision = eff * gamma;
        }
    }
    if (!std::isfinite(out.ybar) || !std::isfinite(out.precision)) {
        throw Error(ErrorCode::NumericOverflow, "non-finite inner pass result");
    }
    return out;
}

PosteriorSiteSummary summarize(std::size_t site, const SiteTerms& terms, double noise_var,
                               const Hyperparameters& hypers) {
    PosteriorSiteSummary s;
    s.site = site;
    const double taus[2] = {hypers.tau0_sq, hypers.tau1_sq};
    for (int k = 0; k < 2; ++k) {
        const double den = terms.precision + 1.0 / taus[k];
        check_denominator(den, "posterior precision");
        s.mu[k] = terms.ybar / den;
        s.xi[k] = noise_var / den;
        s.log_omega[k] = terms.ybar * terms.ybar / (2.0 * noise_var * den)
                         - 0.5 * std::log1p(taus[k] * terms.precision);
    }
    if (!std::isfinite(s.log_omega[0]) || !std::isfinite(s.log_omega[1])) {
        throw Error(ErrorCode::NumericOverflow, "posterior weight overflow");
    }
    s.inclusion_prob = inclusion_from_log_weights(hypers.q, s.log_omega[0], s.log_omega[1]);
    return s;
}

PosteriorSiteSummary posterior_at(const ForwardCache& fwd, std::size_t site, double noise_var,
                                  const Hyperparameters& hypers) {
    const SiteTerms terms = inner_sweep(fwd, site, [](std::size_t, double, double, double) {});
    return summarize(site, terms, noise_var, hypers);
}

std::vector<PosteriorSiteSummary> parallel_sites(const ForwardCache& fwd, double noise_var,
                                                 const Hyperparameters& hypers) {
    const std::size_t m = fwd.sites();
    std::vector<PosteriorSiteSummary> out(m);
    std::exception_ptr failure;
    std::mutex failure_mutex;
#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t j = 1; j <= m; ++j) {
        try {
            out[j - 1] = posterior_at(fwd, j, noise_var, hypers);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

std::vector<PosteriorSiteSummary> serial_sites(const ForwardCache& fwd, double noise_var,
                                               const Hyperparameters& hypers) {
    std::vector<PosteriorSiteSummary> out;
    out.reserve(fwd.sites());
    for (std::size_t j = 1; j <= fwd.sites(); ++j) {
        out.push_back(posterior_at(fwd, j, noise_var, hypers));
    }
    return out;
}

}  // namespace

std::vector<double> probabilities_of(const std::vector<PosteriorSiteSummary>& sites) {
    std::vector<double> p(sites.size(), 0.0);
    for (std::size_t k = 1; k < sites.size(); ++k) p[k] = sites[k].inclusion_prob;
    return p;
}

std::vector<double> log_bayes_factors(const std::vector<PosteriorSiteSummary>& sites) {
    std::vector<double> b(sites.size(), 0.0);
    for (std::size_t k = 0; k < sites.size(); ++k) b[k] = sites[k].log_omega[1] - sites[k].log_omega[0];
    return b;
}

ForwardCache forward_pass(const TimeSeries& series, const Hyperparameters& hypers) {
    hypers.validate();
    const std::size_t t = series.size();
    ForwardCache fwd;
    fwd.tau_sq = hypers.tau_sq;
    fwd.tail_count.resize(t);
    fwd.tail_sum.resize(t);
    double sum = 0.0;
    for (std::size_t i = t; i >= 1; --i) {
        sum += series[i - 1];
        fwd.tail_count[i - 1] = static_cast<double>(t - i + 1);
        fwd.tail_sum[i - 1] = sum;
    }
    tail_recursion(fwd);
    return fwd;
}

ForwardCache forward_pass(const BinnedSeries& series, const Hyperparameters& hypers) {
    hypers.validate();
    const std::size_t m = series.num_bins();
    const auto counts = series.counts();
    const auto sums = series.sums();
    ForwardCache fwd;
    fwd.tau_sq = hypers.tau_sq;
    fwd.tail_count.resize(m);
    fwd.tail_sum.resize(m);
    double count = 0.0;
    double sum = 0.0;
    for (std::size_t i = m; i >= 1; --i) {
        count += static_cast<double>(counts[i - 1]);
        sum += sums[i - 1];
        fwd.tail_count[i - 1] = count;
        fwd.tail_sum[i - 1] = sum;
    }
    tail_recursion(fwd);
    return fwd;
}

InnerCache inner_pass(const ForwardCache& fwd, std::size_t site) {
    if (site < 1 || site > fwd.sites()) {
        throw Error(ErrorCode::InvalidConfig, "site out of range");
    }
    InnerCache inner;
    inner.site = site;
    inner.n_dprime.reserve(site);
    inner.ybar_dprime.reserve(site);
    inner.gamma.reserve(site);
    const SiteTerms terms =
        inner_sweep(fwd, site, [&](std::size_t, double ndp, double ybar, double gamma) {
            inner.n_dprime.push_back(ndp);
            inner.ybar_dprime.push_back(ybar);
            inner.gamma.push_back(gamma);
        });
    inner.precision = terms.precision;
    return inner;
}

PosteriorSiteSummary site_posterior(const InnerCache& inner, double noise_var,
                                    const Hyperparameters& hypers) {
    if (inner.ybar_dprime.empty()) {
        throw Error(ErrorCode::InvalidConfig, "empty inner cache");
    }
    return summarize(inner.site, SiteTerms{inner.ybar_dprime.back(), inner.precision}, noise_var,
                     hypers);
}

std::vector<PosteriorSiteSummary> site_posteriors(const BinnedSeries& series,
                                                  const Hyperparameters& hypers) {
    return parallel_sites(forward_pass(series, hypers), series.noise_var(), hypers);
}

std::vector<PosteriorSiteSummary> site_posteriors(const TimeSeries& series,
                                                  const Hyperparameters& hypers) {
    return parallel_sites(forward_pass(series, hypers), series.noise_var(), hypers);
}

std::vector<double> all_inclusion_probabilities(const BinnedSeries& series,
                                                const Hyperparameters& hypers) {
    return probabilities_of(site_posteriors(series, hypers));
}

std::vector<double> all_inclusion_probabilities(const TimeSeries& series,
                                                const Hyperparameters& hypers) {
    return probabilities_of(site_posteriors(series, hypers));
}

namespace reference {

std::vector<PosteriorSiteSummary> site_posteriors_serial(const BinnedSeries& series,
                                                         const Hyperparameters& hypers) {
    return serial_sites(forward_pass(series, hypers), series.noise_var(), hypers);
}

std::vector<PosteriorSiteSummary> site_posteriors_serial(const TimeSeries& series,
                                                         const Hyperparameters& hypers) {
    return serial_sites(forward_pass(series, hypers), series.noise_var(), hypers);
}

}  // namespace reference

}  // namespace solocp
