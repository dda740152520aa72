#include <solocp/gaussian_oracle.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace solocp::oracle {

namespace {

Eigen::MatrixXd design(const BinnedSeries& series) {
    const std::size_t m = series.num_bins();
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(series.total_count()),
                                              static_cast<Eigen::Index>(m));
    Eigen::Index row = 0;
    for (std::size_t t = 0; t < m; ++t) {
        for (std::size_t k = 0; k < series.counts()[t]; ++k, ++row) {
            x.row(row).head(static_cast<Eigen::Index>(t + 1)).setOnes();
        }
    }
    return x;
}

Eigen::VectorXd observations(const BinnedSeries& series) {
    const auto v = series.values();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

struct Factored {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double log_det = 0.0;
};

// prior_var holds the diagonal of D (already multiplied by σ²).
Factored factor_covariance(const Eigen::MatrixXd& x, const Eigen::VectorXd& prior_var,
                           double noise_var) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd cov = x * prior_var.asDiagonal() * x.transpose();
    cov.diagonal().array() += noise_var;
    Factored f;
    f.llt.compute(cov);
    if (f.llt.info() != Eigen::Success) {
        throw Error(ErrorCode::SingularCovariance, "marginal covariance is not positive definite");
    }
    const Eigen::MatrixXd& l = f.llt.matrixLLT();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = l(i, i);
        if (!(d > 0.0)) throw Error(ErrorCode::SingularCovariance, "zero pivot");
        f.log_det += 2.0 * std::log(d);
    }
    return f;
}

double log_density(const Factored& f, const Eigen::VectorXd& y) {
    const double quad = y.dot(f.llt.solve(y));
    const double n = static_cast<double>(y.size());
    return -0.5 * (n * std::log(2.0 * std::numbers::pi) + f.log_det + quad);
}

}  // namespace

OracleResult oracle_site_posterior(const BinnedSeries& series, std::size_t site,
                                   const Hyperparameters& hypers, std::size_t cap) {
    hypers.validate();
    const std::size_t m = series.num_bins();
    if (site < 1 || site > m) throw Error(ErrorCode::InvalidConfig, "site out of range");
    if (series.total_count() > cap) {
        throw Error(ErrorCode::InvalidConfig, "series exceeds the oracle size cap");
    }
    const double s2 = series.noise_var();
    const Eigen::MatrixXd full = design(series);
    const Eigen::VectorXd y = observations(series);
    const Eigen::Index n = y.size();
    // For j >= 2 the baseline column (all ones) carries a flat prior and is
    // integrated out: with C the covariance of the remaining terms and
    // P = C⁻¹ − C⁻¹1 (1'C⁻¹1)⁻¹ 1'C⁻¹, E[Δf_j | y] = v_j x_j' P y,
    // Var = v_j − v_j² x_j' P x_j and m(y) ∝ |C|^{-1/2} (1'C⁻¹1)^{-1/2} exp(−y'Py / 2).
    const bool flat = site >= 2;
    const Eigen::Index first = flat ? 1 : 0;
    const Eigen::MatrixXd x = full.rightCols(full.cols() - first);
    const Eigen::Index j = static_cast<Eigen::Index>(site - 1) - first;
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

    OracleResult out;
    out.site = site;
    const double taus[2] = {hypers.tau0_sq, hypers.tau1_sq};
    for (int k = 0; k < 2; ++k) {
        Eigen::VectorXd prior_var = Eigen::VectorXd::Constant(x.cols(), s2 * hypers.tau_sq);
        prior_var(j) = s2 * taus[k];
        const Factored f = factor_covariance(x, prior_var, s2);
        const Eigen::VectorXd col = x.col(j);
        if (!flat) {
            const Eigen::VectorXd cross = prior_var(j) * col;
            const Eigen::VectorXd solved = f.llt.solve(cross);
            out.mu[k] = solved.dot(y);
            out.xi[k] = prior_var(j) - cross.dot(solved);
            out.log_marginal[k] = log_density(f, y);
            continue;
        }
        const Eigen::VectorXd ci_one = f.llt.solve(ones);
        const Eigen::VectorXd ci_y = f.llt.solve(y);
        const Eigen::VectorXd ci_x = f.llt.solve(col);
        const double oco = ones.dot(ci_one);
        const auto project = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& ci_u,
                                 const Eigen::VectorXd& w) {
            // u' P w
            return u.dot(f.llt.solve(w)) - ci_u.dot(ones) * ci_one.dot(w) / oco;
        };
        const double v = prior_var(j);
        out.mu[k] = v * project(col, ci_x, y);
        out.xi[k] = v - v * v * project(col, ci_x, col);
        const double ypy = y.dot(ci_y) - std::pow(ones.dot(ci_y), 2) / oco;
        out.log_marginal[k] = -0.5 * (static_cast<double>(n - 1) * std::log(2.0 * std::numbers::pi) +
                                      f.log_det + std::log(oco) + ypy);
    }
    out.inclusion_prob =
        inclusion_from_log_weights(hypers.q, out.log_marginal[0], out.log_marginal[1]);
    return out;
}

OracleResult oracle_site_posterior(const TimeSeries& series, std::size_t site,
                                   const Hyperparameters& hypers, std::size_t cap) {
    return oracle_site_posterior(BinnedSeries::from_series(series), site, hypers, cap);
}

double oracle_joint_marginal(const BinnedSeries& series, std::span<const std::uint8_t> z,
                             const Hyperparameters& hypers) {
    const std::size_t m = series.num_bins();
    if (series.total_count() > kJointCap) {
        throw Error(ErrorCode::InvalidConfig, "series exceeds the joint oracle size cap");
    }
    if (z.size() != m) throw Error(ErrorCode::InvalidConfig, "one indicator per site required");
    const double s2 = series.noise_var();
    Eigen::VectorXd prior_var(static_cast<Eigen::Index>(m));
    for (std::size_t t = 0; t < m; ++t) {
        prior_var(static_cast<Eigen::Index>(t)) = s2 * (z[t] ? hypers.tau1_sq : hypers.tau0_sq);
    }
    return log_density(factor_covariance(design(series), prior_var, s2), observations(series));
}

std::vector<double> enumerate_z_posterior(const BinnedSeries& series, const Hyperparameters& hypers) {
    const std::size_t m = series.num_bins();
    if (m > 16) throw Error(ErrorCode::InvalidConfig, "enumeration limited to 16 sites");
    const std::size_t configs = std::size_t{1} << m;
    std::vector<double> log_post(configs);
    std::vector<std::uint8_t> z(m);
    const double log_q = std::log(hypers.q);
    const double log_not_q = std::log1p(-hypers.q);
    for (std::size_t mask = 0; mask < configs; ++mask) {
        double log_prior = 0.0;
        for (std::size_t t = 0; t < m; ++t) {
            z[t] = (mask >> t) & 1U;
            log_prior += z[t] ? log_q : log_not_q;
        }
        log_post[mask] = log_prior + oracle_joint_marginal(series, z, hypers);
    }
    const double top = *std::max_element(log_post.begin(), log_post.end());
    double total = 0.0;
    for (double& v : log_post) {
        v = std::exp(v - top);
        total += v;
    }
    for (double& v : log_post) v /= total;
    return log_post;
}

std::vector<double> enumerate_inclusion(const BinnedSeries& series, const Hyperparameters& hypers) {
    const std::size_t m = series.num_bins();
    const std::vector<double> post = enumerate_z_posterior(series, hypers);
    std::vector<double> marginal(m, 0.0);
    for (std::size_t mask = 0; mask < post.size(); ++mask) {
        for (std::size_t t = 0; t < m; ++t) {
            if ((mask >> t) & 1U) marginal[t] += post[mask];
        }
    }
    return marginal;
}

}  // namespace solocp::oracle
