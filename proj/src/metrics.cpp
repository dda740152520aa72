#include <solocp/metrics.hpp>

#include <algorithm>
#include <cstdio>
#include <limits>

namespace solocp::metrics {

namespace {

std::size_t absdiff(std::size_t a, std::size_t b) { return a > b ? a - b : b - a; }

// For each b (sorted), distance to nearest a (sorted), by one merge sweep.
template <class Visit>
void nearest_distances(const ChangePointSet& a, const ChangePointSet& b, Visit visit) {
    if (a.empty()) throw Error(ErrorCode::EmptySet, "nearest-point distance to an empty set");
    const auto la = a.locations();
    std::size_t k = 0;
    for (std::size_t x : b) {
        while (k + 1 < la.size() && la[k + 1] <= x) ++k;
        std::size_t best = absdiff(la[k], x);
        if (k + 1 < la.size()) best = std::min(best, absdiff(la[k + 1], x));
        visit(best);
    }
}

}  // namespace

double one_sided_hausdorff(const ChangePointSet& a, const ChangePointSet& b) {
    if (b.empty()) throw Error(ErrorCode::EmptySet, "one-sided distance from an empty set");
    std::size_t worst = 0;
    nearest_distances(a, b, [&](std::size_t d) { worst = std::max(worst, d); });
    return static_cast<double>(worst);
}

double hausdorff(const ChangePointSet& est, const ChangePointSet& truth) {
    return one_sided_hausdorff(est, truth) + one_sided_hausdorff(truth, est);
}

std::array<double, 4> distance_histogram(const ChangePointSet& reference, const ChangePointSet& other) {
    if (reference.empty()) throw Error(ErrorCode::EmptySet, "histogram of an empty reference set");
    std::array<double, 4> h{};
    if (other.empty()) {
        h[3] = 1.0;
        return h;
    }
    nearest_distances(other, reference, [&](std::size_t d) { h[std::min<std::size_t>(d, 3)] += 1.0; });
    for (double& v : h) v /= static_cast<double>(reference.count());
    return h;
}

EvalReport evaluate(const ChangePointSet& selected, const ChangePointSet& truth,
                    std::size_t series_length) {
    EvalReport r;
    r.k_bias = static_cast<long>(truth.count()) - static_cast<long>(selected.count());
    if (selected.empty() != truth.empty()) {
        r.hausdorff = static_cast<double>(series_length);
        r.hausdorff_defined = false;
    } else if (!selected.empty()) {
        r.hausdorff = hausdorff(selected, truth);
    }
    if (!truth.empty()) r.hist_true = distance_histogram(truth, selected);
    if (!selected.empty()) r.hist_est = distance_histogram(selected, truth);
    return r;
}

void Aggregate::add(const EvalReport& report, double seconds_taken) {
    ++replications;
    k_bias += static_cast<double>(report.k_bias);
    hausdorff += report.hausdorff;
    seconds += seconds_taken;
    if (!report.hausdorff_defined) ++sentinel_hits;
    if (report.hist_true) {
        ++hist_true_n;
        for (std::size_t i = 0; i < 4; ++i) hist_true[i] += (*report.hist_true)[i];
    }
    if (report.hist_est) {
        ++hist_est_n;
        for (std::size_t i = 0; i < 4; ++i) hist_est[i] += (*report.hist_est)[i];
    }
}

Aggregate Aggregate::finalized() const {
    Aggregate m = *this;
    const auto div = [](double v, std::size_t n) {
        return n ? v / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
    };
    for (std::size_t i = 0; i < 4; ++i) {
        m.hist_true[i] = div(hist_true[i], hist_true_n);
        m.hist_est[i] = div(hist_est[i], hist_est_n);
    }
    m.k_bias = div(k_bias, replications);
    m.hausdorff = div(hausdorff, replications);
    m.seconds = div(seconds, replications);
    return m;
}

std::string csv_header() {
    return "true_0,true_1,true_2,true_ge3,est_0,est_1,est_2,est_ge3,k_bias,hausdorff,time_s";
}

std::string csv_row(const Aggregate& mean, bool with_time) {
    char buf[64];
    std::string row;
    const auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.4f", v);
        if (!row.empty()) row += ',';
        row += buf;
    };
    for (double v : mean.hist_true) put(v);
    for (double v : mean.hist_est) put(v);
    put(mean.k_bias);
    put(mean.hausdorff);
    if (with_time) {
        put(mean.seconds);
    } else {
        row += ",";
    }
    return row;
}

}  // namespace solocp::metrics
