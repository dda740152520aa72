#include <solocp/signal_lab.hpp>

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace solocp;
using namespace solocp::lab;

namespace {

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double central_moment(const std::vector<double>& v, int k) {
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += std::pow(x - m, k);
    return acc / v.size();
}

}  // namespace

TEST_SUITE("signal_lab") {

TEST_CASE("builtin signals") {
    const SignalSpec teeth = builtin_signal("TEETH");
    CHECK(teeth.length == 140);
    CHECK(teeth.truth().count() == 4);
    const auto f = teeth.values();
    CHECK(f[29] == 0.0);
    CHECK(f[30] == 1.0);  // t = 31 starts the second segment
    CHECK(teeth.at(30.5 / 140) == 1.0);
    CHECK(teeth.at(29.5 / 140) == 0.0);

    CHECK(builtin_signal("BLOCKS").truth().count() == 11);
    const SignalSpec b2 = builtin_signal("BLOCKS2");
    CHECK(b2.truth().count() == 5);
    REQUIRE(b2.reported_k.has_value());
    CHECK(*b2.reported_k == 6);

    try {
        builtin_signal("WAVES");
        FAIL("expected UnknownSignal");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownSignal);
    }
    CHECK_THROWS_AS(builtin_scenario("TEETH.cauchy"), Error);
}

TEST_CASE("signal validation") {
    SignalSpec s{10, {4, 4}, {0, 1, 2}, {}};
    CHECK_THROWS_AS(s.validate(), Error);
    s = SignalSpec{10, {4}, {0}, {}};
    CHECK_THROWS_AS(s.validate(), Error);
    s = SignalSpec{10, {11}, {0, 1}, {}};
    CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("noise validation") {
    CHECK_THROWS_AS(NoiseSpec::gaussian(-1.0), Error);
    CHECK_THROWS_AS(NoiseSpec::student_t(2.0), Error);
    CHECK_THROWS_AS(NoiseSpec::mixture({0.5, 0.6}, {1.0, 2.0}), Error);
    CHECK_THROWS_AS(NoiseSpec::mixture({1.0}, {1.0, 2.0}), Error);
    CHECK(parse_family(family_name(NoiseFamily::laplace)) == NoiseFamily::laplace);
    CHECK_THROWS_AS(parse_family("uniform"), Error);
}

TEST_CASE("analytic standard deviations") {
    CHECK(NoiseSpec::laplace(3.0).analytic_sd() == doctest::Approx(3.0 * std::sqrt(2.0)));
    CHECK(NoiseSpec::student_t(4.0, 2.0).analytic_sd() == doctest::Approx(2.0 * std::sqrt(2.0)));
    const NoiseSpec blocks_out = builtin_scenario("BLOCKS.out").noise;
    CHECK(blocks_out.analytic_sd() * blocks_out.analytic_sd() == doctest::Approx(85.75));
}

TEST_CASE("sample moments match each family") {
    const std::size_t n = 400000;
    const std::vector<NoiseSpec> specs{NoiseSpec::gaussian(2.0), NoiseSpec::laplace(1.5),
                                       NoiseSpec::student_t(5.0, 1.0),
                                       NoiseSpec::mixture({0.95, 0.05}, {7.0, 28.0})};
    for (const NoiseSpec& s : specs) {
        const auto e = sample_noise(s, n, 61);
        CHECK(std::abs(mean_of(e)) < 5.0 * s.analytic_sd() / std::sqrt(double(n)));
        const double var = central_moment(e, 2);
        CHECK(var == doctest::Approx(s.analytic_sd() * s.analytic_sd()).epsilon(0.03));
    }
    // Laplace excess kurtosis 3, t_5 excess kurtosis 6 (heavy-tailed, noisy estimate).
    const auto lap = sample_noise(NoiseSpec::laplace(1.0), n, 62);
    CHECK(central_moment(lap, 4) / std::pow(central_moment(lap, 2), 2) == doctest::Approx(6.0).epsilon(0.05));
    const auto t = sample_noise(NoiseSpec::student_t(5.0), n, 63);
    CHECK(central_moment(t, 4) / std::pow(central_moment(t, 2), 2) > 5.0);
}

TEST_CASE("vanishing noise reproduces the signal") {
    const SignalSpec teeth = builtin_signal("TEETH");
    const TimeSeries y = simulate(teeth, NoiseSpec::gaussian(1e-12), 2);
    const auto f = teeth.values();
    for (std::size_t t = 0; t < f.size(); ++t) CHECK(std::abs(y[t] - f[t]) < 1e-10);
    CHECK_THROWS_AS(NoiseSpec::gaussian(0.0), Error);
}

TEST_CASE("simulation is deterministic in the seed") {
    const Scenario sc = builtin_scenario("TEETH.studt");
    const TimeSeries a = simulate(sc.signal, sc.noise, 7);
    const TimeSeries b = simulate(sc.signal, sc.noise, 7);
    const TimeSeries c = simulate(sc.signal, sc.noise, 8);
    CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
    CHECK_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
    CHECK(a.noise_sd() == doctest::Approx(sc.noise.analytic_sd()));
}

TEST_CASE("binned simulation bookkeeping") {
    const Scenario sc = builtin_scenario("BLOCKS2.gauss");
    const BinnedSeries b = simulate_binned(sc.signal, sc.noise, 1024, 200, 5);
    CHECK(b.total_count() == 1024);
    CHECK(b.num_bins() <= 200);
    CHECK(std::accumulate(b.counts().begin(), b.counts().end(), std::size_t{0}) == 1024);
    for (std::size_t t = 0; t < b.num_bins(); ++t) {
        CHECK(b.counts()[t] >= 1);
        CHECK(b.positions()[t] >= 1);
        CHECK(b.positions()[t] <= 200);
        if (t) CHECK(b.positions()[t] > b.positions()[t - 1]);
    }
    // Sparse sampling leaves empty grid cells that are dropped.
    const BinnedSeries sparse = simulate_binned(sc.signal, sc.noise, 50, 200, 5);
    CHECK(sparse.num_bins() < 200);
    CHECK(sparse.total_count() == 50);
    CHECK_THROWS_AS(simulate_binned(sc.signal, sc.noise, 100, 1, 5), Error);

    const auto truth = binned_truth(sc.signal, 200);
    CHECK(truth.count() == 5);
    CHECK(truth[0] == static_cast<std::size_t>(std::lround(101.0 / 1000.0 * 200)) + 1);
}

TEST_CASE("MAD noise estimate") {
    const Scenario sc = builtin_scenario("BLOCKS.gauss");
    const TimeSeries s = simulate(sc.signal, sc.noise, 3);
    CHECK(estimate_sigma_mad(s) == doctest::Approx(7.0).epsilon(0.10));
    // Short series: 139 differences.
    const Scenario teeth = builtin_scenario("TEETH.gauss");
    const TimeSeries t = simulate(teeth.signal, teeth.noise, 3);
    CHECK(estimate_sigma_mad(t) == doctest::Approx(0.25).epsilon(0.15));
    CHECK_THROWS_AS(estimate_sigma_mad(std::vector<double>{1.0, 2.0}), Error);
}

TEST_CASE("block aggregation") {
    const TimeSeries s = validate_series({1, 2, 3, 4, 5, 6, 7}, 1.0);
    const auto a = block_aggregate(s, 3);  // blocks {1,2}, {3,4}, {5,6,7}
    REQUIRE(a.size() == 3);
    CHECK(a[0] == doctest::Approx(3.0 / std::sqrt(2.0)));
    CHECK(a[1] == doctest::Approx(7.0 / std::sqrt(2.0)));
    CHECK(a[2] == doctest::Approx(18.0 / std::sqrt(3.0)));
    CHECK(block_aggregate(s, 7).size() == 7);
    CHECK_THROWS_AS(block_aggregate(s, 0), Error);
    CHECK_THROWS_AS(block_aggregate(s, 8), Error);
}

}  // TEST_SUITE
