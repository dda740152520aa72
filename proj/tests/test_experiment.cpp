#include <solocp/experiment.hpp>

#include <doctest.h>

#include <sstream>

using namespace solocp;
using namespace solocp::exp;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::IoError;
}

std::string message_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("scenario config with overrides") {
    const ExperimentConfig c = parse_config_text(R"({
        "scenario": "TEETH.gauss", "method": "solo", "replications": 7, "seed": 11,
        "sigma": "mad", "hypers": {"q": 0.2, "delta": 3}, "sweep": {"delta": [0, 1, 2]}
    })");
    CHECK(c.label == "TEETH.gauss");
    CHECK(c.signal.length == 140);
    CHECK(c.noise.sd == 0.25);
    CHECK(c.replications == 7);
    CHECK(c.seed == 11);
    CHECK(c.sigma.kind == SigmaMode::Kind::mad);
    const Hyperparameters h = c.hypers.apply(default_hypers(c.method, 140));
    CHECK(h.q == 0.2);
    CHECK(h.delta == 3);
    CHECK(h.tau1_sq == 140.0);
    REQUIRE(c.sweep.has_value());
    CHECK(c.sweep->values.size() == 3);
}

TEST_CASE("custom signal and noise") {
    const ExperimentConfig c = parse_config_text(R"({
        "signal": {"length": 50, "changepoints": [20], "levels": [0, 3]},
        "noise": {"family": "student_t", "df": 5, "scale": 0.5},
        "binned": {"n": 300, "grid": 40}, "label": "step"
    })");
    CHECK(c.label == "step");
    CHECK(c.noise.family == lab::NoiseFamily::student_t);
    REQUIRE(c.binned.has_value());
    CHECK(c.binned->grid == 40);
    const Dataset d = generate(c, 2);
    CHECK(d.seed == 2);
    CHECK(d.axis_length == 40);
    CHECK(std::holds_alternative<BinnedSeries>(d.data));
}

TEST_CASE("config errors") {
    CHECK(code_of([] { parse_config_text("{ not json"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_config_text(R"({"scenario": "TEETH.gauss", "colour": 1})"); }) ==
          ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_config_text(R"({"scenario": "WAVES.gauss"})"); }) == ErrorCode::UnknownSignal);
    CHECK(code_of([] { parse_config_text(R"({"scenario": "TEETH.gauss", "method": "lasso"})"); }) ==
          ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_config_text(R"({"scenario": "TEETH.gauss", "replications": 0})"); }) ==
          ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_config_text(R"({"scenario": "TEETH.gauss", "hypers": {"delta": 1.5}})"); }) ==
          ErrorCode::InvalidConfig);
    CHECK(code_of([] {
              parse_config_text(R"({"signal": {"length": 10, "changepoints": [12], "levels": [0, 1]},
                                   "noise": {"family": "gaussian"}})");
          }) == ErrorCode::InvalidSignal);
    CHECK(code_of([] {
              parse_config_text(R"({"signal": "TEETH", "noise": {"family": "gaussian", "sd": -1}})");
          }) == ErrorCode::InvalidNoise);
    CHECK(code_of([] {
              parse_config_text(R"({"scenario": "TEETH.gauss", "binned": {"n": 100}, "method": "single"})");
          }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { load_config("/nonexistent/config.json"); }) == ErrorCode::IoError);
}

TEST_CASE("sigma modes") {
    CHECK(parse_sigma_mode("true").kind == SigmaMode::Kind::truth);
    const SigmaMode f = parse_sigma_mode("fixed:0.7");
    CHECK(f.kind == SigmaMode::Kind::fixed);
    CHECK(f.value == 0.7);
    CHECK(sigma_mode_text(f) == "fixed:0.7");
    CHECK_THROWS_AS(parse_sigma_mode("fixed:-1"), Error);
    CHECK_THROWS_AS(parse_sigma_mode("guess"), Error);
    const std::vector<double> y{1, 2, 3};
    CHECK(resolve_sigma(f, y, 5.0) == 0.7);
    CHECK(resolve_sigma(SigmaMode{}, y, 5.0) == 5.0);
}

TEST_CASE("csv input") {
    std::istringstream two("t,y\n1,0.5\n2,-1.25\n\n3,4\n");
    const InputData a = read_csv(two);
    CHECK(a.values == std::vector<double>{0.5, -1.25, 4.0});
    CHECK(a.bins.empty());

    std::istringstream three("t,y,bin\r\n0.1,1,1\r\n0.2,2,1\r\n0.3,3,4\r\n");
    const InputData b = read_csv(three);
    CHECK(b.bins == std::vector<std::size_t>{1, 1, 4});
}

TEST_CASE("csv errors name the line") {
    const auto parse = [](const char* text) {
        return [text] {
            std::istringstream in(text);
            read_csv(in);
        };
    };
    CHECK(message_of(parse("x,y\n1,2\n")).find("line 1") != std::string::npos);
    CHECK(message_of(parse("t,y\n1,2\n2,abc\n")).find("line 3") != std::string::npos);
    CHECK(message_of(parse("t,y\n1,2\n2\n")).find("line 3") != std::string::npos);
    CHECK(message_of(parse("t,y\n2,1\n1,2\n")).find("line 3") != std::string::npos);
    CHECK(message_of(parse("t,y,bin\n1,1,2\n2,1,1\n")).find("line 3") != std::string::npos);
    CHECK(message_of(parse("t,y,bin\n1,1,0\n")).find("line 2") != std::string::npos);
    CHECK(message_of(parse("t,y\n1,inf\n")).find("line 2") != std::string::npos);
    CHECK(code_of(parse("")) == ErrorCode::ParseError);
}

TEST_CASE("bench output is deterministic and independent of the job count") {
    const ExperimentConfig c = parse_config_text(R"({"scenario": "TEETH.gauss", "replications": 6, "seed": 3,
                                                     "sweep": {"delta": [1, 4]}})");
    const auto one = bench_csv(run_bench(c, 1), false);
    const auto four = bench_csv(run_bench(c, 4), false);
    CHECK(one == four);
    CHECK(one.starts_with("label,"));
    CHECK(one.find("TEETH.gauss/solo/delta=4,") != std::string::npos);
}

TEST_CASE("run_method maps binned sites to positions") {
    std::vector<std::vector<double>> bins;
    for (int b = 0; b < 40; ++b) bins.push_back({b < 20 ? 0.0 : 6.0, b < 20 ? 0.1 : 6.1});
    std::vector<std::size_t> positions;
    for (std::size_t b = 0; b < 40; ++b) positions.push_back(10 + 2 * b);
    const BinnedSeries s = BinnedSeries::from_bins(bins, 0.5, positions);
    const DetectionResult r =
        run_method(Method::solo, s, default_hypers(Method::solo, 40), gibbs::GibbsConfig{}, 0.05, 0);
    REQUIRE(r.selected.count() == 1);
    CHECK(r.selected[0] == 50);
    CHECK_THROWS_AS(run_method(Method::single, s, default_hypers(Method::single, 40), gibbs::GibbsConfig{}, 0.05, 0),
                    Error);
}

TEST_CASE("job resolution") {
    CHECK(resolve_jobs(3) == 3);
    CHECK_THROWS_AS(resolve_jobs(0), Error);
}

}  // TEST_SUITE
