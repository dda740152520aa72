// solocp: change point detection on CSV data, dataset simulation and
// benchmark runs. See README.md for the config and CSV formats.

#include <solocp/detection.hpp>
#include <solocp/experiment.hpp>
#include <solocp/signal_lab.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <algorithm>
#include <cmath>
#include <optional>

namespace fs = std::filesystem;
using namespace solocp;

namespace {

struct DetectArgs {
    std::string input;
    std::string method = "solo";
    std::string sigma = "mad";
    std::string out;
    std::string probs;
    std::string segments;
    std::optional<double> tau0_sq, tau1_sq, tau_sq, q, threshold;
    std::optional<std::size_t> delta;
    std::size_t iterations = 5000, burn_in = 1000, chains = 1;
    std::uint64_t seed = 0;
    double edge = 0.05;
};

struct SimulateArgs {
    std::string config;
    std::string out_dir;
};

struct BenchArgs {
    std::string config;
    std::string out;
    std::optional<std::size_t> jobs;
    bool omit_timing = false;
};

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    auto out = open_out(path);
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Builds the series the detectors see from parsed CSV input.
std::variant<TimeSeries, BinnedSeries> to_series(const exp::InputData& in, double sigma) {
    if (in.bins.empty()) return validate_series(in.values, sigma);
    std::vector<std::vector<double>> bins;
    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < in.values.size(); ++i) {
        if (positions.empty() || positions.back() != in.bins[i]) {
            positions.push_back(in.bins[i]);
            bins.emplace_back();
        }
        bins.back().push_back(in.values[i]);
    }
    for (const auto& b : bins) {
        for (double v : b) {
            if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "non-finite observation");
        }
    }
    return BinnedSeries::from_bins(bins, sigma, std::move(positions));
}

int run_detect(const DetectArgs& a) {
    const exp::Method method = exp::parse_method(a.method);
    const exp::SigmaMode mode = exp::parse_sigma_mode(a.sigma);
    if (mode.kind == exp::SigmaMode::Kind::truth) {
        throw Error(ErrorCode::InvalidConfig, "the true sigma is unknown for input data; use mad or fixed:<value>");
    }
    const exp::InputData in = exp::read_csv_file(a.input);
    if (in.values.size() < 3) throw Error(ErrorCode::TooShort, "need at least 3 observations");
    const double sigma = exp::resolve_sigma(mode, in.values, 1.0);
    const auto data = to_series(in, sigma);
    const std::size_t sites = std::visit(
        [](const auto& s) {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, TimeSeries>) return s.size();
            else return s.num_bins();
        },
        data);

    exp::HyperOverrides ov{a.tau0_sq, a.tau1_sq, a.tau_sq, a.q, a.threshold, a.delta};
    const Hyperparameters hypers = ov.apply(exp::default_hypers(method, sites));
    gibbs::GibbsConfig g{a.iterations, a.burn_in, a.seed, a.chains};
    const DetectionResult result = exp::run_method(method, data, hypers, g, a.edge, a.seed);

    write_text(a.out, exp::detection_report(result, method, sigma, hypers).dump(2) + "\n");

    // Site coordinates: the row index for t,y input, the bin id for t,y,bin input.
    std::vector<std::size_t> position(sites);
    std::vector<double> site_mean(sites);
    std::vector<double> site_count(sites);
    std::visit(
        [&](const auto& s) {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, TimeSeries>) {
                for (std::size_t t = 0; t < sites; ++t) {
                    position[t] = t + 1;
                    site_mean[t] = s[t];
                    site_count[t] = 1.0;
                }
            } else {
                for (std::size_t t = 0; t < sites; ++t) {
                    position[t] = s.positions()[t];
                    site_mean[t] = s.sums()[t];
                    site_count[t] = static_cast<double>(s.counts()[t]);
                }
            }
        },
        data);

    if (!a.probs.empty()) {
        std::string csv = "site,position,probability\n";
        for (std::size_t t = 0; t < result.probabilities.size(); ++t) {
            csv += std::to_string(t + 1) + "," + std::to_string(position[t]) + "," +
                   fmt(result.probabilities[t]) + "\n";
        }
        write_text(a.probs, csv);
    }
    if (!a.segments.empty()) {
        // Fitted means of the segments between consecutive selected locations.
        std::string csv = "start,end,mean\n";
        std::vector<std::size_t> starts{0};
        for (std::size_t t = 1; t < sites; ++t) {
            if (std::binary_search(result.selected.begin(), result.selected.end(), position[t])) {
                starts.push_back(t);
            }
        }
        starts.push_back(sites);
        for (std::size_t k = 0; k + 1 < starts.size(); ++k) {
            double sum = 0.0, n = 0.0;
            for (std::size_t t = starts[k]; t < starts[k + 1]; ++t) {
                sum += site_mean[t];
                n += site_count[t];
            }
            csv += std::to_string(position[starts[k]]) + "," + std::to_string(position[starts[k + 1] - 1]) +
                   "," + fmt(sum / n) + "\n";
        }
        write_text(a.segments, csv);
    }
    return 0;
}

int run_simulate(const SimulateArgs& a) {
    const exp::ExperimentConfig config = exp::load_config(a.config);
    std::error_code ec;
    fs::create_directories(a.out_dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create '" + a.out_dir + "': " + ec.message());

    nlohmann::json manifest;
    manifest["label"] = config.label;
    manifest["length"] = config.signal.length;
    manifest["changepoints"] = config.signal.changepoints;
    manifest["levels"] = config.signal.levels;
    if (config.signal.reported_k) manifest["reported_k"] = *config.signal.reported_k;
    manifest["noise"] = {{"family", std::string(lab::family_name(config.noise.family))},
                         {"sd", config.noise.analytic_sd()}};
    if (config.binned) {
        manifest["binned"] = {{"n", config.binned->n}, {"grid", config.binned->grid}};
    }
    nlohmann::json files = nlohmann::json::array();
    const int width = std::max<int>(3, static_cast<int>(std::to_string(config.replications - 1).size()));
    for (std::size_t r = 0; r < config.replications; ++r) {
        const exp::Dataset d = exp::generate(config, r);
        char name[64];
        std::snprintf(name, sizeof name, "rep_%0*zu.csv", width, r);
        std::string csv;
        std::visit(
            [&](const auto& s) {
                if constexpr (std::is_same_v<std::decay_t<decltype(s)>, TimeSeries>) {
                    csv = "t,y\n";
                    for (std::size_t t = 0; t < s.size(); ++t) csv += std::to_string(t + 1) + "," + fmt(s[t]) + "\n";
                } else {
                    csv = "t,y,bin\n";
                    std::size_t row = 0;
                    for (std::size_t b = 0; b < s.num_bins(); ++b) {
                        for (double v : s.bin(b)) {
                            csv += std::to_string(++row) + "," + fmt(v) + "," + std::to_string(s.positions()[b]) + "\n";
                        }
                    }
                }
            },
            d.data);
        write_text((fs::path(a.out_dir) / name).string(), csv);
        files.push_back({{"file", name}, {"seed", d.seed},
                         {"truth", std::vector<std::size_t>(d.truth.begin(), d.truth.end())}});
    }
    manifest["replications"] = files;
    write_text((fs::path(a.out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    return 0;
}

int run_bench_cmd(const BenchArgs& a) {
    const exp::ExperimentConfig config = exp::load_config(a.config);
    const auto rows = exp::run_bench(config, exp::resolve_jobs(a.jobs));
    write_text(a.out, exp::bench_csv(rows, !a.omit_timing));
    return 0;
}

int exit_code(ErrorCode code) { return 10 + static_cast<int>(code); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spike-and-slab change point detection"};
    app.require_subcommand(1);

    DetectArgs d;
    auto* detect = app.add_subcommand("detect", "Detect change points in a CSV series");
    detect->add_option("input", d.input, "CSV with header t,y or t,y,bin")->required();
    detect->add_option("--method", d.method, "solo, basad or single")->capture_default_str();
    detect->add_option("--sigma", d.sigma, "mad or fixed:<value>")->capture_default_str();
    detect->add_option("-o,--out", d.out, "JSON report path (default stdout)");
    detect->add_option("--probs", d.probs, "Write per-site probabilities as CSV");
    detect->add_option("--segments", d.segments, "Write fitted segment means as CSV");
    detect->add_option("--tau0-sq", d.tau0_sq, "Spike variance");
    detect->add_option("--tau1-sq", d.tau1_sq, "Slab variance");
    detect->add_option("--tau-sq", d.tau_sq, "Shrinkage variance of the other increments");
    detect->add_option("--q", d.q, "Prior inclusion probability");
    detect->add_option("--threshold", d.threshold, "Inclusion threshold");
    detect->add_option("--delta", d.delta, "Cluster radius");
    detect->add_option("--iterations", d.iterations, "Gibbs iterations (basad)")->capture_default_str();
    detect->add_option("--burn-in", d.burn_in, "Gibbs burn-in (basad)")->capture_default_str();
    detect->add_option("--chains", d.chains, "Gibbs chains (basad)")->capture_default_str();
    detect->add_option("--seed", d.seed, "Sampler seed (basad)")->capture_default_str();
    detect->add_option("--edge", d.edge, "Edge fraction excluded by the single locator")->capture_default_str();

    SimulateArgs s;
    auto* simulate = app.add_subcommand("simulate", "Write seeded replication datasets and a manifest");
    simulate->add_option("config", s.config, "JSON experiment config")->required();
    simulate->add_option("out_dir", s.out_dir, "Output directory")->required();

    BenchArgs b;
    auto* bench = app.add_subcommand("bench", "simulate, detect and evaluate; print the averaged table");
    bench->add_option("config", b.config, "JSON experiment config")->required();
    bench->add_option("-o,--out", b.out, "CSV output path (default stdout)");
    bench->add_option("-j,--jobs", b.jobs, "Parallel replications (default $SOLOCP_JOBS or 1)");
    bench->add_flag("--omit-timing", b.omit_timing, "Leave the time column empty for byte-stable output");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*detect) return run_detect(d);
        if (*simulate) return run_simulate(s);
        if (*bench) return run_bench_cmd(b);
    } catch (const Error& e) {
        std::cerr << "solocp: error: " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "solocp: internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
