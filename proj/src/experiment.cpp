#include <solocp/experiment.hpp>

#include <solocp/detection.hpp>
#include <solocp/solo_posterior.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <type_traits>

namespace solocp::exp {

using nlohmann::json;

namespace {

[[noreturn]] void bad_config(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        bad_config(std::string("field '") + key + "' has the wrong type");
    }
}

lab::SignalSpec parse_signal(const json& node) {
    if (node.is_string()) return lab::builtin_signal(node.get<std::string>());
    if (!node.is_object()) bad_config("signal must be a builtin name or an object");
    lab::SignalSpec s;
    s.length = get_or<std::size_t>(node, "length", 0);
    s.changepoints = get_or<std::vector<std::size_t>>(node, "changepoints", {});
    s.levels = get_or<std::vector<double>>(node, "levels", {});
    s.validate();
    return s;
}

lab::NoiseSpec parse_noise(const json& node) {
    if (!node.is_object()) bad_config("noise must be an object");
    const auto family = lab::parse_family(get_or<std::string>(node, "family", "gaussian"));
    switch (family) {
    case lab::NoiseFamily::gaussian: return lab::NoiseSpec::gaussian(get_or(node, "sd", 1.0));
    case lab::NoiseFamily::laplace: return lab::NoiseSpec::laplace(get_or(node, "dispersion", 1.0));
    case lab::NoiseFamily::student_t:
        return lab::NoiseSpec::student_t(get_or(node, "df", 4.0), get_or(node, "scale", 1.0));
    case lab::NoiseFamily::gaussian_mixture:
        return lab::NoiseSpec::mixture(get_or<std::vector<double>>(node, "weights", {}),
                                       get_or<std::vector<double>>(node, "sds", {}));
    }
    bad_config("unreachable noise family");
}

template <class Series>
DetectionResult with_positions(DetectionResult r, const Series&) {
    return r;
}

DetectionResult with_positions(DetectionResult r, const BinnedSeries& series) {
    r.raw_candidates = to_positions(r.raw_candidates, series);
    r.selected = to_positions(r.selected, series);
    for (auto& group : r.clusters.groups) {
        for (auto& s : group) s = series.positions()[s - 1];
    }
    return r;
}

std::string format_value(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

std::string_view method_name(Method m) noexcept {
    switch (m) {
    case Method::solo: return "solo";
    case Method::basad: return "basad";
    case Method::single: return "single";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    for (auto m : {Method::solo, Method::basad, Method::single}) {
        if (method_name(m) == name) return m;
    }
    bad_config("unknown method '" + std::string(name) + "' (expected solo, basad or single)");
}

SigmaMode parse_sigma_mode(std::string_view text) {
    SigmaMode mode;
    if (text == "true") return mode;
    if (text == "mad") {
        mode.kind = SigmaMode::Kind::mad;
        return mode;
    }
    constexpr std::string_view prefix = "fixed:";
    if (text.starts_with(prefix)) {
        const std::string_view num = text.substr(prefix.size());
        double v = 0.0;
        const auto [end, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
        if (ec == std::errc{} && end == num.data() + num.size() && v > 0.0 && std::isfinite(v)) {
            mode.kind = SigmaMode::Kind::fixed;
            mode.value = v;
            return mode;
        }
    }
    bad_config("sigma must be 'true', 'mad' or 'fixed:<positive value>', got '" + std::string(text) + "'");
}

std::string sigma_mode_text(const SigmaMode& mode) {
    switch (mode.kind) {
    case SigmaMode::Kind::truth: return "true";
    case SigmaMode::Kind::mad: return "mad";
    case SigmaMode::Kind::fixed: return "fixed:" + format_value(mode.value);
    }
    return "true";
}

Hyperparameters HyperOverrides::apply(Hyperparameters base) const {
    if (tau0_sq) base.tau0_sq = *tau0_sq;
    if (tau1_sq) base.tau1_sq = *tau1_sq;
    if (tau_sq) base.tau_sq = *tau_sq;
    if (q) base.q = *q;
    if (threshold) base.threshold = *threshold;
    if (delta) base.delta = *delta;
    base.validate();
    return base;
}

void ExperimentConfig::validate() const {
    signal.validate();
    noise.validate();
    if (replications == 0) bad_config("replications must be at least 1");
    if (binned) {
        if (binned->grid < 2) bad_config("binned.grid must be at least 2");
        if (binned->n < 2) bad_config("binned.n must be at least 2");
        if (method == Method::single) bad_config("the single locator needs unit-count data");
    }
    if (method == Method::basad) gibbs.validate();
    if (method == Method::single && !(edge > 0.0 && edge < 0.5)) bad_config("edge must lie in (0, 1/2)");
    if (sweep) {
        if (sweep->parameter != "delta" && sweep->parameter != "q") {
            bad_config("sweep parameter must be 'delta' or 'q'");
        }
        if (sweep->values.empty()) bad_config("sweep needs at least one value");
        for (double v : sweep->values) {
            if (sweep->parameter == "delta" && (v < 0.0 || v != std::floor(v))) {
                bad_config("delta sweep values must be non-negative integers");
            }
        }
    }
}

ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) bad_config("config must be a JSON object");
    static const char* known[] = {"label", "signal", "noise", "scenario", "binned", "method",
                                  "replications", "seed", "sigma", "hypers", "gibbs", "sweep", "edge"};
    for (const auto& [key, _] : doc.items()) {
        if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) ==
            std::end(known)) {
            bad_config("unknown config field '" + key + "'");
        }
    }

    ExperimentConfig c;
    if (doc.contains("scenario")) {
        if (doc.contains("signal") || doc.contains("noise")) {
            bad_config("give either scenario or signal + noise, not both");
        }
        const auto name = get_or<std::string>(doc, "scenario", "");
        auto sc = lab::builtin_scenario(name);
        c.signal = std::move(sc.signal);
        c.noise = std::move(sc.noise);
        c.label = name;
    } else {
        if (!doc.contains("signal") || !doc.contains("noise")) {
            bad_config("config needs scenario, or both signal and noise");
        }
        c.signal = parse_signal(doc.at("signal"));
        c.noise = parse_noise(doc.at("noise"));
        c.label = doc.at("signal").is_string() ? doc.at("signal").get<std::string>() : "custom";
    }
    c.label = get_or<std::string>(doc, "label", c.label);

    if (doc.contains("binned")) {
        const json& b = doc.at("binned");
        if (!b.is_object()) bad_config("binned must be an object");
        c.binned = Binning{get_or<std::size_t>(b, "n", 1024), get_or<std::size_t>(b, "grid", 200)};
    }
    c.method = parse_method(get_or<std::string>(doc, "method", "solo"));
    c.replications = get_or<std::size_t>(doc, "replications", 1);
    c.seed = get_or<std::uint64_t>(doc, "seed", 0);
    c.sigma = parse_sigma_mode(get_or<std::string>(doc, "sigma", "true"));
    c.edge = get_or(doc, "edge", 0.05);

    if (doc.contains("hypers")) {
        const json& h = doc.at("hypers");
        if (!h.is_object()) bad_config("hypers must be an object");
        for (const auto& [key, value] : h.items()) {
            if (!value.is_number()) bad_config("hyperparameter '" + key + "' must be a number");
            const double v = value.get<double>();
            if (key == "tau0_sq") c.hypers.tau0_sq = v;
            else if (key == "tau1_sq") c.hypers.tau1_sq = v;
            else if (key == "tau_sq") c.hypers.tau_sq = v;
            else if (key == "q") c.hypers.q = v;
            else if (key == "threshold") c.hypers.threshold = v;
            else if (key == "delta") {
                if (v < 0.0 || v != std::floor(v)) bad_config("delta must be a non-negative integer");
                c.hypers.delta = static_cast<std::size_t>(v);
            } else bad_config("unknown hyperparameter '" + key + "'");
        }
    }
    if (doc.contains("gibbs")) {
        const json& g = doc.at("gibbs");
        c.gibbs.iterations = get_or<std::size_t>(g, "iterations", c.gibbs.iterations);
        c.gibbs.burn_in = get_or<std::size_t>(g, "burn_in", c.gibbs.burn_in);
        c.gibbs.chains = get_or<std::size_t>(g, "chains", c.gibbs.chains);
    }
    if (doc.contains("sweep")) {
        const json& s = doc.at("sweep");
        if (!s.is_object() || s.size() != 1) bad_config("sweep must hold exactly one parameter");
        const auto& [key, values] = *s.items().begin();
        c.sweep = Sweep{key, {}};
        try {
            c.sweep->values = values.get<std::vector<double>>();
        } catch (const json::exception&) {
            bad_config("sweep values must be a list of numbers");
        }
    }
    c.validate();
    return c;
}

ExperimentConfig parse_config_text(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
    }
    return parse_config(doc);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

Hyperparameters default_hypers(Method method, std::size_t sites) {
    return method == Method::basad ? Hyperparameters::basad_defaults(sites)
                                   : Hyperparameters::solo_defaults(sites);
}

Dataset generate(const ExperimentConfig& config, std::size_t replication) {
    const std::uint64_t seed = config.seed + replication;
    if (config.binned) {
        return {seed,
                lab::simulate_binned(config.signal, config.noise, config.binned->n, config.binned->grid, seed),
                lab::binned_truth(config.signal, config.binned->grid), config.binned->grid};
    }
    return {seed, lab::simulate(config.signal, config.noise, seed), config.signal.truth(),
            config.signal.length};
}

double resolve_sigma(const SigmaMode& mode, std::span<const double> values, double true_sd) {
    switch (mode.kind) {
    case SigmaMode::Kind::truth: return true_sd;
    case SigmaMode::Kind::fixed: return mode.value;
    case SigmaMode::Kind::mad: {
        const double s = lab::estimate_sigma_mad(values);
        if (!(s > 0.0)) throw Error(ErrorCode::NonPositiveSigma, "MAD estimate of sigma is zero");
        return s;
    }
    }
    return true_sd;
}

DetectionResult run_method(Method method, const std::variant<TimeSeries, BinnedSeries>& data,
                           const Hyperparameters& hypers, const gibbs::GibbsConfig& gibbs_config,
                           double edge, std::uint64_t seed) {
    return std::visit(
        [&](const auto& series) -> DetectionResult {
            using S = std::decay_t<decltype(series)>;
            switch (method) {
            case Method::solo: return with_positions(detect(series, hypers), series);
            case Method::basad: {
                gibbs::GibbsConfig g = gibbs_config;
                g.seed = seed;
                return with_positions(
                    detect_from_probabilities(gibbs::gibbs_inclusion_probabilities(series, hypers, g), hypers),
                    series);
            }
            case Method::single: {
                if constexpr (std::is_same_v<S, TimeSeries>) {
                    const SingleChangePoint cp = single_cp_locate(series, hypers, edge);
                    DetectionResult r;
                    r.selected = ChangePointSet({cp.site});
                    r.raw_candidates = r.selected;
                    r.clusters.groups = {{cp.site}};
                    return r;
                } else {
                    bad_config("the single locator needs unit-count data");
                }
            }
            }
            bad_config("unknown method");
        },
        data);
}

std::vector<BenchRow> run_bench(const ExperimentConfig& config, std::size_t jobs) {
    config.validate();
    std::vector<double> sweep_values = config.sweep ? config.sweep->values : std::vector<double>{0.0};
    const std::size_t reps = config.replications;
    const std::size_t cells = sweep_values.size();

    struct Cell {
        metrics::EvalReport report;
        double seconds = 0.0;
    };
    std::vector<Cell> results(reps * cells);
    std::exception_ptr failure;
    std::mutex failure_mutex;

#pragma omp parallel for schedule(dynamic, 1) num_threads(static_cast<int>(std::max<std::size_t>(1, jobs)))
    for (std::size_t r = 0; r < reps; ++r) {
        try {
            Dataset d = generate(config, r);
            std::visit(
                [&](auto& series) {
                    const double sd = resolve_sigma(config.sigma, series.values(), series.noise_sd());
                    series = series.with_noise_sd(sd);
                },
                d.data);
            const std::size_t sites = std::visit([](const auto& s) {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, TimeSeries>) return s.size();
                else return s.num_bins();
            }, d.data);
            for (std::size_t c = 0; c < cells; ++c) {
                HyperOverrides ov = config.hypers;
                if (config.sweep) {
                    if (config.sweep->parameter == "delta") ov.delta = static_cast<std::size_t>(sweep_values[c]);
                    else ov.q = sweep_values[c];
                }
                const Hyperparameters h = ov.apply(default_hypers(config.method, sites));
                const auto start = std::chrono::steady_clock::now();
                const DetectionResult det = run_method(config.method, d.data, h, config.gibbs, config.edge, d.seed);
                const double secs =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                results[r * cells + c] = {metrics::evaluate(det.selected, d.truth, d.axis_length), secs};
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<BenchRow> rows;
    for (std::size_t c = 0; c < cells; ++c) {
        metrics::Aggregate agg;
        for (std::size_t r = 0; r < reps; ++r) agg.add(results[r * cells + c].report, results[r * cells + c].seconds);
        std::string label = config.label + "/" + std::string(method_name(config.method));
        if (config.sweep) label += "/" + config.sweep->parameter + "=" + format_value(sweep_values[c]);
        rows.push_back({std::move(label), agg.finalized()});
    }
    return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows, bool with_time) {
    std::string out = "label," + metrics::csv_header() + ",replications,sentinel_hits\n";
    for (const auto& row : rows) {
        out += row.label + "," + metrics::csv_row(row.mean, with_time) + "," +
               std::to_string(row.mean.replications) + "," + std::to_string(row.mean.sentinel_hits) + "\n";
    }
    return out;
}

InputData read_csv(std::istream& in) {
    InputData data;
    std::string line;
    std::size_t line_no = 0;
    std::size_t columns = 0;
    const auto fail = [&](const std::string& what) -> void {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + what);
    };
    const auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string field;
        std::istringstream is(s);
        while (std::getline(is, field, ',')) {
            while (!field.empty() && (field.back() == ' ' || field.back() == '\r')) field.pop_back();
            std::size_t lead = field.find_first_not_of(' ');
            out.push_back(lead == std::string::npos ? std::string{} : field.substr(lead));
        }
        if (!s.empty() && s.back() == ',') out.emplace_back();
        return out;
    };
    const auto number = [&](const std::string& field, const char* name) {
        double v = 0.0;
        const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (field.empty() || ec != std::errc{} || end != field.data() + field.size() || !std::isfinite(v)) {
            fail(std::string("column ") + name + " is not a finite number: '" + field + "'");
        }
        return v;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split(line);
        if (columns == 0) {
            if (fields == std::vector<std::string>{"t", "y"}) columns = 2;
            else if (fields == std::vector<std::string>{"t", "y", "bin"}) columns = 3;
            else fail("header must be 't,y' or 't,y,bin'");
            continue;
        }
        if (fields.size() != columns) {
            fail("expected " + std::to_string(columns) + " fields, found " + std::to_string(fields.size()));
        }
        const double t = number(fields[0], "t");
        if (!data.times.empty() && t <= data.times.back()) fail("t must be strictly increasing");
        data.times.push_back(t);
        data.values.push_back(number(fields[1], "y"));
        if (columns == 3) {
            const double b = number(fields[2], "bin");
            if (b < 1.0 || b != std::floor(b)) fail("bin must be a positive integer");
            const auto bin = static_cast<std::size_t>(b);
            if (!data.bins.empty() && bin < data.bins.back()) fail("bin ids must be non-decreasing");
            data.bins.push_back(bin);
        }
    }
    if (columns == 0) {
        line_no = std::max<std::size_t>(line_no, 1);
        fail("missing header");
    }
    return data;
}

InputData read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open input '" + path.string() + "'");
    return read_csv(in);
}

json detection_report(const DetectionResult& result, Method method, double sigma,
                      const Hyperparameters& hypers) {
    json j;
    j["locations"] = std::vector<std::size_t>(result.selected.begin(), result.selected.end());
    j["count"] = result.selected.count();
    j["probabilities"] = result.probabilities;
    j["clusters"] = result.clusters.groups;
    j["sigma_used"] = sigma;
    j["method"] = std::string(method_name(method));
    j["hypers"] = {{"tau0_sq", hypers.tau0_sq}, {"tau1_sq", hypers.tau1_sq}, {"tau_sq", hypers.tau_sq},
                   {"q", hypers.q},             {"threshold", hypers.threshold},
                   {"delta", hypers.delta}};
    return j;
}

std::size_t resolve_jobs(std::optional<std::size_t> requested) {
    if (requested) {
        if (*requested == 0) bad_config("--jobs must be at least 1");
        return *requested;
    }
    if (const char* env = std::getenv("SOLOCP_JOBS")) {
        std::size_t v = 0;
        const std::string_view s(env);
        const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc{} && end == s.data() + s.size() && v > 0) return v;
        bad_config("SOLOCP_JOBS must be a positive integer, got '" + std::string(s) + "'");
    }
    return 1;
}

}  // namespace solocp::exp
