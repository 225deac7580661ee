#include "commands.hpp"

#include "havok/bench.hpp"
#include "havok/errors.hpp"
#include "havok/io.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

namespace havok::cli {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream os(p);
    if (!os) throw ValidationError("cannot write file: " + p.string());
    return os;
}

struct DetectOpts {
    std::string input;
    std::string format = "csv";
    std::string column = "0";
    std::string truth_column;
    double ts = 1.0;
    std::string out;
    std::string dump_dir;
    bool traces_in_report = false;
    std::optional<int> M, r, L, bins, min_sep, detrend;
    std::optional<double> min_interval;
    bool auto_all = false;
    bool robust = false;
    bool two_sided = false;
    bool hilbert = false;
    std::string matched_filter;
    std::string method = "detachment";
    std::string scaling = "unit";
    double kappa = 3.0;
    std::uint64_t seed = 0;
    std::optional<long> tol;
};

PipelineConfig to_config(const DetectOpts& o) {
    PipelineConfig c;
    if (o.auto_all && (o.M || o.r || o.L)) throw ValidationError("--auto cannot be combined with --M, --r or --L");
    if (o.L) {
        if (*o.L < 2 || *o.L % 2 != 0) throw ValidationError("--L must be an even sector length >= 2");
        c.sector_halfwidth = *o.L / 2;
    }
    c.min_stimulus_interval = o.min_interval;
    c.memory_M = o.M;
    c.order_r = o.r;
    c.histogram_bins = o.bins;
    c.min_event_separation = o.min_sep;
    c.detrend_window = o.detrend;
    c.robust_median = o.robust;
    c.two_sided = o.two_sided;
    c.use_hilbert = o.hilbert;
    c.kappa = o.kappa;
    c.rng_seed = o.seed;
    if (!o.matched_filter.empty()) c.matched_filter = read_column(o.matched_filter);
    c.threshold_method = o.method == "mixture" ? ThresholdMethod::mixture_fit : ThresholdMethod::detachment;
    c.scaling = o.scaling == "none" ? Scaling::none : o.scaling == "standard" ? Scaling::standardize : Scaling::unit_variance;
    return c;
}

std::string fmt_snr(double peak, double noise) {
    if (!(noise > 0.0)) return "inf";
    std::ostringstream s;
    s.precision(3);
    s << 20.0 * std::log10(peak / noise);
    return s.str();
}

struct Stats {
    double mean = 0.0, sd = 0.0, lo = 0.0, hi = 0.0;
};

Stats stats(const std::vector<double>& v) {
    Stats s;
    if (v.empty()) return s;
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    for (double x : v) s.sd += (x - s.mean) * (x - s.mean);
    s.sd = v.size() > 1 ? std::sqrt(s.sd / static_cast<double>(v.size() - 1)) : 0.0;
    auto [a, b] = std::minmax_element(v.begin(), v.end());
    s.lo = *a;
    s.hi = *b;
    return s;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ValidationError("bad sweep value '" + tok + "'");
        }
    }
    if (out.empty()) throw ValidationError("empty sweep list");
    return out;
}

// run fn(i) for i in [0, n) on up to `jobs` threads; results land by index
template <class Fn>
std::vector<double> parallel_trials(int n, int jobs, Fn fn) {
    std::vector<double> out(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto worker = [&] {
        for (int i; (i = next++) < n;) {
            try {
                out[static_cast<std::size_t>(i)] = fn(i);
            } catch (...) {
                std::lock_guard lock(err_mu);
                if (!err) err = std::current_exception();
            }
        }
    };
    const int k = std::clamp(jobs, 1, std::max(1, n));
    std::vector<std::thread> pool;
    for (int t = 1; t < k; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
    return out;
}

}  // namespace

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("havok");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* lvl = std::getenv("HAVOK_DETECT_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));
}

Action add_detect(CLI::App& app) {
    auto o = std::make_shared<DetectOpts>();
    app.add_option("--input", o->input, "data file")->required();
    app.add_option("--format", o->format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
    app.add_option("--column", o->column, "value column (name or zero-based index)");
    app.add_option("--truth-column", o->truth_column, "truth flag column, used only for scoring");
    app.add_option("--ts", o->ts, "sample period in seconds");
    app.add_option("--out", o->out, "report JSON path (stdout when omitted)");
    app.add_option("--dump-traces", o->dump_dir, "directory for trace.csv, spectrum.csv, histogram.csv");
    app.add_flag("--traces-in-report", o->traces_in_report, "embed v, r_force and d arrays in the report");
    app.add_option("--M", o->M, "memory length");
    app.add_option("--r", o->r, "model order (>= 2)");
    app.add_option("--L", o->L, "sector length (even)");
    app.add_option("--min-interval", o->min_interval, "minimal stimulus interval in seconds, sets L when --L is absent");
    app.add_flag("--auto", o->auto_all, "select L, M and r automatically (the default)");
    app.add_flag("--robust", o->robust, "median-based features");
    app.add_flag("--two-sided", o->two_sided, "threshold |d - d0|");
    app.add_flag("--hilbert", o->hilbert, "use the Hilbert envelope of v + r");
    app.add_option("--matched-filter", o->matched_filter, "pulse shape file, one value per line");
    app.add_option("--bins", o->bins, "histogram bins");
    app.add_option("--method", o->method, "threshold method")->check(CLI::IsMember({"detachment", "mixture"}));
    app.add_option("--scaling", o->scaling, "feature scaling")->check(CLI::IsMember({"unit", "standard", "none"}));
    app.add_option("--min-sep", o->min_sep, "minimum event separation in samples");
    app.add_option("--detrend", o->detrend, "running-median window for v and r (0 disables)");
    app.add_option("--kappa", o->kappa, "density excess factor for the detachment point");
    app.add_option("--seed", o->seed, "recorded in the report");
    app.add_option("--tol", o->tol, "matching tolerance in samples when scoring against truth");

    return [o] {
        InputSpec spec;
        spec.path = o->input;
        spec.format = o->format == "jsonl" ? InputFormat::json_lines : InputFormat::csv;
        spec.value_column = o->column;
        spec.sample_period = o->ts;
        if (!o->truth_column.empty()) spec.truth_column = o->truth_column;
        if (!fs::exists(spec.path)) throw ValidationError("input file not found: " + spec.path.string());
        spdlog::info("reading {}", spec.path.string());
        const auto data = read_series(spec);
        const auto config = to_config(*o);
        const auto rep = run_pipeline(data.series, config);
        spdlog::info("M={} r={} L={} d_th={}", rep.memory_M, rep.order_r, 2 * rep.sector_halfwidth, rep.threshold.d_th);
        for (const auto& w : rep.warnings) spdlog::warn("{}", w);

        const auto json = report_to_json(rep, o->traces_in_report);
        if (o->out.empty() || o->out == "-") {
            std::cout << json << '\n';
        } else {
            auto os = open_out(o->out);
            os << json << '\n';
        }
        if (!o->dump_dir.empty()) {
            const fs::path dir(o->dump_dir);
            fs::create_directories(dir);
            auto t = open_out(dir / "trace.csv");
            write_trace_csv(t, rep.trace, rep.index_offset);
            auto s = open_out(dir / "spectrum.csv");
            for (double v : rep.singular_values) s << std::setprecision(17) << v << '\n';
            auto h = open_out(dir / "histogram.csv");
            write_histogram_csv(h, rep.histogram, rep.threshold);
        }
        std::ostream& summary = (o->out.empty() || o->out == "-") ? std::cerr : std::cout;
        summary << "events: " << rep.events.size() << "  M=" << rep.memory_M << " r=" << rep.order_r
                << " L=" << 2 * rep.sector_halfwidth << " d_th=" << rep.threshold.d_th;
        if (data.truth) {
            // flagged runs: single samples are event indices, longer runs are anomaly windows
            std::vector<Window> runs;
            const auto& flags = *data.truth;
            for (std::size_t i = 0; i < flags.size(); ++i) {
                if (flags[i] == 0.0) continue;
                const long a = static_cast<long>(i);
                while (i + 1 < flags.size() && flags[i + 1] != 0.0) ++i;
                runs.push_back({a, static_cast<long>(i)});
            }
            const bool windows = std::any_of(runs.begin(), runs.end(), [](const Window& w) { return w.second > w.first; });
            if (windows) {
                const long M = rep.memory_M;
                const auto sc = score_windows(rep.events, runs, M / 2, M);
                summary << "  windows=" << sc.hits << '/' << runs.size() << " false_windows=" << sc.false_windows;
            } else {
                std::vector<long> truth, peaks;
                for (const auto& w : runs) truth.push_back(w.first);
                for (const auto& e : rep.events) peaks.push_back(e.peak_index);
                const long tol = o->tol.value_or(rep.sector_halfwidth);
                summary << "  ER=" << error_ratio(peaks, truth, tol);
            }
        }
        summary << '\n';
        return 0;
    };
}

namespace {

struct SynthOpts {
    std::string scenario;
    std::string out;
    std::string truth;
    std::uint64_t seed = 0;
    // calcium
    std::optional<std::size_t> n;
    std::optional<double> ts, rate, noise, baseline, level, tau_rise, tau_decay;
    bool saturation = false;
    // ecg
    std::optional<int> period;
    int windows = 3;
    std::optional<double> distortion;
    // mud
    int slots = 200;
    std::optional<int> slot_len, pulse_len;
    std::optional<double> drift, impulsive;
};

void add_scenario_options(CLI::App& app, SynthOpts& o) {
    app.add_option("--seed", o.seed, "random seed");
    app.add_option("--n", o.n, "samples (calcium, ecg)");
    app.add_option("--ts", o.ts, "sample period in seconds");
    app.add_option("--rate", o.rate, "calcium spike rate in Hz");
    app.add_option("--noise", o.noise, "noise rms");
    app.add_option("--baseline", o.baseline, "calcium baseline random-walk step std");
    app.add_option("--level", o.level, "calcium baseline level");
    app.add_option("--tau-rise", o.tau_rise, "calcium kernel rise time in seconds");
    app.add_option("--tau-decay", o.tau_decay, "calcium kernel decay time in seconds");
    app.add_flag("--saturation", o.saturation, "calcium soft saturation s/(1+s)");
    app.add_option("--period", o.period, "ecg beat period in samples");
    app.add_option("--windows", o.windows, "ecg anomaly windows");
    app.add_option("--distortion", o.distortion, "ecg morph distortion");
    app.add_option("--slots", o.slots, "mud slots");
    app.add_option("--slot-len", o.slot_len, "mud slot length in samples");
    app.add_option("--pulse-len", o.pulse_len, "mud pulse length in samples");
    app.add_option("--drift", o.drift, "mud drift amplitude");
    app.add_option("--impulsive", o.impulsive, "mud impulsive noise rate");
}

CalciumParams calcium_params(const SynthOpts& o) {
    CalciumParams p;
    if (o.n) p.n_samples = *o.n;
    if (o.ts) p.sample_period = *o.ts;
    if (o.rate) p.rate_hz = *o.rate;
    if (o.noise) p.noise_rms = *o.noise;
    if (o.baseline) p.baseline = *o.baseline;
    if (o.level) p.baseline_level = *o.level;
    if (o.tau_rise) p.tau_rise = *o.tau_rise;
    if (o.tau_decay) p.tau_decay = *o.tau_decay;
    p.saturation = o.saturation;
    p.seed = o.seed;
    return p;
}

PeriodicParams ecg_params(const SynthOpts& o) {
    PeriodicParams p;
    if (o.n) p.n_samples = *o.n;
    if (o.ts) p.sample_period = *o.ts;
    if (o.period) p.beat_period = *o.period;
    if (o.noise) p.noise_rms = *o.noise;
    if (o.distortion) p.morph_distortion = *o.distortion;
    return ecg_trial_params(o.seed, o.windows, p);
}

PulseTrainParams mud_params(const SynthOpts& o) {
    PulseTrainParams p;
    if (o.slot_len) p.slot_len = *o.slot_len;
    if (o.pulse_len) p.pulse_shape = hann_pulse(*o.pulse_len);
    if (o.noise) p.noise_rms = *o.noise;
    if (o.drift) p.drift_amplitude = *o.drift;
    if (o.impulsive) p.impulsive_rate = *o.impulsive;
    if (o.ts) p.sample_period = *o.ts;
    if (o.slots < 1) throw ValidationError("--slots must be >= 1");
    return mud_trial_params(o.seed, static_cast<std::size_t>(o.slots), p);
}

}  // namespace

Action add_synth(CLI::App& app) {
    auto o = std::make_shared<SynthOpts>();
    app.add_option("scenario", o->scenario, "calcium, ecg or mud")->required()->check(CLI::IsMember({"calcium", "ecg", "mud"}));
    app.add_option("--out", o->out, "data CSV (value,truth)")->required();
    app.add_option("--truth", o->truth, "truth CSV (defaults to <out>.truth.csv)");
    add_scenario_options(app, *o);

    return [o] {
        Synthetic s = [&] {
            if (o->scenario == "calcium") return gen_calcium(calcium_params(*o));
            if (o->scenario == "ecg") return gen_periodic_anomaly(ecg_params(*o));
            return gen_pulse_train(mud_params(*o));
        }();
        double peak = 1.0, noise = 0.0;
        if (o->scenario == "calcium") {
            noise = calcium_params(*o).noise_rms;
        } else if (o->scenario == "ecg") {
            noise = ecg_params(*o).noise_rms;
        } else {
            const auto p = mud_params(*o);
            noise = p.noise_rms;
            peak = p.pulse_shape.empty() ? 1.0 : *std::max_element(p.pulse_shape.begin(), p.pulse_shape.end());
        }
        {
            auto os = open_out(o->out);
            write_synthetic_csv(os, s);
        }
        const fs::path truth = o->truth.empty() ? fs::path(o->out + ".truth.csv") : fs::path(o->truth);
        {
            auto os = open_out(truth);
            write_truth_csv(os, s.truth);
        }
        std::cout << "scenario=" << o->scenario << " N=" << s.series.size()
                  << " events=" << s.truth.event_indices.size() << " windows=" << s.truth.event_windows.size()
                  << " snr_db=" << fmt_snr(peak, noise) << " sample_period=" << s.series.sample_period() << '\n';
        return 0;
    };
}

Action add_bench(CLI::App& app) {
    struct BenchOpts {
        SynthOpts base;
        std::string sweep;
        int trials = 20;
        int jobs = 1;
        std::string out;
        bool no_matched_filter = false;
    };
    auto o = std::make_shared<BenchOpts>();
    app.add_option("scenario", o->base.scenario, "calcium, ecg or mud")->required()->check(CLI::IsMember({"calcium", "ecg", "mud"}));
    app.add_option("--sweep", o->sweep, "param=v1,v2,... (calcium: noise|rate|baseline|level, mud: noise|drift|impulsive, ecg: noise|distortion|period)");
    app.add_option("--trials", o->trials, "seeds per sweep point")->check(CLI::PositiveNumber);
    app.add_option("--jobs", o->jobs, "parallel trials")->check(CLI::PositiveNumber);
    app.add_option("--out", o->out, "CSV path (stdout when omitted)");
    app.add_flag("--no-matched-filter", o->no_matched_filter, "mud: run without the matched filter");
    add_scenario_options(app, o->base);

    return [o] {
        std::string param = "none";
        std::vector<double> values{std::nan("")};
        if (!o->sweep.empty()) {
            const auto eq = o->sweep.find('=');
            if (eq == std::string::npos) throw ValidationError("--sweep expects param=v1,v2,...");
            param = o->sweep.substr(0, eq);
            values = parse_list(o->sweep.substr(eq + 1));
        }
        static const std::map<std::string, std::vector<std::string>> allowed{
            {"calcium", {"noise", "rate", "baseline", "level"}},
            {"mud", {"noise", "drift", "impulsive"}},
            {"ecg", {"noise", "distortion", "period"}}};
        const auto& ok = allowed.at(o->base.scenario);
        if (param != "none" && std::find(ok.begin(), ok.end(), param) == ok.end())
            throw ValidationError("cannot sweep '" + param + "' for scenario " + o->base.scenario);

        std::ostringstream table;
        table << "scenario,param,value,metric,mean,std,min,max,trials\n";
        for (double v : values) {
            SynthOpts so = o->base;
            if (param == "noise") so.noise = v;
            if (param == "rate") so.rate = v;
            if (param == "baseline") so.baseline = v;
            if (param == "level") so.level = v;
            if (param == "drift") so.drift = v;
            if (param == "impulsive") so.impulsive = v;
            if (param == "distortion") so.distortion = v;
            if (param == "period") so.period = static_cast<int>(v);

            std::string metric;
            std::function<double(int)> trial;
            const std::uint64_t seed0 = so.seed;
            if (so.scenario == "calcium") {
                metric = "er";
                trial = [so, seed0](int i) {
                    auto s = so;
                    s.seed = seed0 + static_cast<std::uint64_t>(i);
                    return run_calcium_trial(calcium_params(s), calcium_config()).er;
                };
            } else if (so.scenario == "mud") {
                metric = "ber";
                const bool mf = !o->no_matched_filter;
                trial = [so, seed0, mf](int i) {
                    auto s = so;
                    s.seed = seed0 + static_cast<std::uint64_t>(i);
                    const auto p = mud_params(s);
                    return run_mud_trial(p, mud_config(mf, so.pulse_len.value_or(12))).ber;
                };
            } else {
                metric = "pass_rate";
                trial = [so, seed0](int i) {
                    auto s = so;
                    s.seed = seed0 + static_cast<std::uint64_t>(i);
                    const auto p = ecg_params(s);
                    return run_ecg_trial(p, ecg_config(p.beat_period)).pass ? 1.0 : 0.0;
                };
            }
            spdlog::info("{} {}={} x{}", so.scenario, param, v, o->trials);
            const auto st = stats(parallel_trials(o->trials, o->jobs, trial));
            table << so.scenario << ',' << param << ',';
            if (!std::isnan(v)) table << v;
            table << ',' << metric << ',' << st.mean << ',' << st.sd << ',' << st.lo << ',' << st.hi << ','
                  << o->trials << '\n';
        }
        if (o->out.empty() || o->out == "-") {
            std::cout << table.str();
        } else {
            auto os = open_out(o->out);
            os << table.str();
        }
        return 0;
    };
}

}  // namespace havok::cli
