#include "havok/detector.hpp"

#include "havok/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace havok {

namespace {

using json = nlohmann::ordered_json;

template <class F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string(name) + ": " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(std::string(name) + ": " + e.what());
    }
}

bool fits(long F, long N, long M) { return M >= 1 && F * M < N - M + 1; }

std::vector<int> candidate_Ms(const PipelineConfig& c, long F, long N, int h) {
    if (c.memory_M) return {*c.memory_M};
    std::vector<int> ok;
    for (int M : c.M_grid)
        if (fits(F, N, M)) ok.push_back(M);
    std::sort(ok.begin(), ok.end());
    ok.erase(std::unique(ok.begin(), ok.end()), ok.end());
    if (c.cap_M_by_sector) {
        std::vector<int> capped;
        for (int M : ok)
            if (M <= 2 * h) capped.push_back(M);
        if (capped.empty() && !ok.empty()) capped.push_back(ok.front());
        ok = std::move(capped);
    }
    if (ok.empty()) throw ValidationError("no memory length in the grid fits the series");
    return ok;
}

std::vector<int> candidate_rs(const PipelineConfig& c) {
    if (c.order_r) return {*c.order_r};
    std::vector<int> rs = c.r_grid;
    std::sort(rs.begin(), rs.end());
    rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
    return rs;
}

bool all_zero(const FeatureBank& bank) {
    for (const auto& f : bank.features())
        for (double x : f.samples())
            if (x != 0.0) return false;
    return true;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

template <class T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json("auto");
}

json config_json(const PipelineConfig& c) {
    json j;
    j["sector_halfwidth"] = optional_json(c.sector_halfwidth);
    j["min_stimulus_interval"] = c.min_stimulus_interval ? json(*c.min_stimulus_interval) : json(nullptr);
    j["memory_M"] = optional_json(c.memory_M);
    j["order_r"] = optional_json(c.order_r);
    j["M_grid"] = c.M_grid;
    j["r_grid"] = c.r_grid;
    j["cap_M_by_sector"] = c.cap_M_by_sector;
    j["robust_median"] = c.robust_median;
    j["matched_filter"] = c.matched_filter ? json(*c.matched_filter) : json(nullptr);
    j["scaling"] = to_string(c.scaling);
    j["detrend_window"] = optional_json(c.detrend_window);
    j["use_hilbert"] = c.use_hilbert;
    j["min_event_separation"] = optional_json(c.min_event_separation);
    j["histogram_bins"] = optional_json(c.histogram_bins);
    j["two_sided"] = c.two_sided;
    j["threshold_method"] = to_string(c.threshold_method);
    j["kappa"] = c.kappa;
    j["detach_run"] = c.detach_run;
    j["rng_seed"] = c.rng_seed;
    return j;
}

}  // namespace

std::string to_string(Scaling s) {
    switch (s) {
        case Scaling::none: return "none";
        case Scaling::unit_variance: return "unit_variance";
        case Scaling::standardize: return "standardize";
    }
    return "?";
}

std::string to_string(ThresholdMethod m) {
    return m == ThresholdMethod::mixture_fit ? "mixture_fit" : "detachment";
}

OrderSelection select_order(const FeatureBank& bank, std::span<const int> M_grid, std::span<const int> r_grid) {
    if (M_grid.empty() || r_grid.empty()) throw ValidationError("order selection: empty grid");
    std::vector<int> Ms(M_grid.begin(), M_grid.end()), rs(r_grid.begin(), r_grid.end());
    std::sort(Ms.begin(), Ms.end());
    std::sort(rs.begin(), rs.end());
    const long F = static_cast<long>(bank.count()), N = static_cast<long>(bank.length());

    OrderSelection best;
    best.error = std::numeric_limits<double>::infinity();
    bool any = false;
    for (int M : Ms) {
        if (!fits(F, N, M)) continue;
        const auto dec = decompose(build_hankel(bank, M));
        for (int r : rs) {
            if (r < 2 || r >= dec.modes()) continue;
            double err = std::numeric_limits<double>::infinity();
            try {
                const auto traj = trajectory(dec, r);
                err = normalized_reconstruction_error(fit_linear_model(traj), traj);
            } catch (const NumericalError&) {
            }
            best.table.push_back({M, r, err});
            if (std::isfinite(err) && (!any || err < best.error - 1e-12)) {
                best.M = M;
                best.r = r;
                best.error = err;
                any = true;
            }
        }
    }
    if (!any) throw ValidationError("order selection: every grid point is invalid for this series");
    return best;
}

int select_sector_halfwidth(double min_stimulus_interval, double sample_period) {
    if (!(min_stimulus_interval > 0.0)) throw ValidationError("min stimulus interval must be positive");
    if (!(sample_period > 0.0)) throw ValidationError("sample period must be positive");
    const double h = std::floor(min_stimulus_interval / (2.0 * sample_period));
    return static_cast<int>(std::max(2.0, std::min(h, 1e9)));
}

int resolve_sector_halfwidth(const PipelineConfig& c, double sample_period) {
    if (c.sector_halfwidth) return *c.sector_halfwidth;
    if (c.min_stimulus_interval) return select_sector_halfwidth(*c.min_stimulus_interval, sample_period);
    return kFallbackHalfwidth;
}

std::vector<Event> extract_events(std::span<const double> d, double d_th, int min_separation, bool two_sided,
                                  double d0) {
    const auto N = static_cast<long>(d.size());
    auto score = [&](long i) { return two_sided ? std::abs(d[static_cast<std::size_t>(i)] - d0) : d[static_cast<std::size_t>(i)]; };
    const double level = two_sided ? d_th - d0 : d_th;
    std::vector<Event> out;
    long i = 0;
    while (i < N) {
        if (!(score(i) >= level)) {
            ++i;
            continue;
        }
        long j = i;
        while (j + 1 < N && score(j + 1) >= level) ++j;
        long pk = i;
        for (long k = i + 1; k <= j; ++k)
            if (score(k) > score(pk)) pk = k;
        if (!out.empty() && i - out.back().end_index < min_separation) {
            auto& e = out.back();
            if (score(pk) > score(e.peak_index)) {
                e.peak_index = pk;
                e.peak_value = d[static_cast<std::size_t>(pk)];
            }
            e.end_index = j;
            e.kind = EventKind::interval;
        } else {
            out.push_back({i, pk, j, d[static_cast<std::size_t>(pk)], i == j ? EventKind::point : EventKind::interval});
        }
        i = j + 1;
    }
    return out;
}

DetectionReport run_pipeline(const TimeSeries& y, const PipelineConfig& config_in) {
    const PipelineConfig config = stage("config", [&] { return validate(config_in, y); });
    const long N = static_cast<long>(y.size());
    const int h = resolve_sector_halfwidth(config, y.sample_period());
    const auto bank = stage("features", [&] {
        const auto* w = config.matched_filter ? &*config.matched_filter : nullptr;
        return build_feature_bank(y, h, config.robust_median, w, config.scaling);
    });
    const long F = static_cast<long>(bank.count());
    std::vector<std::string> warnings;

    const auto Ms = stage("order selection", [&] { return candidate_Ms(config, F, N, h); });
    const auto rs = candidate_rs(config);
    const int sep = config.min_event_separation.value_or(h);
    const int detrend = config.detrend_window.value_or(20 * h + 1);

    if (all_zero(bank)) {
        // nothing varies: no modes to fit, nothing to detect
        const int M = Ms.front();
        const int r = rs.front();
        const auto K = static_cast<std::size_t>(N - M + 1);
        TimeSeries zeros(std::vector<double>(K, 0.0), y.sample_period());
        ThresholdModel tm;
        tm.d0 = 0.0;
        tm.sigma_d = 1.0;
        tm.d_th = 4.0;
        tm.no_anomaly = true;
        tm.method = config.threshold_method;
        tm.warnings.emplace_back("input has no variation");
        LinearModel lm;
        lm.A = Eigen::MatrixXd::Zero(r - 1, r - 1);
        lm.B = Eigen::VectorXd::Zero(r - 1);
        lm.order_r = r;
        lm.residual_index = r - 1;
        lm.sample_period = y.sample_period();
        warnings.emplace_back("input has no variation; no events");
        return DetectionReport{
            .events = {},
            .trace = DecisionTrace{zeros, zeros, zeros, config.use_hilbert},
            .threshold = tm,
            .histogram = build_histogram(zeros.samples(), config.histogram_bins),
            .model = lm,
            .memory_M = M,
            .order_r = r,
            .sector_halfwidth = h,
            .index_offset = M / 2,
            .min_event_separation = sep,
            .detrend_window = detrend,
            .singular_values = std::vector<double>(static_cast<std::size_t>(std::min<long>(F * M, N - M + 1)), 0.0),
            .dominance = std::numeric_limits<double>::infinity(),
            .selection = {},
            .config = config,
            .n_samples = y.size(),
            .sample_period = y.sample_period(),
            .start_time = y.start_time(),
            .warnings = warnings,
        };
    }

    OrderSelection sel;
    if (Ms.size() == 1 && rs.size() == 1) {
        sel.M = Ms.front();
        sel.r = rs.front();
    } else {
        sel = stage("order selection", [&] { return select_order(bank, Ms, rs); });
    }
    const int M = sel.M, r = sel.r;

    const auto dec = stage("embedding", [&] {
        auto d = decompose(build_hankel(bank, M));
        d.order_r = r;
        return d;
    });
    if (r >= dec.modes()) throw ValidationError("embedding: order r must be below the number of singular values");
    const auto traj = stage("embedding", [&] { return trajectory(dec, r); });
    const auto model = stage("dynamics", [&] { return fit_linear_model(traj); });
    const auto rec = reconstruct(model, traj.back(), [&] {
        Eigen::VectorXd s0(r - 1);
        for (int i = 0; i < r - 1; ++i) s0(i) = traj[static_cast<std::size_t>(i)][0];
        return s0;
    }());
    if (!std::isfinite(rec.max_abs) || rec.max_abs > 1e6 * std::max(1.0, dec.sigma(0)))
        warnings.emplace_back("linear model reconstruction diverges");

    // slow baseline removal on the modes that enter d
    std::vector<TimeSeries> used = traj;
    if (detrend > 0) {
        for (auto* t : {&used.front(), &used.back()}) {
            auto base = running_median(t->samples(), detrend);
            std::vector<double> v(t->values());
            for (std::size_t k = 0; k < v.size(); ++k) v[k] -= base[k];
            *t = t->with_values(std::move(v));
        }
    }
    auto trace = stage("dynamics", [&] { return decision_signal(used, model, config.use_hilbert); });

    ThresholdOptions topt;
    topt.bins = config.histogram_bins;
    topt.kappa = config.kappa;
    topt.run = config.detach_run;
    const auto d = trace.d.samples();
    auto thr = stage("threshold", [&] { return calibrate(d, config.threshold_method, topt); });
    auto hist = stage("threshold", [&] { return build_histogram(d, config.histogram_bins); });
    for (const auto& w : thr.warnings) warnings.push_back(w);

    const int offset = M / 2;
    auto events = extract_events(d, thr.d_th, sep, config.two_sided, thr.d0);
    for (auto& e : events) {
        e.onset_index += offset;
        e.peak_index += offset;
        e.end_index += offset;
    }

    std::vector<double> sv(dec.sigma.data(), dec.sigma.data() + dec.sigma.size());
    return DetectionReport{
        .events = std::move(events),
        .trace = std::move(trace),
        .threshold = std::move(thr),
        .histogram = std::move(hist),
        .model = model,
        .reconstruction_max_abs = rec.max_abs,
        .memory_M = M,
        .order_r = r,
        .sector_halfwidth = h,
        .index_offset = offset,
        .min_event_separation = sep,
        .detrend_window = detrend,
        .singular_values = std::move(sv),
        .dominance = dominance_ratio(dec),
        .selection = std::move(sel.table),
        .config = config,
        .n_samples = y.size(),
        .sample_period = y.sample_period(),
        .start_time = y.start_time(),
        .warnings = std::move(warnings),
    };
}

std::string report_to_json(const DetectionReport& rep, bool include_traces, int indent) {
    json j;
    j["schema_version"] = kReportSchemaVersion;
    j["n_samples"] = rep.n_samples;
    j["sample_period"] = rep.sample_period;
    j["start_time"] = rep.start_time;

    json ev = json::array();
    for (const auto& e : rep.events) {
        ev.push_back({{"onset_index", e.onset_index},
                      {"peak_index", e.peak_index},
                      {"end_index", e.end_index},
                      {"peak_time", rep.start_time + static_cast<double>(e.peak_index) * rep.sample_period},
                      {"peak_value", e.peak_value},
                      {"kind", e.kind == EventKind::point ? "point" : "interval"}});
    }
    j["events"] = std::move(ev);

    const auto& t = rep.threshold;
    j["threshold"] = {{"method", to_string(t.method)},
                      {"d_th", t.d_th},
                      {"w_G", t.w_G},
                      {"d0", t.d0},
                      {"sigma_d", t.sigma_d},
                      {"lambda", t.lambda},
                      {"rough", t.rough},
                      {"detachment", t.detachment},
                      {"no_anomaly", t.no_anomaly},
                      {"rough_fallback", t.rough_fallback},
                      {"core_fallback", t.core_fallback},
                      {"fit_fallback", t.fit_fallback},
                      {"iterations", t.iterations}};

    json sel = json::array();
    for (const auto& g : rep.selection) sel.push_back({{"M", g.M}, {"r", g.r}, {"error", number_or_null(g.error)}});
    j["decomposition"] = {{"memory_M", rep.memory_M},
                          {"order_r", rep.order_r},
                          {"singular_values", rep.singular_values},
                          {"dominance_ratio", number_or_null(rep.dominance)},
                          {"selection", std::move(sel)}};

    json A = json::array();
    for (Eigen::Index i = 0; i < rep.model.A.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < rep.model.A.cols(); ++k) row.push_back(rep.model.A(i, k));
        A.push_back(std::move(row));
    }
    std::vector<double> B(rep.model.B.data(), rep.model.B.data() + rep.model.B.size());
    const auto rate = rep.model.continuous_rate();
    j["linear_model"] = {{"A", std::move(A)},
                         {"B", B},
                         {"training_mse", rep.model.training_mse},
                         {"continuous_rate", rate ? json(*rate) : json(nullptr)},
                         {"reconstruction_max_abs", number_or_null(rep.reconstruction_max_abs)}};

    j["alignment"] = {{"index_offset", rep.index_offset},
                      {"sector_halfwidth", rep.sector_halfwidth},
                      {"min_event_separation", rep.min_event_separation},
                      {"detrend_window", rep.detrend_window}};
    j["config"] = config_json(rep.config);
    j["warnings"] = rep.warnings;
    if (include_traces) {
        j["trace"] = {{"hilbert_applied", rep.trace.hilbert_applied},
                      {"v", rep.trace.v.values()},
                      {"r_force", rep.trace.r_force.values()},
                      {"d", rep.trace.d.values()}};
    }
    return j.dump(indent);
}

}  // namespace havok
