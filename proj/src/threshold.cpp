#include "havok/threshold.hpp"

#include "havok/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace havok {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double phi(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }
double Phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_pdf(double x, double mu, double sd) { return phi((x - mu) / sd) / sd; }

double percentile(std::vector<double> sorted, double p) {
    std::sort(sorted.begin(), sorted.end());
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const auto j = std::min(i + 1, sorted.size() - 1);
    return sorted[i] + (pos - static_cast<double>(i)) * (sorted[j] - sorted[i]);
}

// quantile of the binned distribution, linear inside a bin
double hist_quantile(const Histogram& h, double p) {
    const double target = p * static_cast<double>(h.total());
    double acc = 0.0;
    for (std::size_t i = 0; i < h.bins(); ++i) {
        const double c = static_cast<double>(h.counts[i]);
        if (c > 0.0 && acc + c >= target) return h.edges[i] + (target - acc) / c * h.width();
        acc += c;
    }
    return h.edges.back();
}

// Smoothed mode, then mean shift with a flat window of one robust sigma.
double refined_mode(const Histogram& h, double s) {
    const auto B = h.bins();
    static constexpr int kernel[5] = {1, 2, 3, 2, 1};
    std::size_t arg = 0;
    long best = -1;
    for (std::size_t i = 0; i < B; ++i) {
        long acc = 0;
        for (int k = -2; k <= 2; ++k) {
            const long j = static_cast<long>(i) + k;
            if (j >= 0 && j < static_cast<long>(B)) acc += kernel[k + 2] * h.counts[static_cast<std::size_t>(j)];
        }
        if (acc > best) {
            best = acc;
            arg = i;
        }
    }
    double d0 = h.center(arg);
    for (int it = 0; it < 50; ++it) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < B; ++i) {
            const double c = h.center(i);
            if (std::abs(c - d0) <= s) {
                num += c * static_cast<double>(h.counts[i]);
                den += static_cast<double>(h.counts[i]);
            }
        }
        if (den <= 0.0) break;
        const double nd = num / den;
        const bool done = std::abs(nd - d0) <= 1e-9 * h.width();
        d0 = nd;
        if (done) break;
    }
    return d0;
}

double density_at(const Histogram& h, double x) {
    const double c0 = h.center(0);
    const double w = h.width();
    const double pos = (x - c0) / w;
    if (pos < 0.0 || pos > static_cast<double>(h.bins() - 1)) return 0.0;
    const auto i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= h.bins()) return h.density[h.bins() - 1];
    const double t = pos - static_cast<double>(i);
    return h.density[i] + t * (h.density[i + 1] - h.density[i]);
}

ThresholdModel detachment_model(std::span<const double> d, const GaussianCore& core, const RoughThreshold& rough,
                                const Detachment& det, bool core_fallback) {
    ThresholdModel m;
    m.method = ThresholdMethod::detachment;
    m.d0 = core.d0;
    m.sigma_d = core.sigma;
    m.d_th = det.value;
    m.rough = rough.value;
    m.detachment = det.value;
    m.no_anomaly = det.no_anomaly;
    m.rough_fallback = rough.fallback;
    m.core_fallback = core_fallback;
    long below = 0;
    double excess = 0.0;
    long above = 0;
    for (double x : d) {
        if (x < det.value) {
            ++below;
        } else {
            ++above;
            excess += x - det.value;
        }
    }
    m.w_G = static_cast<double>(below) / static_cast<double>(d.size());
    m.lambda = above > 0 && excess > 0.0 ? static_cast<double>(above) / excess : 1.0 / core.sigma;
    if (rough.fallback) m.warnings.emplace_back("rough threshold: no symmetric core found, used mode + 2 robust sigma");
    if (core_fallback) m.warnings.emplace_back("gaussian core: too few samples in the core region, used median/MAD");
    if (det.no_anomaly) m.warnings.emplace_back("no detachment from the gaussian core: no anomaly population found");
    return m;
}

struct Calibration {
    Histogram hist;
    RoughThreshold rough;
    GaussianCore core;
    Detachment det;
    bool core_fallback = false;
};

Calibration run_calibration(std::span<const double> d, const ThresholdOptions& opt) {
    Calibration c;
    c.hist = build_histogram(d, opt.bins);
    c.rough = rough_threshold(c.hist, opt);
    const double half = c.rough.value - c.rough.mode;
    try {
        c.core = fit_gaussian_core(d, c.rough.mode, half);
    } catch (const ValidationError&) {
        std::vector<double> v(d.begin(), d.end());
        const double med = percentile(v, 0.5);
        for (auto& x : v) x = std::abs(x - med);
        double mad = 1.4826 * percentile(v, 0.5);
        if (!(mad > 0.0)) mad = c.hist.width();
        c.core = {med, mad, 0};
        c.core_fallback = true;
    }
    c.det = detachment_threshold(c.hist, c.core.d0, c.core.sigma, opt);
    return c;
}

double mixture_loglik(std::span<const double> x, double w, double mu, double sd, double lam, double t) {
    double L = 0.0;
    for (double v : x) {
        double p = w * normal_pdf(v, mu, sd);
        if (v >= t) p += (1.0 - w) * lam * std::exp(-lam * (v - t));
        L += std::log(std::max(p, std::numeric_limits<double>::min()));
    }
    return L;
}

}  // namespace

long Histogram::total() const { return std::accumulate(counts.begin(), counts.end(), 0L); }

double ThresholdModel::density(double x) const {
    double p = w_G * normal_pdf(x, d0, sigma_d);
    if (x >= d_th && w_G < 1.0) p += (1.0 - w_G) * lambda * std::exp(-lambda * (x - d_th));
    return p;
}

Histogram build_histogram(std::span<const double> d, std::optional<int> bins) {
    const auto N = d.size();
    if (N < 10) throw ValidationError("histogram needs at least 10 samples");
    if (bins && *bins < 1) throw ValidationError("histogram bins must be >= 1");
    for (double x : d)
        if (!std::isfinite(x)) throw NumericalError("decision signal has non-finite values");
    auto [lo_it, hi_it] = std::minmax_element(d.begin(), d.end());
    double lo = *lo_it, hi = *hi_it;
    if (hi == lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    int B = 20;
    if (bins) {
        B = *bins;
    } else {
        std::vector<double> v(d.begin(), d.end());
        const double iqr = percentile(v, 0.75) - percentile(v, 0.25);
        if (iqr > 0.0) {
            const double width = 2.0 * iqr * std::pow(static_cast<double>(N), -1.0 / 3.0);
            B = static_cast<int>(std::clamp(std::ceil((hi - lo) / width), 20.0, 200.0));
        }
    }
    Histogram h;
    h.edges.resize(static_cast<std::size_t>(B) + 1);
    for (int i = 0; i <= B; ++i) h.edges[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / B;
    h.counts.assign(static_cast<std::size_t>(B), 0);
    const double w = (hi - lo) / B;
    for (double x : d) {
        auto i = static_cast<long>(std::floor((x - lo) / w));
        i = std::clamp(i, 0L, static_cast<long>(B) - 1);
        ++h.counts[static_cast<std::size_t>(i)];
    }
    h.density.resize(h.counts.size());
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        h.density[i] = static_cast<double>(h.counts[i]) / (static_cast<double>(N) * w);
    return h;
}

RoughThreshold rough_threshold(const Histogram& h, const ThresholdOptions& opt) {
    if (h.bins() < 20) throw ValidationError("rough threshold needs a histogram with at least 20 bins");
    const double w = h.width();
    RoughThreshold out;
    out.robust_sigma = std::max((hist_quantile(h, 0.75) - hist_quantile(h, 0.25)) / 1.349, w);
    out.mode = refined_mode(h, out.robust_sigma);
    const double eps = opt.eps_density * *std::max_element(h.density.begin(), h.density.end());

    // Right-excess asymmetry at each offset from the mode; the core ends where its
    // trailing average goes above tau.
    const int win = std::max(1, opt.sym_window);
    const double last = h.center(h.bins() - 1);
    std::vector<double> a;
    double best = out.mode;
    bool found = false;
    for (int k = 1; out.mode + k * w <= last; ++k) {
        const double r = density_at(h, out.mode + k * w);
        const double l = density_at(h, out.mode - k * w);
        a.push_back((r - l) / std::max({r, l, eps}));
        if (static_cast<int>(a.size()) >= win) {
            const double mean = std::accumulate(a.end() - win, a.end(), 0.0) / win;
            if (mean > opt.tau_sym) {
                if (k - win > 0) {
                    best = out.mode + (k - win) * w;
                    found = true;
                }
                break;
            }
        }
        best = out.mode + k * w;
        found = true;
    }
    if (!found) {
        out.value = out.mode + 2.0 * out.robust_sigma;
        out.fallback = true;
    } else {
        out.value = best;
    }
    return out;
}

GaussianCore fit_gaussian_core(std::span<const double> d, double center, double half_width) {
    if (!(half_width > 0.0)) throw ValidationError("gaussian core: empty inclusion region");
    const double lo = center - half_width, hi = center + half_width;
    std::vector<double> x;
    for (double v : d)
        if (v >= lo && v <= hi) x.push_back(v);
    if (x.size() < 30) throw ValidationError("gaussian core: too few core samples (" + std::to_string(x.size()) + ")");
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double sd_raw = std::sqrt(ss / n);
    if (!(sd_raw > 0.0)) throw ValidationError("gaussian core: zero variance");

    double mu = mean, sd = sd_raw;
    for (int it = 0; it < 20; ++it) {
        const double a = (lo - mu) / sd, b = (hi - mu) / sd;
        const double Z = Phi(b) - Phi(a);
        if (!(Z > 1e-12)) break;
        const double m1 = (phi(a) - phi(b)) / Z;
        const double var = 1.0 + (a * phi(a) - b * phi(b)) / Z - m1 * m1;
        if (!(var > 0.0)) break;
        const double mu_new = mean - sd * m1;
        const double sd_new = sd_raw / std::sqrt(var);
        const bool done = std::abs(mu_new - mu) < 1e-6 * sd && std::abs(sd_new - sd) < 1e-6 * sd;
        mu = mu_new;
        sd = sd_new;
        if (done) break;
    }
    if (!std::isfinite(mu) || !(sd > 0.0)) throw NumericalError("gaussian core fit diverged");
    return {mu, sd, static_cast<long>(x.size())};
}

Detachment detachment_threshold(const Histogram& h, double d0, double sigma_d, const ThresholdOptions& opt) {
    if (!(sigma_d > 0.0)) throw ValidationError("detachment: sigma must be positive");
    const int m = std::max(1, opt.run);
    int run = 0;
    for (std::size_t i = 0; i < h.bins(); ++i) {
        const double c = h.center(i);
        if (c <= d0 + sigma_d) continue;
        if (h.density[i] >= opt.kappa * normal_pdf(c, d0, sigma_d) && h.counts[i] >= opt.min_count)
            ++run;
        else
            run = 0;
        if (run >= m) return {h.center(i + 1 - static_cast<std::size_t>(m)), false};
    }
    return {d0 + 4.0 * sigma_d, true};
}

ThresholdModel calibrate_detachment(std::span<const double> d, const ThresholdOptions& opt) {
    const auto c = run_calibration(d, opt);
    return detachment_model(d, c.core, c.rough, c.det, c.core_fallback);
}

ThresholdModel fit_mixture(std::span<const double> d, const ThresholdOptions& opt) {
    if (d.size() < 500) throw ValidationError("mixture fit needs at least 500 samples");
    const auto c = run_calibration(d, opt);
    ThresholdModel base = detachment_model(d, c.core, c.rough, c.det, c.core_fallback);
    auto fallback = [&](const std::string& why) {
        ThresholdModel m = base;
        m.fit_fallback = true;
        if (m.no_anomaly) m.w_G = 1.0;
        m.warnings.push_back("mixture fit: " + why + ", kept the detachment model");
        return m;
    };
    if (c.core_fallback) return fallback("too few core samples");
    if (c.det.no_anomaly) return fallback("no tail population");

    const double sd0 = c.core.sigma;
    const double win_lo = c.det.value - 2.0 * sd0, win_hi = c.det.value + 2.0 * sd0;
    std::vector<double> x(d.begin(), d.end());
    std::sort(x.begin(), x.end());
    // samples below the window always sit in the gaussian branch; only the rest move with d_th
    const auto first_free = std::lower_bound(x.begin(), x.end(), win_lo);
    const std::span<const double> fixed(x.data(), static_cast<std::size_t>(first_free - x.begin()));
    const std::span<const double> free(x.data() + fixed.size(), x.size() - fixed.size());
    if (free.size() < 10) return fallback("too few tail samples");

    double w = base.w_G, mu = c.core.d0, sd = c.core.sigma, lam = base.lambda, t = c.det.value;
    const double n = static_cast<double>(x.size());
    std::vector<double> rg(x.size());
    double prev_ll = -std::numeric_limits<double>::infinity();

    for (int it = 1; it <= opt.max_iterations; ++it) {
        // E step
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double g = w * normal_pdf(x[i], mu, sd);
            const double e = x[i] >= t ? (1.0 - w) * lam * std::exp(-lam * (x[i] - t)) : 0.0;
            rg[i] = g + e > 0.0 ? g / (g + e) : (x[i] >= t ? 0.0 : 1.0);
        }
        // M step for the weight, gaussian and rate
        double sg = 0.0, sgx = 0.0, se = 0.0, sex = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sg += rg[i];
            sgx += rg[i] * x[i];
        }
        const double mu_new = sgx / sg;
        double sgv = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sgv += rg[i] * (x[i] - mu_new) * (x[i] - mu_new);
            if (x[i] >= t) {
                se += 1.0 - rg[i];
                sex += (1.0 - rg[i]) * (x[i] - t);
            }
        }
        const double w_new = sg / n;
        const double sd_new = std::sqrt(sgv / sg);
        const double lam_new = se > 0.0 && sex > 0.0 ? se / sex : lam;
        if (!(sd_new > 0.0) || !(w_new > 0.0) || !(w_new < 1.0)) return fallback("degenerate component");

        // shift update: profile the observed likelihood over d_th inside the window
        const double fixed_ll = mixture_loglik(fixed, w_new, mu_new, sd_new, lam_new, win_hi + 1.0);
        auto ll_at = [&](double tt) { return fixed_ll + mixture_loglik(free, w_new, mu_new, sd_new, lam_new, tt); };
        const double step = (win_hi - win_lo) / 100.0;
        double t_best = t, ll_best = -std::numeric_limits<double>::infinity();
        for (int k = 0; k <= 100; ++k) {
            const double tt = win_lo + k * step;
            const double ll = ll_at(tt);
            if (ll > ll_best) {
                ll_best = ll;
                t_best = tt;
            }
        }
        // between samples the likelihood rises with d_th, so the optimum sits on a sample value
        const auto a = std::lower_bound(free.begin(), free.end(), std::max(win_lo, t_best - step));
        const auto b = std::upper_bound(free.begin(), free.end(), std::min(win_hi, t_best + step));
        const long count = b - a;
        auto try_at = [&](long i) {
            const double ll = ll_at(a[i]);
            const bool better = ll > ll_best;
            if (better) {
                ll_best = ll;
                t_best = a[i];
            }
            return better;
        };
        if (count > 0) {
            const long stride = std::max(1L, count / 32);
            long at = -1;
            for (long i = 0; i < count; i += stride)
                if (try_at(i)) at = i;
            if (stride > 1 && at >= 0)
                for (long i = std::max(0L, at - stride + 1); i < std::min(count, at + stride); ++i)
                    if (i != at) try_at(i);
        }

        const double change = std::max({std::abs(w_new - w), std::abs(mu_new - mu) / sd_new,
                                        std::abs(sd_new - sd) / sd_new, std::abs(lam_new - lam) / lam_new,
                                        std::abs(t_best - t) / sd_new});
        w = w_new;
        mu = mu_new;
        sd = sd_new;
        lam = lam_new;
        t = t_best;
        const bool ll_flat = std::abs(ll_best - prev_ll) <= 1e-10 * std::abs(ll_best);
        prev_ll = ll_best;
        if (change < 1e-8 || (ll_flat && change < 1e-5)) {
            ThresholdModel m = base;
            m.method = ThresholdMethod::mixture_fit;
            m.w_G = w;
            m.d0 = mu;
            m.sigma_d = sd;
            m.lambda = lam;
            m.d_th = t;
            m.iterations = it;
            if (!(m.d_th > m.d0)) return fallback("threshold fell below the core mean");
            return m;
        }
    }
    return fallback("no convergence after " + std::to_string(opt.max_iterations) + " iterations");
}

ThresholdModel calibrate(std::span<const double> d, ThresholdMethod method, const ThresholdOptions& opt) {
    return method == ThresholdMethod::mixture_fit ? fit_mixture(d, opt) : calibrate_detachment(d, opt);
}

void write_histogram_csv(std::ostream& os, const Histogram& h, const ThresholdModel& model) {
    const auto old = os.precision(17);
    os << "bin_center,empirical_density,fitted_density\n";
    for (std::size_t i = 0; i < h.bins(); ++i)
        os << h.center(i) << ',' << h.density[i] << ',' << model.density(h.center(i)) << '\n';
    os.precision(old);
}

}  // namespace havok
