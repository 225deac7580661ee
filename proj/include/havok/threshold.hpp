#pragma once

#include "havok/series.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace havok {

struct Histogram {
    std::vector<double> edges;   // B + 1, ascending
    std::vector<long> counts;    // B
    std::vector<double> density; // counts / (total * width)

    std::size_t bins() const noexcept { return counts.size(); }
    double width() const { return edges[1] - edges[0]; }
    double center(std::size_t i) const { return 0.5 * (edges[i] + edges[i + 1]); }
    long total() const;
};

struct RoughThreshold {
    double value = 0.0;
    double mode = 0.0;           // refined histogram mode d0
    double robust_sigma = 0.0;   // IQR / 1.349 from the histogram
    bool fallback = false;       // no symmetric core found; value = mode + 2 * robust_sigma
};

struct GaussianCore {
    double d0 = 0.0;
    double sigma = 0.0;
    long samples = 0;
};

struct Detachment {
    double value = 0.0;
    bool no_anomaly = false;     // nothing broke away; value = d0 + 4 sigma
};

struct ThresholdOptions {
    std::optional<int> bins;     // nullopt -> auto
    double tau_sym = 0.5;
    int sym_window = 3;
    double eps_density = 1e-6;   // relative to the peak density
    double kappa = 3.0;
    int run = 2;
    long min_count = 5;
    int max_iterations = 200;    // mixture fit
};

struct ThresholdModel {
    double w_G = 1.0;
    double d0 = 0.0;
    double sigma_d = 1.0;
    double lambda = 1.0;         // exponential rate
    double d_th = 0.0;
    ThresholdMethod method = ThresholdMethod::detachment;

    double rough = 0.0;
    double detachment = 0.0;
    bool no_anomaly = false;
    bool rough_fallback = false;
    bool core_fallback = false;  // too few core samples, median/MAD used instead
    bool fit_fallback = false;   // mixture fit abandoned, detachment model returned
    int iterations = 0;
    std::vector<std::string> warnings;

    // w_G N(x; d0, sigma_d) + (1 - w_G) lambda exp(-lambda (x - d_th)) [x >= d_th]
    double density(double x) const;
};

Histogram build_histogram(std::span<const double> d, std::optional<int> bins = std::nullopt);

RoughThreshold rough_threshold(const Histogram& h, const ThresholdOptions& opt = {});

// Truncated-normal fit to the samples inside [center - half_width, center + half_width].
GaussianCore fit_gaussian_core(std::span<const double> d, double center, double half_width);

Detachment detachment_threshold(const Histogram& h, double d0, double sigma_d, const ThresholdOptions& opt = {});

// histogram -> rough -> core -> detachment; the default calibration.
ThresholdModel calibrate_detachment(std::span<const double> d, const ThresholdOptions& opt = {});

// Maximum-likelihood mixture fit started from the detachment calibration.
ThresholdModel fit_mixture(std::span<const double> d, const ThresholdOptions& opt = {});

ThresholdModel calibrate(std::span<const double> d, ThresholdMethod method, const ThresholdOptions& opt = {});

void write_histogram_csv(std::ostream& os, const Histogram& h, const ThresholdModel& model);

}  // namespace havok
