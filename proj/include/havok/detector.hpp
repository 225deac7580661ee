#pragma once

#include "havok/dynamics.hpp"
#include "havok/embedding.hpp"
#include "havok/features.hpp"
#include "havok/series.hpp"
#include "havok/threshold.hpp"

#include <span>
#include <string>
#include <vector>

namespace havok {

enum class EventKind { point, interval };

struct Event {
    long onset_index = 0;
    long peak_index = 0;
    long end_index = 0;
    double peak_value = 0.0;
    EventKind kind = EventKind::point;

    friend bool operator==(const Event&, const Event&) = default;
};

struct GridPoint {
    int M = 0;
    int r = 0;
    double error = 0.0;  // normalized free-run reconstruction error, +inf when the fit failed
};

struct OrderSelection {
    int M = 0;
    int r = 0;
    double error = 0.0;
    std::vector<GridPoint> table;
};

// argmin over the grid of |v_hat - v|^2 / |v|^2; ties go to smaller M, then smaller r.
OrderSelection select_order(const FeatureBank& bank, std::span<const int> M_grid, std::span<const int> r_grid);

// L/2 = floor(interval / (2 Ts)), at least 2.
int select_sector_halfwidth(double min_stimulus_interval, double sample_period);
int resolve_sector_halfwidth(const PipelineConfig& config, double sample_period);

// Runs of d >= d_th (or |d - d0| >= d_th - d0 when two_sided). Runs whose gap is below
// min_separation are merged. Indices are positions in d.
std::vector<Event> extract_events(std::span<const double> d, double d_th, int min_separation, bool two_sided = false,
                                  double d0 = 0.0);

struct DetectionReport {
    std::vector<Event> events;  // indices in the original series
    DecisionTrace trace;        // index k of the trace sits at sample k + index_offset
    ThresholdModel threshold;
    Histogram histogram;
    LinearModel model;
    double reconstruction_max_abs = 0.0;

    int memory_M = 0;
    int order_r = 0;
    int sector_halfwidth = 0;
    int index_offset = 0;
    int min_event_separation = 0;
    int detrend_window = 0;
    std::vector<double> singular_values;
    double dominance = 0.0;
    std::vector<GridPoint> selection;

    PipelineConfig config;
    std::size_t n_samples = 0;
    double sample_period = 1.0;
    double start_time = 0.0;
    std::vector<std::string> warnings;
};

DetectionReport run_pipeline(const TimeSeries& y, const PipelineConfig& config);

inline constexpr int kReportSchemaVersion = 1;
std::string report_to_json(const DetectionReport& report, bool include_traces = false, int indent = 2);

std::string to_string(Scaling s);
std::string to_string(ThresholdMethod m);

}  // namespace havok
