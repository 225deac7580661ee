#pragma once

#include "havok/series.hpp"

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace havok {

// Discrete one-step model s[k+1] = A s[k] + B r[k], s = (v_1 .. v_{r-1}), r = v_r.
struct LinearModel {
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
    int order_r = 2;
    double sample_period = 1.0;
    int residual_index = 1;
    double training_mse = 0.0;  // one-step-ahead, averaged over steps and state components

    // log(A)/Ts for a scalar, positive A
    std::optional<double> continuous_rate() const;
};

struct Reconstruction {
    Eigen::MatrixXd states;  // one row per time step
    double max_abs = 0.0;    // divergence diagnostic
};

struct DecisionTrace {
    TimeSeries v;
    TimeSeries r_force;
    TimeSeries d;
    bool hilbert_applied = false;
};

LinearModel fit_linear_model(const std::vector<TimeSeries>& traj);

Reconstruction reconstruct(const LinearModel& model, const TimeSeries& r_force, const Eigen::VectorXd& s0);

// Free-run reconstruction error |v_hat - v|^2 / |v|^2 over the state components.
double normalized_reconstruction_error(const LinearModel& model, const std::vector<TimeSeries>& traj);

DecisionTrace decision_signal(const std::vector<TimeSeries>& traj, const LinearModel& model, bool use_hilbert);

// |x + iH[x]| of the mean-removed input, exact length (no padding).
TimeSeries hilbert_envelope(const TimeSeries& x);
std::vector<double> hilbert_envelope(std::span<const double> x);

// Sliding median with edge replication. Even windows are widened by one.
std::vector<double> running_median(std::span<const double> x, int window);

void write_trace_csv(std::ostream& os, const DecisionTrace& trace, int index_offset = 0);

}  // namespace havok
