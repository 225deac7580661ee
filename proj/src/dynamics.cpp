#include "havok/dynamics.hpp"

#include "havok/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <ostream>

namespace havok {

namespace {

Eigen::MatrixXd stack(const std::vector<TimeSeries>& traj, std::size_t first, std::size_t count) {
    const auto K = traj.front().size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(count));
    for (std::size_t c = 0; c < count; ++c)
        for (std::size_t k = 0; k < K; ++k) m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = traj[first + c][k];
    return m;
}

void check_traj(const std::vector<TimeSeries>& traj) {
    if (traj.size() < 2) throw ValidationError("linear model needs r >= 2 trajectory components");
    const auto K = traj.front().size();
    for (const auto& t : traj)
        if (t.size() != K) throw ValidationError("trajectory components differ in length");
    if (K < 2 * (traj.size() - 1) + 2) throw ValidationError("trajectory too short for order r=" + std::to_string(traj.size()));
}

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(fftw_complex* p) const { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

FftwBuffer fftw_buffer(std::size_t n) {
    auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (!p) throw NumericalError("FFT buffer allocation failed");
    return FftwBuffer(p);
}

class Plan {
public:
    Plan(int n, fftw_complex* in, fftw_complex* out, int sign) {
        std::lock_guard lock(fftw_planner_mutex());
        p_ = fftw_plan_dft_1d(n, in, out, sign, FFTW_ESTIMATE);
        if (!p_) throw NumericalError("FFT planning failed");
    }
    ~Plan() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(p_);
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    void run() const { fftw_execute(p_); }

private:
    fftw_plan p_;
};

}  // namespace

std::optional<double> LinearModel::continuous_rate() const {
    if (A.rows() == 1 && A(0, 0) > 0.0) return std::log(A(0, 0)) / sample_period;
    return std::nullopt;
}

LinearModel fit_linear_model(const std::vector<TimeSeries>& traj) {
    check_traj(traj);
    const auto r = traj.size();
    const auto p = static_cast<Eigen::Index>(r - 1);
    const Eigen::MatrixXd S = stack(traj, 0, r - 1);
    const Eigen::MatrixXd f = stack(traj, r - 1, 1);
    const Eigen::Index K = S.rows();

    const Eigen::MatrixXd Sk = S.topRows(K - 1);
    const Eigen::MatrixXd Y = S.bottomRows(K - 1);
    const Eigen::VectorXd fk = f.col(0).head(K - 1);

    for (Eigen::Index c = 0; c < p; ++c)
        if (Sk.col(c).squaredNorm() == 0.0)
            throw NumericalError("degenerate regression: state mode v" + std::to_string(c + 1) + " is identically zero");

    LinearModel m;
    m.order_r = static_cast<int>(r);
    m.residual_index = static_cast<int>(r - 1);
    m.sample_period = traj.front().sample_period();

    const bool zero_forcing = fk.squaredNorm() == 0.0;
    Eigen::MatrixXd X(K - 1, zero_forcing ? p : p + 1);
    X.leftCols(p) = Sk;
    if (!zero_forcing) X.col(p) = fk;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < X.cols()) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qs(Sk);
        if (qs.rank() < p) throw NumericalError("degenerate regression: state modes v1..v" + std::to_string(p) + " are collinear");
        throw NumericalError("degenerate regression: forcing mode v" + std::to_string(r) + " is collinear with the state");
    }
    const Eigen::MatrixXd coef = qr.solve(Y);  // rows: regressors, cols: state components
    m.A = coef.topRows(p).transpose();
    m.B = zero_forcing ? Eigen::VectorXd::Zero(p) : Eigen::VectorXd(coef.row(p).transpose());

    const Eigen::MatrixXd pred = Sk * m.A.transpose() + fk * m.B.transpose();
    m.training_mse = (Y - pred).squaredNorm() / static_cast<double>(Y.size());
    if (!std::isfinite(m.training_mse) || !m.A.allFinite() || !m.B.allFinite())
        throw NumericalError("linear model fit produced non-finite coefficients");
    return m;
}

Reconstruction reconstruct(const LinearModel& model, const TimeSeries& r_force, const Eigen::VectorXd& s0) {
    const auto p = model.A.rows();
    if (s0.size() != p) throw ValidationError("initial state has wrong dimension");
    const auto K = static_cast<Eigen::Index>(r_force.size());
    Reconstruction out;
    out.states.resize(K, p);
    Eigen::VectorXd s = s0;
    out.states.row(0) = s.transpose();
    for (Eigen::Index k = 0; k + 1 < K; ++k) {
        s = model.A * s + model.B * r_force[static_cast<std::size_t>(k)];
        out.states.row(k + 1) = s.transpose();
    }
    out.max_abs = out.states.cwiseAbs().maxCoeff();
    return out;
}

double normalized_reconstruction_error(const LinearModel& model, const std::vector<TimeSeries>& traj) {
    const auto r = traj.size();
    const Eigen::MatrixXd S = stack(traj, 0, r - 1);
    const auto rec = reconstruct(model, traj.back(), S.row(0).transpose());
    const double denom = S.squaredNorm();
    if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
    const double e = (rec.states - S).squaredNorm() / denom;
    return std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
}

DecisionTrace decision_signal(const std::vector<TimeSeries>& traj, const LinearModel& model, bool use_hilbert) {
    if (traj.size() < 2) throw ValidationError("decision signal needs at least 2 components");
    if (static_cast<int>(traj.size()) != model.order_r)
        throw ValidationError("trajectory order does not match the model");
    const auto& v = traj.front();
    const auto& rf = traj.back();
    if (v.size() != rf.size()) throw ValidationError("trajectory components differ in length");
    std::vector<double> d(v.size());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = v[k] + rf[k];
    if (use_hilbert) d = hilbert_envelope(d);
    return DecisionTrace{v, rf, v.with_values(std::move(d)), use_hilbert};
}

std::vector<double> hilbert_envelope(std::span<const double> x) {
    const auto N = x.size();
    if (N < 8) throw ValidationError("Hilbert envelope needs at least 8 samples");
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(N);

    auto buf = fftw_buffer(N);
    auto spec = fftw_buffer(N);
    const int n = static_cast<int>(N);
    Plan fwd(n, buf.get(), spec.get(), FFTW_FORWARD);
    Plan inv(n, spec.get(), buf.get(), FFTW_BACKWARD);

    for (std::size_t i = 0; i < N; ++i) {
        buf[i][0] = x[i] - mean;
        buf[i][1] = 0.0;
    }
    fwd.run();
    // keep DC (and Nyquist for even N), double positive, zero negative frequencies
    const std::size_t half = N / 2;
    const std::size_t last_pos = N % 2 == 0 ? half - 1 : half;
    for (std::size_t k = 1; k <= last_pos; ++k) {
        spec[k][0] *= 2.0;
        spec[k][1] *= 2.0;
    }
    for (std::size_t k = last_pos + 1 + (N % 2 == 0 ? 1 : 0); k < N; ++k) {
        spec[k][0] = 0.0;
        spec[k][1] = 0.0;
    }
    inv.run();
    std::vector<double> env(N);
    const double scale = 1.0 / static_cast<double>(N);
    for (std::size_t i = 0; i < N; ++i) env[i] = std::hypot(buf[i][0], buf[i][1]) * scale;
    return env;
}

TimeSeries hilbert_envelope(const TimeSeries& x) { return x.with_values(hilbert_envelope(x.samples())); }

std::vector<double> running_median(std::span<const double> x, int window) {
    if (window < 1) throw ValidationError("median window must be >= 1");
    const long N = static_cast<long>(x.size());
    const long half = window / 2;
    const long w = 2 * half + 1;
    std::vector<double> out(x.size()), buf(static_cast<std::size_t>(w));
    for (long i = 0; i < N; ++i) {
        for (long j = 0; j < w; ++j) buf[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(std::clamp(i - half + j, 0L, N - 1))];
        auto mid = buf.begin() + half;
        std::nth_element(buf.begin(), mid, buf.end());
        out[static_cast<std::size_t>(i)] = *mid;
    }
    return out;
}

void write_trace_csv(std::ostream& os, const DecisionTrace& t, int index_offset) {
    const auto old = os.precision(17);
    os << "index,v,r_force,d\n";
    for (std::size_t k = 0; k < t.d.size(); ++k)
        os << static_cast<long>(k) + index_offset << ',' << t.v[k] << ',' << t.r_force[k] << ',' << t.d[k] << '\n';
    os.precision(old);
}

}  // namespace havok
