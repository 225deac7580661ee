#include "havok/embedding.hpp"

#include "havok/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace havok {

HankelMatrix build_hankel(const FeatureBank& bank, int M) {
    const long N = static_cast<long>(bank.length());
    const long F = static_cast<long>(bank.count());
    if (M < 1) throw ValidationError("memory M must be >= 1");
    const long K = N - M + 1;
    if (K < 1 || F * M >= K)
        throw ValidationError("series too short for M=" + std::to_string(M) + " (N=" + std::to_string(N) + ")");

    HankelMatrix h;
    h.memory_M = M;
    h.feature_count = static_cast<int>(F);
    h.sample_period = bank[0].sample_period();
    h.entries.resize(F * M, K);
    for (long i = 0; i < F; ++i) {
        const auto f = bank[static_cast<std::size_t>(i)].samples();
        for (long j = 0; j < M; ++j)
            for (long k = 0; k < K; ++k) h.entries(i * M + j, k) = f[static_cast<std::size_t>(k + j)];
    }
    return h;
}

ModeDecomposition decompose(const HankelMatrix& h) {
    const auto& A = h.entries;
    if (A.size() == 0) throw ValidationError("empty Hankel matrix");
    if (!A.allFinite()) throw NumericalError("Hankel matrix has non-finite entries");

    // The matrix is wide; decomposing the transpose keeps the bidiagonalization on the tall side.
    const Eigen::MatrixXd At = A.transpose();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(At, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw NumericalError("SVD did not converge");

    ModeDecomposition d;
    d.U = svd.matrixV();
    d.V = svd.matrixU();
    d.sigma = svd.singularValues();
    d.memory_M = h.memory_M;
    d.sample_period = h.sample_period;
    if (!d.U.allFinite() || !d.V.allFinite() || !d.sigma.allFinite())
        throw NumericalError("SVD produced non-finite factors");

    for (Eigen::Index c = 0; c < d.U.cols(); ++c) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index r = 0; r < d.U.rows(); ++r) {
            const double a = std::abs(d.U(r, c));
            if (a > best) {
                best = a;
                arg = r;
            }
        }
        if (d.U(arg, c) < 0.0) {
            d.U.col(c) *= -1.0;
            d.V.col(c) *= -1.0;
        }
    }
    return d;
}

double dominance_ratio(const ModeDecomposition& d) {
    if (d.sigma.size() < 2) throw ValidationError("dominance ratio needs at least 2 singular values");
    // sigma_2 at rounding level counts as zero
    const double tol = d.sigma(0) * std::numeric_limits<double>::epsilon() *
                       static_cast<double>(std::max(d.U.rows(), d.V.rows()));
    if (d.sigma(1) <= tol) return std::numeric_limits<double>::infinity();
    return d.sigma(0) / d.sigma(1);
}

std::vector<TimeSeries> trajectory(const ModeDecomposition& d, int r, bool scaled) {
    if (r < 1 || r > d.modes())
        throw ValidationError("trajectory order r=" + std::to_string(r) + " out of range [1, " +
                              std::to_string(d.modes()) + "]");
    std::vector<TimeSeries> out;
    out.reserve(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) {
        const double s = scaled ? d.sigma(i) : 1.0;
        std::vector<double> v(static_cast<std::size_t>(d.V.rows()));
        for (Eigen::Index k = 0; k < d.V.rows(); ++k) v[static_cast<std::size_t>(k)] = s * d.V(k, i);
        out.emplace_back(std::move(v), d.sample_period);
    }
    return out;
}

void write_spectrum_csv(std::ostream& os, const ModeDecomposition& d) {
    const auto old = os.precision(17);
    for (Eigen::Index i = 0; i < d.sigma.size(); ++i) os << d.sigma(i) << '\n';
    os.precision(old);
}

}  // namespace havok
