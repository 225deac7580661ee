#pragma once

#include "havok/series.hpp"

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

namespace havok {

struct HankelMatrix {
    Eigen::MatrixXd entries;  // (F*M) x (N-M+1); row i*M+j, column k holds feature_i[k+j]
    int memory_M = 0;
    int feature_count = 0;
    double sample_period = 1.0;
};

struct ModeDecomposition {
    Eigen::MatrixXd U;      // rows x k
    Eigen::VectorXd sigma;  // descending
    Eigen::MatrixXd V;      // cols x k
    int memory_M = 0;
    int order_r = 0;
    double sample_period = 1.0;

    Eigen::Index modes() const { return sigma.size(); }
};

HankelMatrix build_hankel(const FeatureBank& bank, int M);

// Thin SVD. Each U column is flipped so its largest-magnitude entry is positive.
ModeDecomposition decompose(const HankelMatrix& h);

// sigma_1 / sigma_2, +inf when sigma_2 is zero.
double dominance_ratio(const ModeDecomposition& d);

// v_i = sigma_i * V[:, i] for i < r (unscaled V columns when scaled == false).
std::vector<TimeSeries> trajectory(const ModeDecomposition& d, int r, bool scaled = true);

void write_spectrum_csv(std::ostream& os, const ModeDecomposition& d);

}  // namespace havok
