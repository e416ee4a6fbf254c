#pragma once

#include <Eigen/Dense>

#include "transsync/random.hpp"
#include "transsync/simulate.hpp"
#include "transsync/transform.hpp"

namespace testutil {

using namespace transsync;

inline Eigen::MatrixXd random_matrix(int rows, int cols, RandomEngine& rng) {
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = rng.normal();
    return m;
}

// Gaussian square matrix redrawn until its condition number is small.
inline Eigen::MatrixXd random_well_conditioned(int d, RandomEngine& rng,
                                               double max_condition = 1e4) {
    for (;;) {
        Eigen::MatrixXd m = random_matrix(d, d, rng);
        if (condition_estimate(m) < max_condition) return m;
    }
}

inline Transform random_homogeneous(int d, RandomEngine& rng, double max_condition = 1e4) {
    Eigen::RowVectorXd t(d);
    for (int c = 0; c < d; ++c) t(c) = rng.uniform(-2.0, 2.0);
    return Transform::from_affine(random_well_conditioned(d, rng, max_condition), t);
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

// 2-D rotation by angle (radians), acting on row vectors.
inline Eigen::Matrix2d rotation2(double angle) {
    Eigen::Matrix2d r;
    r << std::cos(angle), std::sin(angle), -std::sin(angle), std::cos(angle);
    return r;
}

}  // namespace testutil
