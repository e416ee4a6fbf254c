#pragma once

#include <Eigen/Dense>
#include <vector>

#include "transsync/random.hpp"
#include "transsync/sync.hpp"
#include "transsync/transform.hpp"

namespace transsync {

// An n x d landmark matrix (rows are points) with a per-point presence mask.
struct PointCloud {
    Eigen::MatrixXd points;
    std::vector<bool> present;

    PointCloud() = default;
    PointCloud(Eigen::MatrixXd pts, std::vector<bool> mask);

    // All points observed.
    static PointCloud full(Eigen::MatrixXd pts);

    int n() const { return static_cast<int>(points.rows()); }
    int d() const { return static_cast<int>(points.cols()); }
    int present_count() const;
    bool all_present() const;
};

enum class GpaMethod { Reference, IterativeMean, Sync };

const char* to_string(GpaMethod method);
GpaMethod gpa_method_from_string(const std::string& s);

struct GpaOutcome {
    std::vector<PointCloud> aligned;
    std::vector<Transform> transforms;
    GpaMethod method = GpaMethod::Reference;
    // Mean pairwise Frobenius distance between the aligned clouds. Equals
    // shape_error() when every mask is full; with missing points each pair is
    // compared over its commonly-present rows.
    double error = 0.0;
    int iterations = 0;
    bool converged = true;
    // IterativeMean only: Frobenius change of the mean shape per iteration.
    std::vector<double> mean_changes;
};

// Closed-form absolute orientation: the homogeneous transform T with
// x * T ~ y over the commonly-present points. The orthogonal part is the
// projection of the cross-covariance of the centred common points, the
// Similarity scale is the symmetric estimate sqrt(sum||y_c||^2 / sum||x_c||^2),
// and the translation maps x's centroid onto y's.
Transform solve_aop(const PointCloud& x, const PointCloud& y, TransformClass cls);

// Maps every present row by p * A + t; absent rows and the mask are
// unchanged.
PointCloud apply(const Transform& t, const PointCloud& x);

// Aligns every shape onto shapes[ref]; transforms[ref] is the identity.
GpaOutcome gpa_reference(const std::vector<PointCloud>& shapes, int ref, TransformClass cls);

// Alternates between aligning all shapes to the current mean shape and
// re-averaging. The initial reference is drawn from rng; after every update
// the mean is rescaled to the initial reference's centred norm so the scale
// cannot collapse. Stops when the mean moves less than tol (Frobenius) or
// after max_iter iterations (flagged, not an error).
GpaOutcome gpa_iterative_mean(const std::vector<PointCloud>& shapes, TransformClass cls,
                              double tol, int max_iter, RandomEngine& rng);

// Solves all k^2 ordered pairwise AOPs independently, synchronises the
// resulting transform set, and maps every shape by its absolute transform
// into the gauge shape's frame (shape 0 unless ill-conditioned).
GpaOutcome gpa_sync(const std::vector<PointCloud>& shapes, TransformClass cls,
                    ScaleMode scale_mode = ScaleMode::Geometric);

// (1/k^2) sum_ij ||X_i - X_j||_F over all ordered pairs. Defined on complete
// shapes only; any missing point is a contract violation.
double shape_error(const std::vector<PointCloud>& aligned);

}  // namespace transsync
