#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "transsync/procrustes.hpp"
#include "transsync/random.hpp"
#include "transsync/sync.hpp"

namespace transsync {

// Support of the random translation component. The wide range is the
// default; the narrow one is selectable for comparison runs.
enum class TranslationRange { Wide /* U(-2.5, 2.5)^d */, Narrow /* U(0.5, 1.5)^d */ };

// A set of sampled absolute transforms together with the transitively
// consistent pairwise set they generate.
struct GroundTruth {
    std::vector<Transform> absolute;
    PairwiseTransformSet pairwise;
    TransformClass transform_class;
    std::uint64_t seed = 0;
};

// Corruption parameters: additive element noise, missing-point probability
// and wrong-correspondence proportion.
struct NoiseSpec {
    double sigma = 0.0;  // >= 0
    double eta = 0.0;    // [0, 0.7]
    double nu = 0.0;     // [0, 1]

    void validate() const;
};

// Random orthogonal matrix: the orthogonal factor of a well-conditioned
// random Gaussian matrix. proper = true restricts to det = +1.
Eigen::MatrixXd random_orthogonal(int d, RandomEngine& rng, bool proper);

// Samples k absolute transforms of the requested class. Each one is
// s * Q * N with translation row t, where s ~ U(0.5, 1.5), Q is a random
// orthogonal (rotation for Rigid) matrix, N = I + eps with eps ~ N(0, 0.1^2)
// elementwise, and t is drawn from the translation range. Per class:
// Linear has t = 0 (and a plain d x d matrix), Similarity/Euclidean/Rigid
// have N = I, Euclidean/Rigid have s = 1. Ill-conditioned samples are
// redrawn. The pairwise set is T_ij = T_i T_j^-1.
GroundTruth gen_ground_truth(int k, int d, TransformClass cls, std::uint64_t seed,
                             TranslationRange range = TranslationRange::Wide);

// Adds independent N(0, sigma^2) samples to every element of every
// off-diagonal block. Diagonal blocks and homogeneous last columns are never
// touched.
PairwiseTransformSet add_gaussian_noise(const PairwiseTransformSet& set, double sigma,
                                        RandomEngine& rng);

// (1/k^2) sum_ij ||T_ij^a - T_ij^b||_F over all ordered pairs.
double transform_error(const PairwiseTransformSet& a, const PairwiseTransformSet& b);

// Marks each point of each shape absent with probability eta. Whole draws
// are repeated while any shape pair shares fewer than d common points; the
// retry budget exhausting raises InfeasibleDrawError.
std::vector<PointCloud> drop_points(const std::vector<PointCloud>& shapes, double eta,
                                    RandomEngine& rng, int max_attempts = 1000);

// Disturbs correspondences for one shape pair: selects round(nu * n) rows and
// reorders them by a uniformly random permutation in y only. x is returned
// unchanged. Requires full masks.
std::pair<PointCloud, PointCloud> scramble_correspondences(const PointCloud& x,
                                                           const PointCloud& y, double nu,
                                                           RandomEngine& rng);

// K synthetic d-dimensional shapes: a fixed closed-outline template sampled
// at n landmarks, warped per shape by a smooth random polynomial field whose
// magnitude scales with deform_level, plus elementwise N(0, noise_level^2)
// jitter. Correspondences are by row order.
std::vector<PointCloud> gen_shapes(int K, int n, int d, double deform_level,
                                   double noise_level, std::uint64_t seed);

}  // namespace transsync
