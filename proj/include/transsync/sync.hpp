#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "transsync/transform.hpp"

namespace transsync {

// Gauge blocks whose condition number reaches this limit are skipped in
// favour of the best-conditioned block.
inline constexpr double kGaugeConditionLimit = 1e6;

// The k x k collection of pairwise transforms T_ij between k objects, all
// sharing one dimension, matrix kind and class tag. Diagonal entries are
// fixed to the identity on construction; off-diagonal entries start empty.
class PairwiseTransformSet {
public:
    PairwiseTransformSet(int k, int dim, MatrixKind kind, TransformClass cls);

    int k() const { return k_; }
    int dim() const { return dim_; }
    MatrixKind kind() const { return kind_; }
    TransformClass transform_class() const { return class_; }

    bool has(int i, int j) const;
    const Transform& at(int i, int j) const;  // IncompleteSetError when unset
    void set(int i, int j, Transform t);
    bool complete() const;

private:
    std::size_t index(int i, int j) const;

    int k_;
    int dim_;
    MatrixKind kind_;
    TransformClass class_;
    std::vector<std::optional<Transform>> entries_;
};

// Output of the synchronisation: per-object absolute transforms expressed in
// the gauge block's frame, plus spectral diagnostics.
struct SyncResult {
    std::vector<Transform> absolute;
    // The d+1 smallest singular values of the synchronised system matrix,
    // ascending. tail_singular_values(d) is the first one expected nonzero.
    Eigen::VectorXd tail_singular_values;
    int gauge_block = 0;
    TransformClass transform_class = TransformClass::Affine;
    // Set when the spectral gap between the d-th and (d+1)-th smallest
    // singular values nearly vanishes; the minimiser is then not unique.
    bool degenerate = false;
    // Largest singular value of the system matrix, for relative thresholds.
    double spectral_norm = 0.0;
};

// Null-space basis estimate with spectral diagnostics.
struct NullBasis {
    Eigen::MatrixXd basis;                 // orthonormal columns
    Eigen::VectorXd tail_singular_values;  // ascending, d+1 values
    bool degenerate = false;
    double spectral_norm = 0.0;
};

// Stacks all pairwise blocks into W (diagonal forced to identity) and
// subtracts k I. Requires a complete set with k >= 2.
Eigen::MatrixXd build_z(const PairwiseTransformSet& set);

// Appends the row [0 ... 0 1 | 0 ... 0 1 | ...] (k copies of the homogeneous
// indicator, unit weight) to z. This removes the stacked-indicator
// direction, which is always in the null space of a homogeneous system, from
// the solution space.
Eigen::MatrixXd append_homogeneous_row(const Eigen::MatrixXd& z, int k, int d);

// The d right-singular vectors of z for the d smallest singular values: the
// minimiser of ||z U||_F over orthonormal kd x d frames.
NullBasis extract_null_basis(const Eigen::MatrixXd& z, int d);

// Normalises the stacked basis so the chosen gauge block equals the
// identity. Homogeneous bases are first completed with the exact last
// column (0, ..., 0, 1)^T, then every block is right-multiplied by the
// inverse of the gauge block. Prefers block 0; falls back to the
// best-conditioned block when block 0 is near-singular.
SyncResult fix_gauge(const Eigen::MatrixXd& u1, MatrixKind kind, int k, int d,
                     TransformClass cls);

// Full pipeline: build_z, append_homogeneous_row (Homogeneous kind only),
// extract_null_basis, fix_gauge, and per-object class projection for
// Similarity / Euclidean / Rigid.
SyncResult synchronise(const PairwiseTransformSet& set, TransformClass cls,
                       ScaleMode scale_mode = ScaleMode::Geometric);

// The transitively consistent set T_ij = absolute_i * absolute_j^-1.
PairwiseTransformSet reconstruct_pairwise(const SyncResult& result);

// max over all triples (i, j, l) of ||T_ij T_jl - T_il||_F; zero exactly on
// transitively consistent sets.
double consistency_residual(const PairwiseTransformSet& set);

}  // namespace transsync
