#pragma once

#include <Eigen/Dense>
#include <string>

#include "transsync/errors.hpp"

namespace transsync {

// Matrix representation of a transform: a plain d x d linear map, or a
// (d+1) x (d+1) homogeneous matrix encoding an affine map.
enum class MatrixKind { Linear, Homogeneous };

// Transformation family. Closed under composition and inversion.
enum class TransformClass { Linear, Affine, Similarity, Euclidean, Rigid };

// How the isotropic scale is read off the singular values of a linear block.
enum class ScaleMode { Geometric, Arithmetic };

// Transforms whose condition number estimate reaches this limit are treated
// as singular by every operation that requires invertibility.
inline constexpr double kConditionLimit = 1e8;

const char* to_string(MatrixKind kind);
const char* to_string(TransformClass cls);
const char* to_string(ScaleMode mode);
MatrixKind matrix_kind_from_string(const std::string& s);
TransformClass transform_class_from_string(const std::string& s);
ScaleMode scale_mode_from_string(const std::string& s);

// An invertible linear or affine transformation acting on row vectors,
// x' = x * T. Homogeneous matrices carry the linear block in the top-left
// d x d corner, the translation as the bottom-left 1 x d row, and a last
// column fixed to (0, ..., 0, 1)^T:
//
//       | A  0 |
//   T = |      |
//       | t  1 |
//
// Values are immutable once constructed.
class Transform {
public:
    // Validates shape, finiteness and (for Homogeneous) the exact last
    // column. Invertibility is not checked here; operations that need it do.
    Transform(int dim, MatrixKind kind, Eigen::MatrixXd matrix);

    static Transform identity(int dim, MatrixKind kind);
    static Transform from_linear(Eigen::MatrixXd a);
    static Transform from_affine(const Eigen::MatrixXd& a, const Eigen::RowVectorXd& t);

    int dim() const { return dim_; }
    MatrixKind kind() const { return kind_; }
    const Eigen::MatrixXd& matrix() const { return matrix_; }

    // Matrix side length: d for Linear, d+1 for Homogeneous.
    int size() const { return static_cast<int>(matrix_.rows()); }

    // Top-left d x d block (the whole matrix for Linear kind).
    Eigen::MatrixXd linear() const { return matrix_.topLeftCorner(dim_, dim_); }

    // Bottom-left translation row; zero for Linear kind.
    Eigen::RowVectorXd translation() const;

private:
    int dim_;
    MatrixKind kind_;
    Eigen::MatrixXd matrix_;
};

// Scale, orthogonal factor and translation of a similarity transform.
struct SimilarityParts {
    double scale = 1.0;
    Eigen::MatrixXd orthogonal;
    Eigen::RowVectorXd translation;
};

// sigma_max / sigma_min of a square matrix; +inf when sigma_min == 0.
double condition_estimate(const Eigen::MatrixXd& m);

// Matrix product a * b (first a, then b, in the row-vector convention).
// Homogeneous composition is done blockwise so the last column stays exact.
Transform compose(const Transform& a, const Transform& b);

// Inverse transform. Homogeneous inverses are assembled from A^-1 and
// -t A^-1 so the homogeneous structure is preserved exactly.
Transform invert(const Transform& t, double condition_limit = kConditionLimit);

// Frobenius-nearest orthogonal matrix, U V^T from the SVD a = U S V^T.
Eigen::MatrixXd project_orthogonal(const Eigen::MatrixXd& a);

// Nearest rotation: U diag(1, ..., 1, det(V^T U)) V^T, so the result always
// has determinant +1 even for reflection inputs.
Eigen::MatrixXd project_rotation(const Eigen::MatrixXd& a);

// Geometric mean of the singular values; all inputs must be positive.
double scale_geometric(const Eigen::VectorXd& singular_values);

// Arithmetic mean of the singular values; all inputs must be positive.
double scale_arithmetic(const Eigen::VectorXd& singular_values);

// Projects the linear block of t onto the requested class: s*Q for
// Similarity, Q for Euclidean, a proper rotation for Rigid. Translations are
// preserved; Linear and Affine inputs pass through unchanged.
Transform project_class(const Transform& t, TransformClass cls,
                        ScaleMode scale_mode = ScaleMode::Geometric);

// Splits a homogeneous transform into scale (geometric mean), orthogonal
// factor and translation row.
SimilarityParts decompose_similarity(const Transform& t);

}  // namespace transsync
