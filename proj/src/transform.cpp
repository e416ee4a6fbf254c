#include "transsync/transform.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <sstream>

namespace transsync {

namespace {

std::string shape_string(const Eigen::MatrixXd& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

Eigen::JacobiSVD<Eigen::MatrixXd> full_svd(const Eigen::MatrixXd& a) {
    return Eigen::JacobiSVD<Eigen::MatrixXd>(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
}

void require_square(const Eigen::MatrixXd& a, const char* who) {
    if (a.rows() != a.cols() || a.rows() == 0)
        throw ContractViolation(std::string(who) + ": expected a square matrix, got " + shape_string(a));
    if (!a.allFinite())
        throw ContractViolation(std::string(who) + ": matrix has non-finite entries");
}

}  // namespace

const char* to_string(MatrixKind kind) {
    return kind == MatrixKind::Linear ? "linear" : "homogeneous";
}

const char* to_string(TransformClass cls) {
    switch (cls) {
        case TransformClass::Linear: return "linear";
        case TransformClass::Affine: return "affine";
        case TransformClass::Similarity: return "similarity";
        case TransformClass::Euclidean: return "euclidean";
        case TransformClass::Rigid: return "rigid";
    }
    return "?";
}

const char* to_string(ScaleMode mode) {
    return mode == ScaleMode::Geometric ? "geometric" : "arithmetic";
}

MatrixKind matrix_kind_from_string(const std::string& s) {
    if (s == "linear") return MatrixKind::Linear;
    if (s == "homogeneous") return MatrixKind::Homogeneous;
    throw ContractViolation("unknown matrix kind '" + s + "' (expected linear|homogeneous)");
}

TransformClass transform_class_from_string(const std::string& s) {
    if (s == "linear") return TransformClass::Linear;
    if (s == "affine") return TransformClass::Affine;
    if (s == "similarity") return TransformClass::Similarity;
    if (s == "euclidean") return TransformClass::Euclidean;
    if (s == "rigid") return TransformClass::Rigid;
    throw ContractViolation("unknown transform class '" + s +
                            "' (expected linear|affine|similarity|euclidean|rigid)");
}

ScaleMode scale_mode_from_string(const std::string& s) {
    if (s == "geometric") return ScaleMode::Geometric;
    if (s == "arithmetic") return ScaleMode::Arithmetic;
    throw ContractViolation("unknown scale mode '" + s + "' (expected geometric|arithmetic)");
}

Transform::Transform(int dim, MatrixKind kind, Eigen::MatrixXd matrix)
    : dim_(dim), kind_(kind), matrix_(std::move(matrix)) {
    if (dim_ < 1) throw ContractViolation("Transform: dim must be >= 1");
    const int expected = kind_ == MatrixKind::Linear ? dim_ : dim_ + 1;
    if (matrix_.rows() != expected || matrix_.cols() != expected)
        throw ContractViolation("Transform: expected a " + std::to_string(expected) + "x" +
                                std::to_string(expected) + " matrix, got " + shape_string(matrix_));
    if (!matrix_.allFinite())
        throw ContractViolation("Transform: matrix has non-finite entries");
    if (kind_ == MatrixKind::Homogeneous) {
        for (int r = 0; r < dim_; ++r) {
            if (matrix_(r, dim_) != 0.0)
                throw ContractViolation("Transform: homogeneous last column must be exactly (0,...,0,1)^T");
        }
        if (matrix_(dim_, dim_) != 1.0)
            throw ContractViolation("Transform: homogeneous last column must be exactly (0,...,0,1)^T");
    }
}

Transform Transform::identity(int dim, MatrixKind kind) {
    const int n = kind == MatrixKind::Linear ? dim : dim + 1;
    return Transform(dim, kind, Eigen::MatrixXd::Identity(n, n));
}

Transform Transform::from_linear(Eigen::MatrixXd a) {
    const int d = static_cast<int>(a.rows());
    return Transform(d, MatrixKind::Linear, std::move(a));
}

Transform Transform::from_affine(const Eigen::MatrixXd& a, const Eigen::RowVectorXd& t) {
    require_square(a, "Transform::from_affine");
    const int d = static_cast<int>(a.rows());
    if (t.size() != d)
        throw ContractViolation("Transform::from_affine: translation length does not match");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d + 1, d + 1);
    m.topLeftCorner(d, d) = a;
    m.block(d, 0, 1, d) = t;
    m(d, d) = 1.0;
    return Transform(d, MatrixKind::Homogeneous, std::move(m));
}

Eigen::RowVectorXd Transform::translation() const {
    if (kind_ == MatrixKind::Linear) return Eigen::RowVectorXd::Zero(dim_);
    return matrix_.block(dim_, 0, 1, dim_);
}

double condition_estimate(const Eigen::MatrixXd& m) {
    require_square(m, "condition_estimate");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return sv(0) / smin;
}

Transform compose(const Transform& a, const Transform& b) {
    if (a.dim() != b.dim() || a.kind() != b.kind())
        throw ContractViolation("compose: dimension or kind mismatch");
    if (a.kind() == MatrixKind::Linear)
        return Transform(a.dim(), MatrixKind::Linear, a.matrix() * b.matrix());
    const Eigen::MatrixXd lin = a.linear() * b.linear();
    const Eigen::RowVectorXd t = a.translation() * b.linear() + b.translation();
    return Transform::from_affine(lin, t);
}

Transform invert(const Transform& t, double condition_limit) {
    const Eigen::MatrixXd a = t.linear();
    const double cond = condition_estimate(a);
    if (!(cond < condition_limit))
        throw SingularityError("invert: transform is singular or ill-conditioned (condition ~ " +
                                   std::to_string(cond) + ")",
                               cond);
    const Eigen::MatrixXd ainv = a.inverse();
    if (t.kind() == MatrixKind::Linear)
        return Transform(t.dim(), MatrixKind::Linear, ainv);
    return Transform::from_affine(ainv, -t.translation() * ainv);
}

Eigen::MatrixXd project_orthogonal(const Eigen::MatrixXd& a) {
    require_square(a, "project_orthogonal");
    const auto svd = full_svd(a);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    const double cond = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
    if (!(cond < kConditionLimit))
        throw SingularityError("project_orthogonal: input is singular (condition ~ " +
                                   std::to_string(cond) + ")",
                               cond);
    return svd.matrixU() * svd.matrixV().transpose();
}

Eigen::MatrixXd project_rotation(const Eigen::MatrixXd& a) {
    require_square(a, "project_rotation");
    const auto svd = full_svd(a);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    const double cond = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
    if (!(cond < kConditionLimit))
        throw SingularityError("project_rotation: input is singular (condition ~ " +
                                   std::to_string(cond) + ")",
                               cond);
    const int d = static_cast<int>(a.rows());
    Eigen::VectorXd diag = Eigen::VectorXd::Ones(d);
    diag(d - 1) = (svd.matrixV().transpose() * svd.matrixU()).determinant() < 0.0 ? -1.0 : 1.0;
    return svd.matrixU() * diag.asDiagonal() * svd.matrixV().transpose();
}

namespace {

void require_positive(const Eigen::VectorXd& sv, const char* who) {
    if (sv.size() == 0) throw ContractViolation(std::string(who) + ": empty singular value list");
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (!(sv(i) > 0.0) || !std::isfinite(sv(i)))
            throw ContractViolation(std::string(who) + ": singular values must be positive and finite");
    }
}

}  // namespace

double scale_geometric(const Eigen::VectorXd& singular_values) {
    require_positive(singular_values, "scale_geometric");
    double log_sum = 0.0;
    for (Eigen::Index i = 0; i < singular_values.size(); ++i)
        log_sum += std::log(std::abs(singular_values(i)));
    return std::exp(log_sum / static_cast<double>(singular_values.size()));
}

double scale_arithmetic(const Eigen::VectorXd& singular_values) {
    require_positive(singular_values, "scale_arithmetic");
    return singular_values.cwiseAbs().mean();
}

Transform project_class(const Transform& t, TransformClass cls, ScaleMode scale_mode) {
    if (cls == TransformClass::Linear || cls == TransformClass::Affine) return t;

    const Eigen::MatrixXd a = t.linear();
    const auto svd = full_svd(a);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    const double cond = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
    if (!(cond < kConditionLimit))
        throw SingularityError("project_class: linear block is singular (condition ~ " +
                                   std::to_string(cond) + ")",
                               cond);

    Eigen::MatrixXd q;
    if (cls == TransformClass::Rigid) {
        const int d = t.dim();
        Eigen::VectorXd diag = Eigen::VectorXd::Ones(d);
        diag(d - 1) = (svd.matrixV().transpose() * svd.matrixU()).determinant() < 0.0 ? -1.0 : 1.0;
        q = svd.matrixU() * diag.asDiagonal() * svd.matrixV().transpose();
    } else {
        q = svd.matrixU() * svd.matrixV().transpose();
    }

    Eigen::MatrixXd block = q;
    if (cls == TransformClass::Similarity) {
        const double s = scale_mode == ScaleMode::Geometric ? scale_geometric(sv)
                                                            : scale_arithmetic(sv);
        block = s * q;
    }

    if (t.kind() == MatrixKind::Linear)
        return Transform(t.dim(), MatrixKind::Linear, block);
    return Transform::from_affine(block, t.translation());
}

SimilarityParts decompose_similarity(const Transform& t) {
    if (t.kind() != MatrixKind::Homogeneous)
        throw ContractViolation("decompose_similarity: expected a homogeneous transform");
    const Eigen::MatrixXd a = t.linear();
    const auto svd = full_svd(a);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    const double cond = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
    if (!(cond < kConditionLimit))
        throw SingularityError("decompose_similarity: linear block is singular (condition ~ " +
                                   std::to_string(cond) + ")",
                               cond);
    SimilarityParts parts;
    parts.scale = scale_geometric(sv);
    parts.orthogonal = svd.matrixU() * svd.matrixV().transpose();
    parts.translation = t.translation();
    return parts;
}

}  // namespace transsync
