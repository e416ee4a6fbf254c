#include "transsync/sync.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace transsync {

PairwiseTransformSet::PairwiseTransformSet(int k, int dim, MatrixKind kind, TransformClass cls)
    : k_(k), dim_(dim), kind_(kind), class_(cls) {
    if (k_ < 1) throw ContractViolation("PairwiseTransformSet: k must be >= 1");
    if (dim_ < 1) throw ContractViolation("PairwiseTransformSet: dim must be >= 1");
    entries_.resize(static_cast<std::size_t>(k_) * static_cast<std::size_t>(k_));
    for (int i = 0; i < k_; ++i)
        entries_[index(i, i)] = Transform::identity(dim_, kind_);
}

std::size_t PairwiseTransformSet::index(int i, int j) const {
    if (i < 0 || i >= k_ || j < 0 || j >= k_)
        throw ContractViolation("PairwiseTransformSet: index (" + std::to_string(i) + ", " +
                                std::to_string(j) + ") out of range for k=" + std::to_string(k_));
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(k_) + static_cast<std::size_t>(j);
}

bool PairwiseTransformSet::has(int i, int j) const { return entries_[index(i, j)].has_value(); }

const Transform& PairwiseTransformSet::at(int i, int j) const {
    const auto& e = entries_[index(i, j)];
    if (!e)
        throw IncompleteSetError("pairwise set is missing entry (" + std::to_string(i) + ", " +
                                 std::to_string(j) + ")");
    return *e;
}

void PairwiseTransformSet::set(int i, int j, Transform t) {
    if (t.dim() != dim_ || t.kind() != kind_)
        throw ContractViolation("PairwiseTransformSet::set: entry dimension or kind mismatch");
    entries_[index(i, j)] = std::move(t);
}

bool PairwiseTransformSet::complete() const {
    return std::all_of(entries_.begin(), entries_.end(),
                       [](const std::optional<Transform>& e) { return e.has_value(); });
}

Eigen::MatrixXd build_z(const PairwiseTransformSet& set) {
    const int k = set.k();
    if (k < 2) throw ContractViolation("build_z: k must be >= 2");
    const int b = set.kind() == MatrixKind::Linear ? set.dim() : set.dim() + 1;
    const int n = k * b;

    Eigen::MatrixXd z(n, n);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(b, b);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            // Diagonal blocks are always the identity, whatever a noisy
            // source may claim for T_ii.
            z.block(i * b, j * b, b, b) = (i == j) ? eye : set.at(i, j).matrix();
        }
    }
    z.diagonal().array() -= static_cast<double>(k);
    return z;
}

Eigen::MatrixXd append_homogeneous_row(const Eigen::MatrixXd& z, int k, int d) {
    const int b = d + 1;
    if (z.cols() != static_cast<Eigen::Index>(k) * b)
        throw ContractViolation("append_homogeneous_row: matrix has " + std::to_string(z.cols()) +
                                " columns, expected k(d+1) = " + std::to_string(k * b));
    Eigen::MatrixXd out(z.rows() + 1, z.cols());
    out.topRows(z.rows()) = z;
    out.row(z.rows()).setZero();
    for (int i = 0; i < k; ++i) out(z.rows(), i * b + d) = 1.0;
    return out;
}

NullBasis extract_null_basis(const Eigen::MatrixXd& z, int d) {
    if (d < 1) throw ContractViolation("extract_null_basis: d must be >= 1");
    if (z.cols() < d)
        throw ContractViolation("extract_null_basis: matrix has fewer than d columns");
    if (z.rows() < z.cols())
        throw ContractViolation("extract_null_basis: matrix must have at least as many rows as columns");
    if (!z.allFinite())
        throw ContractViolation("extract_null_basis: matrix has non-finite entries");

    // The d smallest right-singular vectors of z are the eigenvectors of
    // z^T z for its d smallest eigenvalues. The trailing singular values are
    // then re-evaluated as ||z v|| directly, which keeps full absolute
    // accuracy for values near machine zero where sqrt(eigenvalue) would
    // not.
    const Eigen::Index n = z.cols();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(z.transpose() * z);
    if (eig.info() != Eigen::Success)
        throw Error("extract_null_basis: eigendecomposition did not converge");

    NullBasis nb;
    nb.basis = eig.eigenvectors().leftCols(d);  // eigenvalues ascending
    nb.spectral_norm = std::sqrt(std::max(0.0, eig.eigenvalues()(n - 1)));

    const Eigen::Index tail_len = std::min<Eigen::Index>(d + 1, n);
    nb.tail_singular_values.resize(tail_len);
    for (Eigen::Index i = 0; i < tail_len; ++i)
        nb.tail_singular_values(i) = (z * eig.eigenvectors().col(i)).norm();
    std::sort(nb.tail_singular_values.begin(), nb.tail_singular_values.end());

    // Unique minimiser requires a gap between the d-th and (d+1)-th smallest
    // singular values; flag, do not fail, when it closes.
    if (tail_len > d) {
        const double gap = nb.tail_singular_values(d) - nb.tail_singular_values(d - 1);
        nb.degenerate = gap < 1e-12 * nb.spectral_norm || nb.spectral_norm == 0.0;
    }
    return nb;
}

SyncResult fix_gauge(const Eigen::MatrixXd& u1, MatrixKind kind, int k, int d,
                     TransformClass cls) {
    const int b = kind == MatrixKind::Linear ? d : d + 1;
    if (u1.rows() != static_cast<Eigen::Index>(k) * b || u1.cols() != d)
        throw ContractViolation("fix_gauge: basis must be (k*block) x d");

    // Square per-object blocks; homogeneous ones get the exact last column.
    std::vector<Eigen::MatrixXd> blocks(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        Eigen::MatrixXd m(b, b);
        m.leftCols(d) = u1.block(i * b, 0, b, d);
        if (kind == MatrixKind::Homogeneous) {
            m.col(d).setZero();
            m(d, d) = 1.0;
        }
        blocks[static_cast<std::size_t>(i)] = std::move(m);
    }

    int gauge = 0;
    double cond0 = condition_estimate(blocks[0]);
    if (!(cond0 < kGaugeConditionLimit)) {
        double best = cond0;
        for (int i = 1; i < k; ++i) {
            const double c = condition_estimate(blocks[static_cast<std::size_t>(i)]);
            if (c < best) {
                best = c;
                gauge = i;
            }
        }
        if (!(best < kConditionLimit))
            throw DegenerateError(
                "fix_gauge: every candidate gauge block is singular; the recovered null-space "
                "basis does not define transforms");
    }

    const Eigen::MatrixXd ginv = blocks[static_cast<std::size_t>(gauge)].inverse();

    SyncResult result;
    result.gauge_block = gauge;
    result.transform_class = cls;
    result.absolute.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        const Eigen::MatrixXd m = blocks[static_cast<std::size_t>(i)] * ginv;
        if (kind == MatrixKind::Linear) {
            result.absolute.emplace_back(d, MatrixKind::Linear, m);
        } else {
            // Rebuild from blocks so the last column is exact.
            result.absolute.push_back(
                Transform::from_affine(m.topLeftCorner(d, d), m.block(d, 0, 1, d)));
        }
    }
    return result;
}

SyncResult synchronise(const PairwiseTransformSet& set, TransformClass cls,
                       ScaleMode scale_mode) {
    const int k = set.k();
    const int d = set.dim();

    Eigen::MatrixXd z = build_z(set);
    if (set.kind() == MatrixKind::Homogeneous) z = append_homogeneous_row(z, k, d);

    const NullBasis nb = extract_null_basis(z, d);
    SyncResult result = fix_gauge(nb.basis, set.kind(), k, d, cls);
    result.tail_singular_values = nb.tail_singular_values;
    result.degenerate = nb.degenerate;
    result.spectral_norm = nb.spectral_norm;

    if (cls == TransformClass::Similarity || cls == TransformClass::Euclidean ||
        cls == TransformClass::Rigid) {
        for (Transform& t : result.absolute) t = project_class(t, cls, scale_mode);
    }
    return result;
}

PairwiseTransformSet reconstruct_pairwise(const SyncResult& result) {
    const int k = static_cast<int>(result.absolute.size());
    if (k < 1) throw ContractViolation("reconstruct_pairwise: empty result");
    const Transform& first = result.absolute.front();

    PairwiseTransformSet set(k, first.dim(), first.kind(), result.transform_class);
    std::vector<Transform> inverses;
    inverses.reserve(static_cast<std::size_t>(k));
    for (const Transform& t : result.absolute) inverses.push_back(invert(t));

    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            if (i == j) continue;
            set.set(i, j,
                    compose(result.absolute[static_cast<std::size_t>(i)],
                            inverses[static_cast<std::size_t>(j)]));
        }
    }
    return set;
}

double consistency_residual(const PairwiseTransformSet& set) {
    const int k = set.k();
    double worst = 0.0;
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            const Eigen::MatrixXd& tij = set.at(i, j).matrix();
            for (int l = 0; l < k; ++l) {
                const double r = (tij * set.at(j, l).matrix() - set.at(i, l).matrix()).norm();
                worst = std::max(worst, r);
            }
        }
    }
    return worst;
}

}  // namespace transsync
