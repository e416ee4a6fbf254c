#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "common.hpp"
#include "transsync/simulate.hpp"
#include "transsync/sync.hpp"

using namespace transsync;
using testutil::max_abs_diff;

namespace {

// k=2, d=1 linear set generated by absolute scalars (1, 2).
PairwiseTransformSet two_object_scalar_set() {
    PairwiseTransformSet set(2, 1, MatrixKind::Linear, TransformClass::Linear);
    set.set(0, 1, Transform::from_linear(Eigen::MatrixXd::Constant(1, 1, 0.5)));
    set.set(1, 0, Transform::from_linear(Eigen::MatrixXd::Constant(1, 1, 2.0)));
    return set;
}

PairwiseTransformSet scalar_set(const std::vector<double>& absolute) {
    const int k = static_cast<int>(absolute.size());
    PairwiseTransformSet set(k, 1, MatrixKind::Linear, TransformClass::Linear);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            if (i == j) continue;
            set.set(i, j,
                    Transform::from_linear(Eigen::MatrixXd::Constant(
                        1, 1, absolute[static_cast<std::size_t>(i)] /
                                  absolute[static_cast<std::size_t>(j)])));
        }
    return set;
}

// Count of singular values below a threshold (rank-deficiency oracle).
int near_zero_singular_values(const Eigen::MatrixXd& m, double tol) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    int count = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) < tol) ++count;
    return count;
}

// Independent smallest-singular-vector oracle: random sampling plus power
// iteration on (||Z||_F^2 I - Z^T Z). Never touches the SVD path.
double brute_force_min_objective(const Eigen::MatrixXd& z, RandomEngine& rng, int samples) {
    const Eigen::Index n = z.cols();
    Eigen::VectorXd best;
    double best_val = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
        v.normalize();
        const double val = (z * v).norm();
        if (val < best_val) {
            best_val = val;
            best = v;
        }
    }
    const Eigen::MatrixXd shifted =
        z.squaredNorm() * Eigen::MatrixXd::Identity(n, n) - z.transpose() * z;
    for (int it = 0; it < 500; ++it) {
        best = shifted * best;
        best.normalize();
    }
    return std::min(best_val, (z * best).norm());
}

}  // namespace

TEST_CASE("build_z: hand examples and null vectors") {
    const Eigen::MatrixXd z = build_z(two_object_scalar_set());
    Eigen::MatrixXd expected(2, 2);
    expected << -1.0, 0.5, 2.0, -1.0;
    CHECK(max_abs_diff(z, expected) == 0.0);
    CHECK((z * Eigen::Vector2d(1.0, 2.0)).norm() == 0.0);

    // All-identity set: Z = ones(k) (x) I - kI, stacked identities in the null space.
    const int k = 4, d = 2;
    PairwiseTransformSet ones(k, d, MatrixKind::Linear, TransformClass::Linear);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (i != j) ones.set(i, j, Transform::identity(d, MatrixKind::Linear));
    const Eigen::MatrixXd z_ones = build_z(ones);
    Eigen::MatrixXd stacked(k * d, d);
    for (int i = 0; i < k; ++i) stacked.block(i * d, 0, d, d) = Eigen::MatrixXd::Identity(d, d);
    CHECK((z_ones * stacked).norm() == 0.0);

    const Eigen::MatrixXd z3 = build_z(scalar_set({1.0, 2.0, 4.0}));
    CHECK((z3 * Eigen::Vector3d(1.0, 2.0, 4.0)).norm() < 1e-14);

    // Incomplete sets are rejected.
    PairwiseTransformSet incomplete(3, 1, MatrixKind::Linear, TransformClass::Linear);
    incomplete.set(0, 1, Transform::identity(1, MatrixKind::Linear));
    CHECK_THROWS_AS(build_z(incomplete), IncompleteSetError);
}

TEST_CASE("build_z ignores stored diagonal entries") {
    PairwiseTransformSet set = two_object_scalar_set();
    set.set(0, 0, Transform::from_linear(Eigen::MatrixXd::Constant(1, 1, 42.0)));
    const Eigen::MatrixXd z = build_z(set);
    CHECK(z(0, 0) == -1.0);
}

TEST_CASE("append_homogeneous_row") {
    const Eigen::MatrixXd z = Eigen::MatrixXd::Zero(4, 4);
    const Eigen::MatrixXd zed = append_homogeneous_row(z, 2, 1);
    CHECK(zed.rows() == 5);
    CHECK(zed.row(4)(0) == 0.0);
    CHECK(zed.row(4)(1) == 1.0);
    CHECK(zed.row(4)(2) == 0.0);
    CHECK(zed.row(4)(3) == 1.0);

    CHECK_THROWS_AS(append_homogeneous_row(Eigen::MatrixXd::Zero(4, 5), 2, 1),
                    ContractViolation);

    // Consistent homogeneous set: before the row, the null space includes the
    // stacked homogeneous indicator (dimension d+1); the row removes it, so
    // exactly d near-zero singular values remain.
    const GroundTruth gt = gen_ground_truth(5, 2, TransformClass::Affine, 99);
    const Eigen::MatrixXd z_aff = build_z(gt.pairwise);
    const int d = 2;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(z_aff);
    const double scale = svd.singularValues()(0);
    CHECK(near_zero_singular_values(z_aff, 1e-10 * scale) == d + 1);
    const Eigen::MatrixXd z_auged = append_homogeneous_row(z_aff, 5, 2);
    CHECK(near_zero_singular_values(z_auged, 1e-10 * scale) == d);

    // All-identity homogeneous set, k=2, d=1: augmented null space has
    // dimension exactly 1.
    PairwiseTransformSet ones(2, 1, MatrixKind::Homogeneous, TransformClass::Affine);
    ones.set(0, 1, Transform::identity(1, MatrixKind::Homogeneous));
    ones.set(1, 0, Transform::identity(1, MatrixKind::Homogeneous));
    const Eigen::MatrixXd za = append_homogeneous_row(build_z(ones), 2, 1);
    CHECK(near_zero_singular_values(za, 1e-10 * 2.0) == 1);
}

TEST_CASE("extract_null_basis: consistent, degenerate and noisy cases") {
    const NullBasis nb = extract_null_basis(build_z(scalar_set({1.0, 2.0, 4.0})), 1);
    const Eigen::VectorXd expected = Eigen::Vector3d(1.0, 2.0, 4.0).normalized();
    const double sign = nb.basis(0, 0) < 0.0 ? -1.0 : 1.0;
    CHECK(max_abs_diff(sign * nb.basis, expected) < 1e-12);
    CHECK(nb.tail_singular_values(0) < 1e-12 * nb.spectral_norm);
    CHECK(nb.tail_singular_values(1) > 1e-3 * nb.spectral_norm);
    CHECK_FALSE(nb.degenerate);

    const NullBasis zero = extract_null_basis(Eigen::MatrixXd::Zero(3, 3), 1);
    CHECK(zero.degenerate);
    CHECK(zero.tail_singular_values.cwiseAbs().maxCoeff() == 0.0);
    CHECK(std::abs(zero.basis.col(0).norm() - 1.0) < 1e-14);

    // Problem-1 optimality on a noisy 6x6 instance against the sampling +
    // power-iteration oracle.
    RandomEngine rng(1234);
    const GroundTruth gt = gen_ground_truth(6, 1, TransformClass::Linear, 7);
    const PairwiseTransformSet noisy = add_gaussian_noise(gt.pairwise, 0.1, rng);
    const Eigen::MatrixXd z = build_z(noisy);
    const NullBasis noisy_basis = extract_null_basis(z, 1);
    const double ours = (z * noisy_basis.basis).norm();
    const double oracle = brute_force_min_objective(z, rng, 100000);
    CHECK(ours <= oracle * (1.0 + 1e-10) + 1e-15);
}

TEST_CASE("fix_gauge: hand case, fixed point, gauge invariance") {
    Eigen::MatrixXd basis(3, 1);
    basis << 1.0, 2.0, 4.0;
    const SyncResult res = fix_gauge(basis, MatrixKind::Linear, 3, 1, TransformClass::Linear);
    CHECK(res.gauge_block == 0);
    CHECK(res.absolute[0].matrix()(0, 0) == doctest::Approx(1.0));
    CHECK(res.absolute[1].matrix()(0, 0) == doctest::Approx(2.0));
    CHECK(res.absolute[2].matrix()(0, 0) == doctest::Approx(4.0));

    // First block already the identity: unchanged.
    RandomEngine rng(55);
    Eigen::MatrixXd u1(6, 2);
    u1.topRows(2) = Eigen::MatrixXd::Identity(2, 2);
    u1.bottomRows(4) = testutil::random_matrix(4, 2, rng);
    const SyncResult fixed = fix_gauge(u1, MatrixKind::Linear, 3, 2, TransformClass::Linear);
    for (int i = 0; i < 3; ++i)
        CHECK(max_abs_diff(fixed.absolute[static_cast<std::size_t>(i)].matrix(),
                           u1.block(2 * i, 0, 2, 2)) < 1e-12);

    // Any invertible right factor yields the same absolute transforms.
    const GroundTruth gt = gen_ground_truth(6, 3, TransformClass::Affine, 21);
    const Eigen::MatrixXd z = append_homogeneous_row(build_z(gt.pairwise), 6, 3);
    const NullBasis nb = extract_null_basis(z, 3);
    const SyncResult base = fix_gauge(nb.basis, MatrixKind::Homogeneous, 6, 3,
                                      TransformClass::Affine);
    for (int rep = 0; rep < 10; ++rep) {
        const Eigen::MatrixXd g = testutil::random_well_conditioned(3, rng, 100.0);
        const SyncResult alt = fix_gauge(nb.basis * g, MatrixKind::Homogeneous, 6, 3,
                                         TransformClass::Affine);
        for (std::size_t i = 0; i < base.absolute.size(); ++i)
            CHECK(max_abs_diff(alt.absolute[i].matrix(), base.absolute[i].matrix()) < 1e-8);
    }

    // A basis of stacked zero blocks has no usable gauge block.
    CHECK_THROWS_AS(fix_gauge(Eigen::MatrixXd::Zero(6, 2), MatrixKind::Linear, 3, 2,
                              TransformClass::Linear),
                    DegenerateError);
}

TEST_CASE("reconstruct_pairwise: hand case and consistency") {
    SyncResult res;
    res.transform_class = TransformClass::Linear;
    for (double v : {1.0, 2.0, 4.0})
        res.absolute.push_back(Transform::from_linear(Eigen::MatrixXd::Constant(1, 1, v)));
    const PairwiseTransformSet rec = reconstruct_pairwise(res);
    CHECK(rec.at(0, 1).matrix()(0, 0) == doctest::Approx(0.5));
    CHECK(rec.at(1, 2).matrix()(0, 0) == doctest::Approx(0.5));
    CHECK(rec.at(0, 2).matrix()(0, 0) == doctest::Approx(0.25));
    CHECK(rec.at(0, 1).matrix()(0, 0) * rec.at(1, 2).matrix()(0, 0) ==
          doctest::Approx(rec.at(0, 2).matrix()(0, 0)));
    CHECK(consistency_residual(rec) < 1e-9);

    SyncResult ident;
    ident.transform_class = TransformClass::Affine;
    for (int i = 0; i < 3; ++i)
        ident.absolute.push_back(Transform::identity(2, MatrixKind::Homogeneous));
    const PairwiseTransformSet rec_i = reconstruct_pairwise(ident);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(max_abs_diff(rec_i.at(i, j).matrix(), Eigen::MatrixXd::Identity(3, 3)) == 0.0);
}

TEST_CASE("consistency_residual: zero on consistent, sensitive to perturbation") {
    PairwiseTransformSet ident(3, 2, MatrixKind::Linear, TransformClass::Linear);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) ident.set(i, j, Transform::identity(2, MatrixKind::Linear));
    CHECK(consistency_residual(ident) == 0.0);

    const GroundTruth gt = gen_ground_truth(5, 2, TransformClass::Affine, 3);
    CHECK(consistency_residual(gt.pairwise) < 1e-9);

    PairwiseTransformSet bumped = gt.pairwise;
    Eigen::MatrixXd m = bumped.at(0, 1).matrix();
    m(0, 0) += 0.1;
    bumped.set(0, 1, Transform(2, MatrixKind::Homogeneous, m));
    CHECK(consistency_residual(bumped) > 0.05);
}

TEST_CASE("synchronise: exact recovery on consistent sets (all classes)") {
    for (TransformClass cls : {TransformClass::Linear, TransformClass::Affine,
                               TransformClass::Similarity, TransformClass::Euclidean,
                               TransformClass::Rigid}) {
        const GroundTruth gt = gen_ground_truth(30, 3, cls, 1000 + static_cast<int>(cls));
        const SyncResult res = synchronise(gt.pairwise, cls);
        const PairwiseTransformSet rec = reconstruct_pairwise(res);
        CHECK(transform_error(rec, gt.pairwise) < 1e-8);
        CHECK(max_abs_diff(res.absolute[static_cast<std::size_t>(res.gauge_block)].matrix(),
                           Eigen::MatrixXd::Identity(res.absolute[0].size(),
                                                     res.absolute[0].size())) < 1e-10);
    }
}

TEST_CASE("synchronise: proposition-1 spectrum across k and d") {
    int case_id = 0;
    for (TransformClass cls : {TransformClass::Linear, TransformClass::Similarity,
                               TransformClass::Rigid}) {
        for (int k : {2, 7, 20}) {
            for (int d : {1, 3, 5}) {
                const GroundTruth gt = gen_ground_truth(k, d, cls, 41 + case_id++);
                const SyncResult res = synchronise(gt.pairwise, cls);
                for (int i = 0; i < d; ++i)
                    CHECK(res.tail_singular_values(i) < 1e-8 * res.spectral_norm);
                CHECK(res.tail_singular_values(d) > 1e-3 * res.spectral_norm);
            }
        }
    }
}

TEST_CASE("synchronise: eigen relation W U1 = k U1 on consistent sets") {
    const int k = 8, d = 3;
    const GroundTruth gt = gen_ground_truth(k, d, TransformClass::Affine, 77);
    const int b = d + 1;
    Eigen::MatrixXd w(k * b, k * b);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) w.block(i * b, j * b, b, b) = gt.pairwise.at(i, j).matrix();
    Eigen::MatrixXd u1(k * b, b);
    for (int i = 0; i < k; ++i)
        u1.block(i * b, 0, b, b) = gt.absolute[static_cast<std::size_t>(i)].matrix();
    CHECK((w * u1 - static_cast<double>(k) * u1).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("synchronise: homogeneous well-formedness and rigid determinant") {
    RandomEngine rng(4242);
    const GroundTruth gt = gen_ground_truth(10, 3, TransformClass::Rigid, 31);
    const PairwiseTransformSet noisy = add_gaussian_noise(gt.pairwise, 0.2, rng);
    const SyncResult res = synchronise(noisy, TransformClass::Rigid);
    for (const Transform& t : res.absolute) {
        for (int r = 0; r < 3; ++r) CHECK(t.matrix()(r, 3) == 0.0);
        CHECK(t.matrix()(3, 3) == 1.0);
        CHECK(t.linear().determinant() == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("synchronise: k=2 noisy consensus matches brute-force minimiser") {
    RandomEngine rng(99);
    const GroundTruth gt = gen_ground_truth(2, 1, TransformClass::Linear, 5);
    const PairwiseTransformSet noisy = add_gaussian_noise(gt.pairwise, 0.3, rng);
    const Eigen::MatrixXd z = build_z(noisy);
    const NullBasis nb = extract_null_basis(z, 1);
    const double ours = (z * nb.basis).norm();
    const double oracle = brute_force_min_objective(z, rng, 50000);
    CHECK(ours <= oracle * (1.0 + 1e-10) + 1e-15);
}

TEST_CASE("synchronise round trip: reconstructed sets are fixed points") {
    const GroundTruth gt = gen_ground_truth(12, 2, TransformClass::Similarity, 87);
    RandomEngine rng(88);
    const PairwiseTransformSet noisy = add_gaussian_noise(gt.pairwise, 0.1, rng);
    const PairwiseTransformSet rec =
        reconstruct_pairwise(synchronise(noisy, TransformClass::Similarity));
    const PairwiseTransformSet rec2 =
        reconstruct_pairwise(synchronise(rec, TransformClass::Similarity));
    CHECK(transform_error(rec2, rec) < 1e-8);
    CHECK(consistency_residual(rec) < 1e-9);
}

TEST_CASE("synchronise denoises in expectation (all classes, sigma=0.1)") {
    const int trials = 100;
    for (TransformClass cls : {TransformClass::Linear, TransformClass::Affine,
                               TransformClass::Similarity, TransformClass::Euclidean,
                               TransformClass::Rigid}) {
        double noisy_sum = 0.0;
        double synced_sum = 0.0;
        for (int t = 0; t < trials; ++t) {
            const std::uint64_t seed = derive_seed(2024, {static_cast<std::uint64_t>(cls),
                                                          static_cast<std::uint64_t>(t)});
            const GroundTruth gt = gen_ground_truth(30, 3, cls, seed);
            RandomEngine rng(derive_seed(seed, {1}));
            const PairwiseTransformSet noisy = add_gaussian_noise(gt.pairwise, 0.1, rng);
            noisy_sum += transform_error(noisy, gt.pairwise);
            const PairwiseTransformSet rec = reconstruct_pairwise(synchronise(noisy, cls));
            synced_sum += transform_error(rec, gt.pairwise);
        }
        CHECK(synced_sum / trials < noisy_sum / trials);
    }
}
