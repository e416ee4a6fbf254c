#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "common.hpp"
#include "transsync/experiment.hpp"
#include "transsync/simulate.hpp"

using namespace transsync;
using testutil::max_abs_diff;

TEST_CASE("NoiseSpec bounds") {
    NoiseSpec ok{0.5, 0.7, 1.0};
    CHECK_NOTHROW(ok.validate());
    CHECK_THROWS_AS((NoiseSpec{-0.1, 0.0, 0.0}.validate()), ContractViolation);
    CHECK_THROWS_AS((NoiseSpec{0.0, 0.75, 0.0}.validate()), ContractViolation);
    CHECK_THROWS_AS((NoiseSpec{0.0, 0.0, 1.5}.validate()), ContractViolation);
}

TEST_CASE("gen_ground_truth: class conformance (Table rows)") {
    for (int d : {1, 2, 3, 5, 7}) {
        const GroundTruth rigid = gen_ground_truth(6, d, TransformClass::Rigid, 100 + d);
        for (const Transform& t : rigid.absolute) {
            const Eigen::MatrixXd q = t.linear();
            CHECK(q.determinant() == doctest::Approx(1.0).epsilon(1e-10));
            CHECK((q.transpose() * q - Eigen::MatrixXd::Identity(d, d)).norm() < 1e-10);
        }

        const GroundTruth lin = gen_ground_truth(6, d, TransformClass::Linear, 200 + d);
        for (const Transform& t : lin.absolute) {
            CHECK(t.kind() == MatrixKind::Linear);
            CHECK(t.translation().norm() == 0.0);
        }

        const GroundTruth euc = gen_ground_truth(6, d, TransformClass::Euclidean, 300 + d);
        for (const Transform& t : euc.absolute) {
            const Eigen::MatrixXd q = t.linear();
            CHECK((q.transpose() * q - Eigen::MatrixXd::Identity(d, d)).norm() < 1e-10);
        }

        const GroundTruth sim = gen_ground_truth(6, d, TransformClass::Similarity, 400 + d);
        for (const Transform& t : sim.absolute) {
            const SimilarityParts p = decompose_similarity(t);
            CHECK(p.scale > 0.5);
            CHECK(p.scale < 1.5);
            CHECK(max_abs_diff(p.scale * p.orthogonal, t.linear()) < 1e-10);
        }
    }
}

TEST_CASE("gen_ground_truth: determinism and consistency across sizes") {
    const GroundTruth a = gen_ground_truth(8, 3, TransformClass::Affine, 42);
    const GroundTruth b = gen_ground_truth(8, 3, TransformClass::Affine, 42);
    for (std::size_t i = 0; i < a.absolute.size(); ++i)
        CHECK(max_abs_diff(a.absolute[i].matrix(), b.absolute[i].matrix()) == 0.0);
    CHECK(a.seed == 42);

    int seed = 0;
    for (TransformClass cls : {TransformClass::Linear, TransformClass::Affine,
                               TransformClass::Similarity, TransformClass::Euclidean,
                               TransformClass::Rigid}) {
        for (int d : {1, 4, 7}) {
            for (int k : {2, 11, 60}) {
                const GroundTruth gt = gen_ground_truth(k, d, cls, 1000 + seed++);
                CHECK(consistency_residual(gt.pairwise) < 1e-9);
            }
        }
    }
}

TEST_CASE("gen_ground_truth: translation range variants") {
    const GroundTruth wide = gen_ground_truth(40, 3, TransformClass::Affine, 7,
                                              TranslationRange::Wide);
    const GroundTruth narrow = gen_ground_truth(40, 3, TransformClass::Affine, 7,
                                                TranslationRange::Narrow);
    double wide_min = 1e9, narrow_min = 1e9, narrow_max = -1e9;
    for (const Transform& t : wide.absolute)
        wide_min = std::min(wide_min, t.translation().minCoeff());
    for (const Transform& t : narrow.absolute) {
        narrow_min = std::min(narrow_min, t.translation().minCoeff());
        narrow_max = std::max(narrow_max, t.translation().maxCoeff());
    }
    CHECK(wide_min < 0.0);  // wide range straddles zero
    CHECK(narrow_min >= 0.5);
    CHECK(narrow_max <= 1.5);
}

TEST_CASE("add_gaussian_noise: exactness at sigma=0, exempt columns, variance") {
    const GroundTruth gt = gen_ground_truth(5, 2, TransformClass::Affine, 9);
    RandomEngine rng(1);
    const PairwiseTransformSet zero = add_gaussian_noise(gt.pairwise, 0.0, rng);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            CHECK(max_abs_diff(zero.at(i, j).matrix(), gt.pairwise.at(i, j).matrix()) == 0.0);

    const PairwiseTransformSet noisy = add_gaussian_noise(gt.pairwise, 0.3, rng);
    for (int i = 0; i < 5; ++i) {
        CHECK(max_abs_diff(noisy.at(i, i).matrix(), Eigen::MatrixXd::Identity(3, 3)) == 0.0);
        for (int j = 0; j < 5; ++j) {
            CHECK(noisy.at(i, j).matrix()(0, 2) == 0.0);
            CHECK(noisy.at(i, j).matrix()(1, 2) == 0.0);
            CHECK(noisy.at(i, j).matrix()(2, 2) == 1.0);
        }
    }

    // Monte-Carlo variance of the added noise at sigma = 0.1 over >= 1e5
    // perturbed entries.
    const GroundTruth big = gen_ground_truth(106, 3, TransformClass::Linear, 11);
    RandomEngine rng2(2);
    const PairwiseTransformSet perturbed = add_gaussian_noise(big.pairwise, 0.1, rng2);
    double sum = 0.0, sum_sq = 0.0;
    int count = 0;
    for (int i = 0; i < 106; ++i) {
        for (int j = 0; j < 106; ++j) {
            if (i == j) continue;
            const Eigen::MatrixXd diff =
                perturbed.at(i, j).matrix() - big.pairwise.at(i, j).matrix();
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) {
                    sum += diff(r, c);
                    sum_sq += diff(r, c) * diff(r, c);
                    ++count;
                }
        }
    }
    CHECK(count >= 100000);
    const double mean = sum / count;
    const double var = sum_sq / count - mean * mean;
    CHECK(var > 0.0095);
    CHECK(var < 0.0105);
}

TEST_CASE("transform_error: zero, hand value, symmetry") {
    const GroundTruth gt = gen_ground_truth(4, 2, TransformClass::Similarity, 13);
    CHECK(transform_error(gt.pairwise, gt.pairwise) == 0.0);

    // k=1 set whose single block differs by Frobenius norm 3.
    PairwiseTransformSet a(1, 2, MatrixKind::Linear, TransformClass::Linear);
    PairwiseTransformSet b(1, 2, MatrixKind::Linear, TransformClass::Linear);
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(2, 2);
    m(0, 0) += 3.0;
    b.set(0, 0, Transform::from_linear(m));
    CHECK(transform_error(a, b) == doctest::Approx(3.0));
    CHECK(transform_error(b, a) == doctest::Approx(3.0));

    RandomEngine rng(3);
    const PairwiseTransformSet noisy = add_gaussian_noise(gt.pairwise, 0.2, rng);
    CHECK(transform_error(gt.pairwise, noisy) == doctest::Approx(transform_error(noisy, gt.pairwise)));
}

TEST_CASE("drop_points: trivial eta, redraw guarantee, marginal rate") {
    RandomEngine rng(5);
    const std::vector<PointCloud> shapes = gen_shapes(30, 98, 2, 1.0, 0.01, 17);

    const std::vector<PointCloud> untouched = drop_points(shapes, 0.0, rng);
    for (const PointCloud& c : untouched) CHECK(c.all_present());

    // eta = 0.5: every pair keeps >= d = 2 common points by the redraw rule.
    const std::vector<PointCloud> masked = drop_points(shapes, 0.5, rng);
    for (std::size_t i = 0; i < masked.size(); ++i) {
        for (std::size_t j = i + 1; j < masked.size(); ++j) {
            int common = 0;
            for (int r = 0; r < masked[i].n(); ++r)
                if (masked[i].present[static_cast<std::size_t>(r)] &&
                    masked[j].present[static_cast<std::size_t>(r)])
                    ++common;
            CHECK(common >= 2);
        }
    }
    // Coordinates are preserved, only masks change.
    for (std::size_t i = 0; i < masked.size(); ++i)
        CHECK(max_abs_diff(masked[i].points, shapes[i].points) == 0.0);

    // Empirical missing rate at eta = 0.3 over >= 1e5 Bernoulli trials.
    RandomEngine rng2(6);
    int missing = 0, total = 0;
    for (int rep = 0; rep < 40; ++rep) {
        const std::vector<PointCloud> draw = drop_points(shapes, 0.3, rng2);
        for (const PointCloud& c : draw) {
            for (int r = 0; r < c.n(); ++r) {
                if (!c.present[static_cast<std::size_t>(r)]) ++missing;
                ++total;
            }
        }
    }
    CHECK(total >= 100000);
    const double rate = static_cast<double>(missing) / total;
    CHECK(rate > 0.29);
    CHECK(rate < 0.31);

    CHECK_THROWS_AS(drop_points(shapes, 0.71, rng), ContractViolation);
}

TEST_CASE("drop_points: infeasible eta exhausts the redraw budget") {
    RandomEngine rng(7);
    // Two shapes with a single landmark in d=2 can never share 2 common
    // points, so any eta > 0 draw that hits them is redrawn forever.
    std::vector<PointCloud> tiny{PointCloud::full(Eigen::MatrixXd::Zero(1, 2)),
                                 PointCloud::full(Eigen::MatrixXd::Zero(1, 2))};
    CHECK_THROWS_AS(drop_points(tiny, 0.5, rng, 50), InfeasibleDrawError);
}

TEST_CASE("scramble_correspondences: trivial, full, untouched rows") {
    RandomEngine rng(8);
    const std::vector<PointCloud> shapes = gen_shapes(2, 50, 2, 1.0, 0.0, 23);
    const PointCloud& x = shapes[0];
    const PointCloud& y = shapes[1];

    const auto [x0, y0] = scramble_correspondences(x, y, 0.0, rng);
    CHECK(max_abs_diff(x0.points, x.points) == 0.0);
    CHECK(max_abs_diff(y0.points, y.points) == 0.0);

    // nu = 1: a permutation of all rows; the row multiset is preserved.
    const auto [x1, y1] = scramble_correspondences(x, y, 1.0, rng);
    auto sorted_rows = [](const Eigen::MatrixXd& m) {
        std::vector<std::pair<double, double>> rows;
        for (Eigen::Index r = 0; r < m.rows(); ++r) rows.emplace_back(m(r, 0), m(r, 1));
        std::sort(rows.begin(), rows.end());
        return rows;
    };
    CHECK(sorted_rows(y1.points) == sorted_rows(y.points));
    CHECK(max_abs_diff(x1.points, x.points) == 0.0);

    // nu = 0.4: unselected rows are untouched; exactly round(nu*n) rows may move.
    const auto [x2, y2] = scramble_correspondences(x, y, 0.4, rng);
    int moved = 0;
    for (int r = 0; r < y.n(); ++r)
        if ((y2.points.row(r) - y.points.row(r)).norm() > 0.0) ++moved;
    CHECK(moved <= 20);

    PointCloud holey = y;
    holey.present[0] = false;
    CHECK_THROWS_AS(scramble_correspondences(x, holey, 0.5, rng), ContractViolation);
}

TEST_CASE("gen_shapes: determinism, zero levels, monotone deformation") {
    const std::vector<PointCloud> a = gen_shapes(4, 40, 2, 2.0, 0.02, 31);
    const std::vector<PointCloud> b = gen_shapes(4, 40, 2, 2.0, 0.02, 31);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(max_abs_diff(a[i].points, b[i].points) == 0.0);

    const std::vector<PointCloud> clean = gen_shapes(5, 40, 2, 0.0, 0.0, 33);
    for (std::size_t i = 1; i < clean.size(); ++i)
        CHECK(max_abs_diff(clean[i].points, clean[0].points) == 0.0);

    // Mean landmark displacement grows with the deformation level.
    const std::vector<PointCloud> tmpl = gen_shapes(1, 60, 2, 0.0, 0.0, 1);
    double prev = -1.0;
    for (int level = 1; level <= 5; ++level) {
        double total = 0.0;
        int count = 0;
        for (int s = 0; s < 100; ++s) {
            const std::vector<PointCloud> warped =
                gen_shapes(1, 60, 2, static_cast<double>(level), 0.0,
                           derive_seed(55, {static_cast<std::uint64_t>(s)}));
            for (int r = 0; r < 60; ++r) {
                total += (warped[0].points.row(r) - tmpl[0].points.row(r)).norm();
                ++count;
            }
        }
        const double mean_disp = total / count;
        CHECK(mean_disp > prev);
        prev = mean_disp;
    }
}

TEST_CASE("run_noise_experiment: schema and determinism at desk scale") {
    NoiseExperimentConfig cfg;
    cfg.classes = {TransformClass::Similarity, TransformClass::Rigid};
    cfg.vary = NoiseExperimentConfig::Vary::Sigma;
    cfg.grid = {0.05, 0.2};
    cfg.k = 8;
    cfg.d = 2;
    cfg.truth_draws = 3;
    cfg.noise_draws = 2;
    cfg.seed = 77;

    const std::vector<ResultRow> rows = run_noise_experiment(cfg);
    CHECK(rows.size() == 2 * 2 * 2);  // classes x grid x {noisy, synced}
    for (const ResultRow& r : rows) {
        CHECK(r.trials == 6);
        CHECK(r.mean_error >= 0.0);
    }
    // Synced < noisy for each grid point and class at this noise level.
    for (std::size_t i = 0; i < rows.size(); i += 2)
        CHECK(rows[i + 1].mean_error < rows[i].mean_error);

    const std::vector<ResultRow> again = run_noise_experiment(cfg);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].mean_error == again[i].mean_error);
        CHECK(rows[i].std_error == again[i].std_error);
    }
}

TEST_CASE("run_gpp_experiment: exact-copy shapes give equal near-zero errors") {
    GppExperimentConfig cfg;
    cfg.axis = GppExperimentConfig::Axis::Missing;
    cfg.grid = {0.0};
    cfg.draws = 2;
    cfg.k = 6;
    cfg.seed = 5;
    cfg.source.K = 12;
    cfg.source.n = 40;
    cfg.source.d = 2;
    cfg.source.deform = 0.0;
    cfg.source.noise = 0.0;

    const std::vector<ResultRow> rows = run_gpp_experiment(cfg);
    CHECK(rows.size() == cfg.methods.size());
    for (const ResultRow& r : rows) CHECK(r.mean_error < 1e-6);
}

TEST_CASE("run_gpp_experiment: correspondence axis runs all methods") {
    GppExperimentConfig cfg;
    cfg.axis = GppExperimentConfig::Axis::Correspondence;
    cfg.grid = {0.0, 0.5};
    cfg.draws = 2;
    cfg.k = 5;
    cfg.seed = 6;
    cfg.source.K = 10;
    cfg.source.n = 30;
    cfg.source.d = 2;
    cfg.source.deform = 1.0;
    cfg.source.noise = 0.01;

    const std::vector<ResultRow> rows = run_gpp_experiment(cfg);
    CHECK(rows.size() == 2 * cfg.methods.size());
    for (const ResultRow& r : rows) {
        CHECK(std::isfinite(r.mean_error));
        CHECK(r.trials == 2);
    }
}
