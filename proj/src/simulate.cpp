#include "transsync/simulate.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace transsync {

void NoiseSpec::validate() const {
    if (!(sigma >= 0.0)) throw ContractViolation("NoiseSpec: sigma must be >= 0");
    if (!(eta >= 0.0 && eta <= 0.7))
        throw ContractViolation("NoiseSpec: eta must be in [0, 0.7]");
    if (!(nu >= 0.0 && nu <= 1.0)) throw ContractViolation("NoiseSpec: nu must be in [0, 1]");
}

Eigen::MatrixXd random_orthogonal(int d, RandomEngine& rng, bool proper) {
    if (d < 1) throw ContractViolation("random_orthogonal: d must be >= 1");
    for (int attempt = 0; attempt < 100; ++attempt) {
        Eigen::MatrixXd g(d, d);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) g(r, c) = rng.normal();
        if (!(condition_estimate(g) < 1e6)) continue;
        return proper ? project_rotation(g) : project_orthogonal(g);
    }
    throw InfeasibleDrawError("random_orthogonal: failed to draw a well-conditioned matrix");
}

GroundTruth gen_ground_truth(int k, int d, TransformClass cls, std::uint64_t seed,
                             TranslationRange range) {
    if (k < 2) throw ContractViolation("gen_ground_truth: k must be >= 2");
    if (d < 1) throw ContractViolation("gen_ground_truth: d must be >= 1");

    RandomEngine rng(seed);
    const MatrixKind kind = cls == TransformClass::Linear ? MatrixKind::Linear
                                                          : MatrixKind::Homogeneous;
    const bool proper = cls == TransformClass::Rigid;
    const bool perturb_linear = cls == TransformClass::Linear || cls == TransformClass::Affine;
    const bool unit_scale = cls == TransformClass::Euclidean || cls == TransformClass::Rigid;
    const double t_lo = range == TranslationRange::Wide ? -2.5 : 0.5;
    const double t_hi = range == TranslationRange::Wide ? 2.5 : 1.5;

    std::vector<Transform> absolute;
    absolute.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        bool accepted = false;
        for (int attempt = 0; attempt < 100 && !accepted; ++attempt) {
            const Eigen::MatrixXd q = random_orthogonal(d, rng, proper);
            const double s = unit_scale ? 1.0 : rng.uniform(0.5, 1.5);
            Eigen::MatrixXd a = s * q;
            if (perturb_linear) {
                Eigen::MatrixXd n(d, d);
                for (int r = 0; r < d; ++r)
                    for (int c = 0; c < d; ++c)
                        n(r, c) = (r == c ? 1.0 : 0.0) + rng.normal(0.0, 0.1);
                a = s * q * n;
            }
            Eigen::RowVectorXd t = Eigen::RowVectorXd::Zero(d);
            if (cls != TransformClass::Linear)
                for (int c = 0; c < d; ++c) t(c) = rng.uniform(t_lo, t_hi);

            if (!(condition_estimate(a) < 1e6)) continue;
            if (kind == MatrixKind::Linear)
                absolute.push_back(Transform::from_linear(a));
            else
                absolute.push_back(Transform::from_affine(a, t));
            accepted = true;
        }
        if (!accepted)
            throw InfeasibleDrawError(
                "gen_ground_truth: could not sample a well-conditioned transform");
    }

    PairwiseTransformSet pairwise(k, d, kind, cls);
    std::vector<Transform> inverses;
    inverses.reserve(absolute.size());
    for (const Transform& t : absolute) inverses.push_back(invert(t));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            if (i == j) continue;
            pairwise.set(i, j,
                         compose(absolute[static_cast<std::size_t>(i)],
                                 inverses[static_cast<std::size_t>(j)]));
        }

    return GroundTruth{std::move(absolute), std::move(pairwise), cls, seed};
}

PairwiseTransformSet add_gaussian_noise(const PairwiseTransformSet& set, double sigma,
                                        RandomEngine& rng) {
    if (!(sigma >= 0.0)) throw ContractViolation("add_gaussian_noise: sigma must be >= 0");
    const int k = set.k();
    const int d = set.dim();
    const bool homogeneous = set.kind() == MatrixKind::Homogeneous;
    const int cols = homogeneous ? d : d;  // noisy columns; the last homogeneous column is exempt
    const int rows = homogeneous ? d + 1 : d;

    PairwiseTransformSet out(k, d, set.kind(), set.transform_class());
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            if (i == j || !set.has(i, j)) continue;
            Eigen::MatrixXd m = set.at(i, j).matrix();
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c) m(r, c) += sigma * rng.normal();
            out.set(i, j, Transform(d, set.kind(), std::move(m)));
        }
    }
    return out;
}

double transform_error(const PairwiseTransformSet& a, const PairwiseTransformSet& b) {
    if (a.k() != b.k() || a.dim() != b.dim() || a.kind() != b.kind())
        throw ContractViolation("transform_error: sets disagree in k, dim or kind");
    const int k = a.k();
    double sum = 0.0;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) sum += (a.at(i, j).matrix() - b.at(i, j).matrix()).norm();
    return sum / (static_cast<double>(k) * static_cast<double>(k));
}

std::vector<PointCloud> drop_points(const std::vector<PointCloud>& shapes, double eta,
                                    RandomEngine& rng, int max_attempts) {
    if (!(eta >= 0.0 && eta <= 0.7))
        throw ContractViolation("drop_points: eta must be in [0, 0.7]");
    if (shapes.empty()) throw ContractViolation("drop_points: empty shape list");
    const int d = shapes.front().d();

    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        std::vector<PointCloud> out = shapes;
        for (PointCloud& c : out) {
            for (int r = 0; r < c.n(); ++r) {
                if (rng.uniform01() < eta) c.present[static_cast<std::size_t>(r)] = false;
            }
        }

        bool feasible = true;
        for (std::size_t i = 0; i < out.size() && feasible; ++i) {
            for (std::size_t j = i + 1; j < out.size() && feasible; ++j) {
                int common = 0;
                for (int r = 0; r < out[i].n(); ++r)
                    if (out[i].present[static_cast<std::size_t>(r)] &&
                        out[j].present[static_cast<std::size_t>(r)])
                        ++common;
                if (common < d) feasible = false;
            }
        }
        if (feasible) return out;
    }
    throw InfeasibleDrawError("drop_points: no feasible draw within " +
                              std::to_string(max_attempts) + " attempts at eta=" +
                              std::to_string(eta));
}

std::pair<PointCloud, PointCloud> scramble_correspondences(const PointCloud& x,
                                                           const PointCloud& y, double nu,
                                                           RandomEngine& rng) {
    if (!(nu >= 0.0 && nu <= 1.0))
        throw ContractViolation("scramble_correspondences: nu must be in [0, 1]");
    if (x.n() != y.n() || x.d() != y.d())
        throw ContractViolation("scramble_correspondences: clouds must share n and d");
    if (!x.all_present() || !y.all_present())
        throw ContractViolation("scramble_correspondences: defined on full masks only");

    const int n = x.n();
    const int m = static_cast<int>(std::lround(nu * n));
    const std::vector<int> selected = rng.sample_without_replacement(n, m);
    std::vector<int> permuted = selected;
    rng.shuffle(permuted);

    PointCloud y2 = y;
    for (int t = 0; t < m; ++t)
        y2.points.row(selected[static_cast<std::size_t>(t)]) =
            y.points.row(permuted[static_cast<std::size_t>(t)]);
    return {x, std::move(y2)};
}

namespace {

// Fixed closed-outline template: a smooth asymmetric curve for the first two
// coordinates, low-frequency harmonics for any further ones. d = 1 falls
// back to a segment.
Eigen::MatrixXd shape_template(int n, int d) {
    Eigen::MatrixXd pts(n, d);
    for (int i = 0; i < n; ++i) {
        const double th = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        if (d == 1) {
            pts(i, 0) = 2.0 * static_cast<double>(i) / static_cast<double>(n) - 1.0;
            continue;
        }
        const double r = 1.0 + 0.35 * std::cos(th) + 0.18 * std::cos(2.0 * th) -
                         0.10 * std::sin(3.0 * th);
        pts(i, 0) = r * std::cos(th);
        pts(i, 1) = 0.6 * r * std::sin(th);
        for (int c = 2; c < d; ++c)
            pts(i, c) = 0.3 * std::sin(static_cast<double>(c) * th + 0.7 * static_cast<double>(c));
    }
    return pts;
}

}  // namespace

std::vector<PointCloud> gen_shapes(int K, int n, int d, double deform_level,
                                   double noise_level, std::uint64_t seed) {
    if (K < 1) throw ContractViolation("gen_shapes: K must be >= 1");
    if (d < 1) throw ContractViolation("gen_shapes: d must be >= 1");
    if (n < d) throw ContractViolation("gen_shapes: n must be >= d");
    if (!(deform_level >= 0.0) || !(noise_level >= 0.0))
        throw ContractViolation("gen_shapes: levels must be >= 0");

    const Eigen::MatrixXd base = shape_template(n, d);
    const double warp_scale = 0.03 * deform_level;

    std::vector<PointCloud> shapes;
    shapes.reserve(static_cast<std::size_t>(K));
    for (int s = 0; s < K; ++s) {
        RandomEngine rng(derive_seed(seed, {static_cast<std::uint64_t>(s)}));

        // Smooth quadratic displacement field, one coefficient set per shape.
        Eigen::VectorXd b(d);
        Eigen::MatrixXd lin(d, d);
        std::vector<Eigen::MatrixXd> quad(static_cast<std::size_t>(d));
        for (int a = 0; a < d; ++a) {
            b(a) = rng.normal();
            for (int c = 0; c < d; ++c) lin(a, c) = rng.normal();
            Eigen::MatrixXd qa(d, d);
            for (int c = 0; c < d; ++c)
                for (int e = 0; e < d; ++e) qa(c, e) = rng.normal();
            quad[static_cast<std::size_t>(a)] = 0.5 * (qa + qa.transpose());
        }

        Eigen::MatrixXd pts = base;
        for (int r = 0; r < n; ++r) {
            const Eigen::VectorXd p = base.row(r).transpose();
            for (int a = 0; a < d; ++a) {
                const double quad_term = p.dot(quad[static_cast<std::size_t>(a)] * p);
                pts(r, a) += warp_scale * (b(a) + lin.row(a).dot(p) + quad_term);
            }
        }
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < d; ++c) pts(r, c) += noise_level * rng.normal();

        shapes.push_back(PointCloud::full(std::move(pts)));
    }
    return shapes;
}

}  // namespace transsync
