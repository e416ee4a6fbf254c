#include "transsync/procrustes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace transsync {

PointCloud::PointCloud(Eigen::MatrixXd pts, std::vector<bool> mask)
    : points(std::move(pts)), present(std::move(mask)) {
    if (present.size() != static_cast<std::size_t>(points.rows()))
        throw ContractViolation("PointCloud: mask length does not match point count");
}

PointCloud PointCloud::full(Eigen::MatrixXd pts) {
    std::vector<bool> mask(static_cast<std::size_t>(pts.rows()), true);
    return PointCloud(std::move(pts), std::move(mask));
}

int PointCloud::present_count() const {
    return static_cast<int>(std::count(present.begin(), present.end(), true));
}

bool PointCloud::all_present() const {
    return std::all_of(present.begin(), present.end(), [](bool p) { return p; });
}

const char* to_string(GpaMethod method) {
    switch (method) {
        case GpaMethod::Reference: return "reference";
        case GpaMethod::IterativeMean: return "itermean";
        case GpaMethod::Sync: return "sync";
    }
    return "?";
}

GpaMethod gpa_method_from_string(const std::string& s) {
    if (s == "reference") return GpaMethod::Reference;
    if (s == "itermean") return GpaMethod::IterativeMean;
    if (s == "sync") return GpaMethod::Sync;
    throw ContractViolation("unknown GPA method '" + s + "' (expected reference|itermean|sync)");
}

namespace {

std::vector<int> common_rows(const PointCloud& x, const PointCloud& y) {
    std::vector<int> rows;
    for (int i = 0; i < x.n(); ++i)
        if (x.present[static_cast<std::size_t>(i)] && y.present[static_cast<std::size_t>(i)])
            rows.push_back(i);
    return rows;
}

Eigen::MatrixXd gather(const PointCloud& c, const std::vector<int>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), c.d());
    for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = c.points.row(rows[r]);
    return out;
}

// Orthogonal (or rotation) factor of a cross-covariance matrix. Unlike
// project_orthogonal this accepts rank-deficient input: with exactly d
// common points the centred covariance has rank d-1 and the undetermined
// direction may be completed arbitrarily, any completion being a
// least-squares minimiser.
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov, bool proper) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (!proper) return svd.matrixU() * svd.matrixV().transpose();
    const int d = static_cast<int>(cov.rows());
    Eigen::VectorXd diag = Eigen::VectorXd::Ones(d);
    diag(d - 1) =
        (svd.matrixV().transpose() * svd.matrixU()).determinant() < 0.0 ? -1.0 : 1.0;
    return svd.matrixU() * diag.asDiagonal() * svd.matrixV().transpose();
}

// Pairwise error between two clouds over their commonly-present rows.
double pair_distance(const PointCloud& a, const PointCloud& b) {
    double sum = 0.0;
    for (int r = 0; r < a.n(); ++r) {
        if (a.present[static_cast<std::size_t>(r)] && b.present[static_cast<std::size_t>(r)])
            sum += (a.points.row(r) - b.points.row(r)).squaredNorm();
    }
    return std::sqrt(sum);
}

double aligned_error(const std::vector<PointCloud>& aligned) {
    const std::size_t k = aligned.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) sum += 2.0 * pair_distance(aligned[i], aligned[j]);
    return sum / (static_cast<double>(k) * static_cast<double>(k));
}

void check_shape_list(const std::vector<PointCloud>& shapes, const char* who) {
    if (shapes.size() < 2) throw ContractViolation(std::string(who) + ": need at least 2 shapes");
    const int n = shapes.front().n();
    const int d = shapes.front().d();
    for (const PointCloud& s : shapes) {
        if (s.n() != n || s.d() != d)
            throw ContractViolation(std::string(who) + ": shapes disagree in size");
    }
}

}  // namespace

Transform solve_aop(const PointCloud& x, const PointCloud& y, TransformClass cls) {
    if (cls != TransformClass::Similarity && cls != TransformClass::Euclidean &&
        cls != TransformClass::Rigid)
        throw ContractViolation("solve_aop: class must be similarity, euclidean or rigid");
    if (x.n() != y.n() || x.d() != y.d())
        throw ContractViolation("solve_aop: clouds must share n and d");
    const int d = x.d();

    const std::vector<int> rows = common_rows(x, y);
    const int m = static_cast<int>(rows.size());
    if (m < d)
        throw UnderDeterminedError("solve_aop: only " + std::to_string(m) +
                                   " common points for d=" + std::to_string(d) +
                                   "; the alignment is under-determined");

    const Eigen::MatrixXd xc_raw = gather(x, rows);
    const Eigen::MatrixXd yc_raw = gather(y, rows);
    if (!xc_raw.allFinite() || !yc_raw.allFinite())
        throw ContractViolation("solve_aop: clouds contain non-finite coordinates");

    const Eigen::RowVectorXd mu_x = xc_raw.colwise().mean();
    const Eigen::RowVectorXd mu_y = yc_raw.colwise().mean();
    const Eigen::MatrixXd xc = xc_raw.rowwise() - mu_x;
    const Eigen::MatrixXd yc = yc_raw.rowwise() - mu_y;

    const double sum_x = xc.squaredNorm();
    const double sum_y = yc.squaredNorm();
    const double scale_floor_x = 1e-14 * (1.0 + mu_x.cwiseAbs().maxCoeff());
    const double scale_floor_y = 1e-14 * (1.0 + mu_y.cwiseAbs().maxCoeff());
    if (sum_x < scale_floor_x * scale_floor_x || sum_y < scale_floor_y * scale_floor_y)
        throw DegenerateError("solve_aop: common points are (near-)coincident");

    const Eigen::MatrixXd cov = xc.transpose() * yc;
    const Eigen::MatrixXd q = covariance_factor(cov, cls == TransformClass::Rigid);

    const double s = cls == TransformClass::Similarity ? std::sqrt(sum_y / sum_x) : 1.0;
    const Eigen::MatrixXd a = s * q;
    const Eigen::RowVectorXd t = mu_y - mu_x * a;
    return Transform::from_affine(a, t);
}

PointCloud apply(const Transform& t, const PointCloud& x) {
    if (t.dim() != x.d()) throw ContractViolation("apply: transform and cloud dimension mismatch");
    const Eigen::MatrixXd a = t.linear();
    const Eigen::RowVectorXd tr = t.translation();
    PointCloud out = x;
    for (int r = 0; r < x.n(); ++r) {
        if (x.present[static_cast<std::size_t>(r)])
            out.points.row(r) = x.points.row(r) * a + tr;
    }
    return out;
}

GpaOutcome gpa_reference(const std::vector<PointCloud>& shapes, int ref, TransformClass cls) {
    check_shape_list(shapes, "gpa_reference");
    const int k = static_cast<int>(shapes.size());
    if (ref < 0 || ref >= k) throw ContractViolation("gpa_reference: reference index out of range");
    const int d = shapes.front().d();

    GpaOutcome out;
    out.method = GpaMethod::Reference;
    out.transforms.reserve(shapes.size());
    for (int i = 0; i < k; ++i) {
        if (i == ref) {
            out.transforms.push_back(Transform::identity(d, MatrixKind::Homogeneous));
            continue;
        }
        try {
            out.transforms.push_back(solve_aop(shapes[static_cast<std::size_t>(i)],
                                               shapes[static_cast<std::size_t>(ref)], cls));
        } catch (const UnderDeterminedError& e) {
            throw UnderDeterminedError("pair (" + std::to_string(i) + ", " + std::to_string(ref) +
                                       "): " + e.what());
        }
    }
    out.aligned.reserve(shapes.size());
    for (int i = 0; i < k; ++i)
        out.aligned.push_back(apply(out.transforms[static_cast<std::size_t>(i)],
                                    shapes[static_cast<std::size_t>(i)]));
    out.error = aligned_error(out.aligned);
    out.iterations = 1;
    return out;
}

namespace {

// Per-landmark average over the clouds where the landmark is present.
// Landmarks observed nowhere are simply absent from the mean.
PointCloud mean_shape(const std::vector<PointCloud>& clouds) {
    const int n = clouds.front().n();
    const int d = clouds.front().d();
    Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(n, d);
    std::vector<bool> mask(static_cast<std::size_t>(n), false);
    for (int r = 0; r < n; ++r) {
        int count = 0;
        for (const PointCloud& c : clouds) {
            if (c.present[static_cast<std::size_t>(r)]) {
                pts.row(r) += c.points.row(r);
                ++count;
            }
        }
        if (count > 0) {
            pts.row(r) /= static_cast<double>(count);
            mask[static_cast<std::size_t>(r)] = true;
        }
    }
    return PointCloud(std::move(pts), std::move(mask));
}

// Centred Frobenius norm over present rows, plus the centroid.
std::pair<double, Eigen::RowVectorXd> centred_norm(const PointCloud& c) {
    std::vector<int> rows;
    for (int r = 0; r < c.n(); ++r)
        if (c.present[static_cast<std::size_t>(r)]) rows.push_back(r);
    if (rows.empty()) throw DegenerateError("mean shape has no present landmarks");
    const Eigen::MatrixXd pts = gather(c, rows);
    const Eigen::RowVectorXd mu = pts.colwise().mean();
    return {(pts.rowwise() - mu).norm(), mu};
}

double mean_change(const PointCloud& a, const PointCloud& b) {
    double sum = 0.0;
    for (int r = 0; r < a.n(); ++r) {
        if (a.present[static_cast<std::size_t>(r)] && b.present[static_cast<std::size_t>(r)])
            sum += (a.points.row(r) - b.points.row(r)).squaredNorm();
    }
    return std::sqrt(sum);
}

}  // namespace

GpaOutcome gpa_iterative_mean(const std::vector<PointCloud>& shapes, TransformClass cls,
                              double tol, int max_iter, RandomEngine& rng) {
    check_shape_list(shapes, "gpa_iterative_mean");
    if (!(tol > 0.0)) throw ContractViolation("gpa_iterative_mean: tol must be > 0");
    if (max_iter < 1) throw ContractViolation("gpa_iterative_mean: max_iter must be >= 1");
    const int k = static_cast<int>(shapes.size());

    const int ref = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
    PointCloud mean = shapes[static_cast<std::size_t>(ref)];
    const auto [norm0, mu0] = centred_norm(mean);
    if (norm0 <= 0.0) throw DegenerateError("gpa_iterative_mean: reference shape has no spread");

    GpaOutcome out;
    out.method = GpaMethod::IterativeMean;
    out.converged = false;

    for (int iter = 1; iter <= max_iter; ++iter) {
        out.transforms.clear();
        out.aligned.clear();
        for (int i = 0; i < k; ++i) {
            Transform t = solve_aop(shapes[static_cast<std::size_t>(i)], mean, cls);
            out.aligned.push_back(apply(t, shapes[static_cast<std::size_t>(i)]));
            out.transforms.push_back(std::move(t));
        }

        PointCloud next = mean_shape(out.aligned);
        const auto [norm_next, mu_next] = centred_norm(next);
        if (norm_next <= 0.0) throw DegenerateError("gpa_iterative_mean: mean shape collapsed");
        // Pin the centred norm to the initial reference's so similarity
        // alignment cannot shrink everything towards a point.
        const double gain = norm0 / norm_next;
        for (int r = 0; r < next.n(); ++r) {
            if (next.present[static_cast<std::size_t>(r)])
                next.points.row(r) = mu_next + gain * (next.points.row(r) - mu_next);
        }

        const double change = mean_change(mean, next);
        mean = std::move(next);
        out.iterations = iter;
        out.mean_changes.push_back(change);
        if (change < tol) {
            out.converged = true;
            break;
        }
    }

    out.error = aligned_error(out.aligned);
    return out;
}

GpaOutcome gpa_sync(const std::vector<PointCloud>& shapes, TransformClass cls,
                    ScaleMode scale_mode) {
    check_shape_list(shapes, "gpa_sync");
    const int k = static_cast<int>(shapes.size());
    const int d = shapes.front().d();

    PairwiseTransformSet pairwise(k, d, MatrixKind::Homogeneous, cls);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            if (i == j) continue;
            try {
                pairwise.set(i, j,
                             solve_aop(shapes[static_cast<std::size_t>(i)],
                                       shapes[static_cast<std::size_t>(j)], cls));
            } catch (const UnderDeterminedError& e) {
                throw UnderDeterminedError("pair (" + std::to_string(i) + ", " +
                                           std::to_string(j) + "): " + e.what());
            }
        }
    }

    const SyncResult result = synchronise(pairwise, cls, scale_mode);

    GpaOutcome out;
    out.method = GpaMethod::Sync;
    out.transforms = result.absolute;
    out.aligned.reserve(shapes.size());
    for (int i = 0; i < k; ++i)
        out.aligned.push_back(apply(out.transforms[static_cast<std::size_t>(i)],
                                    shapes[static_cast<std::size_t>(i)]));
    out.error = aligned_error(out.aligned);
    out.iterations = 1;
    return out;
}

double shape_error(const std::vector<PointCloud>& aligned) {
    if (aligned.empty()) throw ContractViolation("shape_error: empty shape list");
    const int n = aligned.front().n();
    const int d = aligned.front().d();
    for (const PointCloud& c : aligned) {
        if (c.n() != n || c.d() != d)
            throw ContractViolation("shape_error: shapes disagree in size");
        if (!c.all_present())
            throw ContractViolation("shape_error: defined on complete shapes only");
    }
    const std::size_t k = aligned.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            sum += 2.0 * (aligned[i].points - aligned[j].points).norm();
    return sum / (static_cast<double>(k) * static_cast<double>(k));
}

}  // namespace transsync
