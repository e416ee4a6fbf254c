#include "transsync/experiment.hpp"

#include <cmath>
#include <string>

namespace transsync {

namespace {

struct Stats {
    double mean = 0.0;
    double stddev = 0.0;
};

Stats summarise(const std::vector<double>& values) {
    Stats s;
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double acc = 0.0;
        for (double v : values) acc += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(acc / static_cast<double>(values.size() - 1));
    }
    return s;
}

}  // namespace

void NoiseExperimentConfig::validate() const {
    if (grid.empty()) throw ContractViolation("noise experiment: empty grid");
    if (classes.empty()) throw ContractViolation("noise experiment: no classes selected");
    if (k < 2) throw ContractViolation("noise experiment: k must be >= 2");
    if (d < 1) throw ContractViolation("noise experiment: d must be >= 1");
    if (!(sigma >= 0.0)) throw ContractViolation("noise experiment: sigma must be >= 0");
    if (truth_draws < 1 || noise_draws < 1)
        throw ContractViolation("noise experiment: trial counts must be >= 1");
    for (double v : grid) {
        if (vary == Vary::Sigma && !(v >= 0.0))
            throw ContractViolation("noise experiment: sigma grid values must be >= 0");
        if (vary == Vary::K && !(v >= 2.0 && v == std::floor(v)))
            throw ContractViolation("noise experiment: k grid values must be integers >= 2");
        if (vary == Vary::D && !(v >= 1.0 && v == std::floor(v)))
            throw ContractViolation("noise experiment: d grid values must be integers >= 1");
    }
}

std::vector<ResultRow> run_noise_experiment(const NoiseExperimentConfig& config) {
    config.validate();
    std::vector<ResultRow> rows;

    for (std::size_t ci = 0; ci < config.classes.size(); ++ci) {
        const TransformClass cls = config.classes[ci];
        for (std::size_t gi = 0; gi < config.grid.size(); ++gi) {
            const double value = config.grid[gi];
            const int k = config.vary == NoiseExperimentConfig::Vary::K
                              ? static_cast<int>(value)
                              : config.k;
            const int d = config.vary == NoiseExperimentConfig::Vary::D
                              ? static_cast<int>(value)
                              : config.d;
            const double sigma =
                config.vary == NoiseExperimentConfig::Vary::Sigma ? value : config.sigma;

            std::vector<double> noisy_errors;
            std::vector<double> synced_errors;
            noisy_errors.reserve(static_cast<std::size_t>(config.truth_draws) *
                                 static_cast<std::size_t>(config.noise_draws));
            synced_errors.reserve(noisy_errors.capacity());

            for (int g = 0; g < config.truth_draws; ++g) {
                // When only sigma varies, reuse the same ground truths across
                // the grid so curves differ by the noise level alone.
                const std::uint64_t truth_seed =
                    config.vary == NoiseExperimentConfig::Vary::Sigma
                        ? derive_seed(config.seed, {1, ci, static_cast<std::uint64_t>(g)})
                        : derive_seed(config.seed, {1, ci, gi, static_cast<std::uint64_t>(g)});
                const GroundTruth truth =
                    gen_ground_truth(k, d, cls, truth_seed, config.translation_range);

                for (int r = 0; r < config.noise_draws; ++r) {
                    RandomEngine noise_rng(derive_seed(
                        config.seed,
                        {2, ci, gi, static_cast<std::uint64_t>(g), static_cast<std::uint64_t>(r)}));
                    const PairwiseTransformSet noisy =
                        add_gaussian_noise(truth.pairwise, sigma, noise_rng);
                    noisy_errors.push_back(transform_error(noisy, truth.pairwise));

                    const SyncResult result = synchronise(noisy, cls, config.scale_mode);
                    const PairwiseTransformSet synced = reconstruct_pairwise(result);
                    synced_errors.push_back(transform_error(synced, truth.pairwise));
                }
            }

            const Stats noisy_stats = summarise(noisy_errors);
            const Stats synced_stats = summarise(synced_errors);
            const int trials = config.truth_draws * config.noise_draws;
            rows.push_back({value, std::string(to_string(cls)) + ".noisy", noisy_stats.mean,
                            noisy_stats.stddev, trials});
            rows.push_back({value, std::string(to_string(cls)) + ".synced", synced_stats.mean,
                            synced_stats.stddev, trials});
        }
    }
    return rows;
}

void GppExperimentConfig::validate() const {
    if (grid.empty()) throw ContractViolation("gpp experiment: empty grid");
    if (methods.empty()) throw ContractViolation("gpp experiment: no methods selected");
    if (draws < 1) throw ContractViolation("gpp experiment: draws must be >= 1");
    if (k < 2) throw ContractViolation("gpp experiment: k must be >= 2");
    for (double v : grid) {
        if (axis == Axis::Missing && !(v >= 0.0 && v <= 0.7))
            throw ContractViolation("gpp experiment: eta grid values must be in [0, 0.7]");
        if (axis == Axis::Correspondence && !(v >= 0.0 && v <= 1.0))
            throw ContractViolation("gpp experiment: nu grid values must be in [0, 1]");
    }
    if (source.type == ShapeSource::Type::Synthetic) {
        if (source.K < k) throw ContractViolation("gpp experiment: source.K must be >= k");
        if (source.n < source.d)
            throw ContractViolation("gpp experiment: source.n must be >= source.d");
    }
}

namespace {

std::vector<PointCloud> select_shapes(const std::vector<PointCloud>& all,
                                      const std::vector<int>& indices) {
    std::vector<PointCloud> out;
    out.reserve(indices.size());
    for (int idx : indices) out.push_back(all[static_cast<std::size_t>(idx)]);
    return out;
}

double error_on_originals(const std::vector<PointCloud>& originals,
                          const std::vector<Transform>& transforms) {
    std::vector<PointCloud> mapped;
    mapped.reserve(originals.size());
    for (std::size_t i = 0; i < originals.size(); ++i)
        mapped.push_back(apply(transforms[i], originals[i]));
    return shape_error(mapped);
}

// Pairwise AOPs with the correspondences of each ordered pair disturbed
// independently, then synchronised.
std::vector<Transform> sync_with_scrambles(const std::vector<PointCloud>& originals,
                                           double nu, TransformClass cls, ScaleMode scale_mode,
                                           RandomEngine& rng) {
    const int k = static_cast<int>(originals.size());
    const int d = originals.front().d();
    PairwiseTransformSet pairwise(k, d, MatrixKind::Homogeneous, cls);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            if (i == j) continue;
            const auto [xi, yj] =
                scramble_correspondences(originals[static_cast<std::size_t>(i)],
                                         originals[static_cast<std::size_t>(j)], nu, rng);
            pairwise.set(i, j, solve_aop(xi, yj, cls));
        }
    }
    return synchronise(pairwise, cls, scale_mode).absolute;
}

std::vector<Transform> reference_with_scrambles(const std::vector<PointCloud>& originals,
                                                double nu, TransformClass cls,
                                                RandomEngine& rng) {
    const int k = static_cast<int>(originals.size());
    const int d = originals.front().d();
    std::vector<Transform> transforms;
    transforms.reserve(static_cast<std::size_t>(k));
    transforms.push_back(Transform::identity(d, MatrixKind::Homogeneous));
    for (int i = 1; i < k; ++i) {
        const auto [xi, yref] = scramble_correspondences(
            originals[static_cast<std::size_t>(i)], originals[0], nu, rng);
        transforms.push_back(solve_aop(xi, yref, cls));
    }
    return transforms;
}

}  // namespace

std::vector<ResultRow> run_gpp_experiment(const GppExperimentConfig& config,
                                          const std::vector<PointCloud>& shapes) {
    config.validate();
    if (static_cast<int>(shapes.size()) < config.k)
        throw ContractViolation("gpp experiment: fewer shapes than k");

    std::vector<ResultRow> rows;
    for (std::size_t gi = 0; gi < config.grid.size(); ++gi) {
        const double level = config.grid[gi];
        std::vector<std::vector<double>> method_errors(config.methods.size());

        for (int draw = 0; draw < config.draws; ++draw) {
            RandomEngine draw_rng(
                derive_seed(config.seed, {3, gi, static_cast<std::uint64_t>(draw)}));
            const std::vector<int> subset = draw_rng.sample_without_replacement(
                static_cast<int>(shapes.size()), config.k);
            const std::vector<PointCloud> originals = select_shapes(shapes, subset);

            // One corruption draw per run in the missing-data protocol; the
            // same masked shapes are given to every method.
            std::vector<PointCloud> masked;
            if (config.axis == GppExperimentConfig::Axis::Missing)
                masked = drop_points(originals, level, draw_rng);

            for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
                const GpaMethod method = config.methods[mi];
                RandomEngine method_rng(derive_seed(
                    config.seed, {4, gi, static_cast<std::uint64_t>(draw), mi}));

                std::vector<Transform> transforms;
                if (config.axis == GppExperimentConfig::Axis::Missing) {
                    switch (method) {
                        case GpaMethod::Reference:
                            transforms = gpa_reference(masked, 0, config.cls).transforms;
                            break;
                        case GpaMethod::IterativeMean:
                            transforms =
                                gpa_iterative_mean(masked, config.cls, config.itermean_tol,
                                                   config.itermean_max_iter, method_rng)
                                    .transforms;
                            break;
                        case GpaMethod::Sync:
                            transforms =
                                gpa_sync(masked, config.cls, config.scale_mode).transforms;
                            break;
                    }
                } else {
                    // Correspondence protocol: every aligned pair sees an
                    // independent scramble. For the mean-shape method the
                    // counterpart of each shape is the (canonically indexed)
                    // mean, so each shape is scrambled once.
                    switch (method) {
                        case GpaMethod::Reference:
                            transforms = reference_with_scrambles(originals, level, config.cls,
                                                                  method_rng);
                            break;
                        case GpaMethod::IterativeMean: {
                            std::vector<PointCloud> scrambled;
                            scrambled.reserve(originals.size());
                            for (const PointCloud& s : originals)
                                scrambled.push_back(
                                    scramble_correspondences(s, s, level, method_rng).second);
                            transforms =
                                gpa_iterative_mean(scrambled, config.cls, config.itermean_tol,
                                                   config.itermean_max_iter, method_rng)
                                    .transforms;
                            break;
                        }
                        case GpaMethod::Sync:
                            transforms = sync_with_scrambles(originals, level, config.cls,
                                                             config.scale_mode, method_rng);
                            break;
                    }
                }
                method_errors[mi].push_back(error_on_originals(originals, transforms));
            }
        }

        for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
            const Stats stats = summarise(method_errors[mi]);
            rows.push_back({level, to_string(config.methods[mi]), stats.mean, stats.stddev,
                            config.draws});
        }
    }
    return rows;
}

std::vector<ResultRow> run_gpp_experiment(const GppExperimentConfig& config) {
    if (config.source.type != ShapeSource::Type::Synthetic)
        throw ContractViolation(
            "run_gpp_experiment: imported shape sources must be loaded by the caller");
    const std::vector<PointCloud> shapes =
        gen_shapes(config.source.K, config.source.n, config.source.d, config.source.deform,
                   config.source.noise, derive_seed(config.seed, {0}));
    return run_gpp_experiment(config, shapes);
}

}  // namespace transsync
