#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "transsync/simulate.hpp"

namespace transsync {

// One row of a result table: a grid value, the signal or method it belongs
// to, and the error statistics over the configured trials.
struct ResultRow {
    double grid_value = 0.0;
    std::string signal;
    double mean_error = 0.0;
    double std_error = 0.0;
    int trials = 0;
};

// Protocol sweeping one of {sigma, k, d} with the other two fixed. For every
// grid value and transform class, truth_draws ground-truth sets are drawn and
// noise_draws noisy copies of each are synchronised; the table records the
// mean error of the noisy and of the synchronised sets against the truth,
// labelled "<class>.noisy" and "<class>.synced".
struct NoiseExperimentConfig {
    enum class Vary { Sigma, K, D };

    std::vector<TransformClass> classes{TransformClass::Affine, TransformClass::Linear,
                                        TransformClass::Similarity, TransformClass::Euclidean,
                                        TransformClass::Rigid};
    Vary vary = Vary::Sigma;
    std::vector<double> grid;
    int k = 30;
    int d = 3;
    double sigma = 0.5;
    int truth_draws = 100;
    int noise_draws = 20;
    std::uint64_t seed = 1;
    ScaleMode scale_mode = ScaleMode::Geometric;
    TranslationRange translation_range = TranslationRange::Wide;

    void validate() const;
};

// Where GPP shapes come from: the synthetic generator or an on-disk shape
// set (a manifest plus per-shape CSV files).
struct ShapeSource {
    enum class Type { Synthetic, Imported };

    Type type = Type::Synthetic;
    int K = 100;
    int n = 98;
    int d = 2;
    double deform = 3.0;
    double noise = 0.02;
    std::string manifest;  // Imported only
};

// Protocol corrupting a random k-subset of shapes per draw, either by
// missing points (grid of eta values) or by wrong correspondences (grid of
// nu values), then solving the GPP with each configured method. Errors are
// always evaluated on the original, uncorrupted shapes mapped by the
// recovered transforms.
struct GppExperimentConfig {
    enum class Axis { Missing, Correspondence };

    Axis axis = Axis::Missing;
    std::vector<double> grid;
    int draws = 500;
    int k = 30;
    std::vector<GpaMethod> methods{GpaMethod::Reference, GpaMethod::IterativeMean,
                                   GpaMethod::Sync};
    TransformClass cls = TransformClass::Similarity;
    ScaleMode scale_mode = ScaleMode::Geometric;
    std::uint64_t seed = 1;
    ShapeSource source;
    double itermean_tol = 1e-8;
    int itermean_max_iter = 100;

    void validate() const;
};

std::vector<ResultRow> run_noise_experiment(const NoiseExperimentConfig& config);

// shapes: the full shape population (config.source describes it; callers that
// already loaded or generated the shapes pass them here).
std::vector<ResultRow> run_gpp_experiment(const GppExperimentConfig& config,
                                          const std::vector<PointCloud>& shapes);

// Convenience overload resolving config.source itself (Synthetic only;
// Imported sources must be loaded by the caller).
std::vector<ResultRow> run_gpp_experiment(const GppExperimentConfig& config);

}  // namespace transsync
