#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "transsync/experiment.hpp"
#include "transsync/procrustes.hpp"
#include "transsync/sync.hpp"

namespace transsync::io {

// ---- JSON documents -------------------------------------------------------
// Transform:            {"dim", "kind", "matrix": [[row], ...]}
// PairwiseTransformSet:  {"k", "dim", "kind", "class", "entries": [{"i", "j", "matrix"}]}
//                        (0-based indices; diagonal entries in a file are
//                        ignored, the diagonal is always the identity)
// SyncResult:            {"absolute": [...], "tail_singular_values": [...],
//                         "gauge_block", "class", "degenerate"}

std::string transform_to_json(const Transform& t);
Transform transform_from_json(const std::string& text);

std::string pairwise_set_to_json(const PairwiseTransformSet& set);
PairwiseTransformSet pairwise_set_from_json(const std::string& text);

std::string sync_result_to_json(const SyncResult& result);

// ---- Point clouds ----------------------------------------------------------
// CSV with header "x0,...,x{d-1},present", one row per landmark; the row
// order defines correspondences across shapes. A shape set is a directory of
// such files plus a manifest {"n", "d", "files": [...]}.

std::string point_cloud_to_csv(const PointCloud& cloud);
PointCloud point_cloud_from_csv(const std::string& text);

void write_shape_set(const std::filesystem::path& dir, const std::vector<PointCloud>& shapes);
std::vector<PointCloud> read_shape_set(const std::filesystem::path& manifest_path);

// ---- Experiment configs and results ----------------------------------------

struct ExperimentSpec {
    enum class Kind { Noise, Gpp };
    Kind kind = Kind::Noise;
    NoiseExperimentConfig noise;
    GppExperimentConfig gpp;
};

// Parses and validates an experiment config document. Raises
// ContractViolation with a field-level message on any problem, including a
// grid with more or fewer than exactly one varying parameter.
ExperimentSpec parse_experiment_config(const std::string& text);

// CSV with header grid_value,method_or_signal,mean_error,std_error,trials.
std::string result_table_to_csv(const std::vector<ResultRow>& rows);

std::string run_metadata_json(std::uint64_t seed, std::uint64_t config_hash,
                              double wall_seconds);

// ---- Helpers ----------------------------------------------------------------

// Shortest representation that still round-trips exactly (17 significant
// digits).
std::string format_double(double v);

std::uint64_t fnv1a_hash(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);

// Writes to "<path>.tmp" then renames, so a failure never leaves a partial
// file at the destination.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace transsync::io
