#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "transsync/experiment.hpp"
#include "transsync/io.hpp"
#include "transsync/procrustes.hpp"
#include "transsync/simulate.hpp"
#include "transsync/sync.hpp"

namespace py = pybind11;
using namespace transsync;

namespace {

PointCloud make_cloud(const Eigen::MatrixXd& points, const std::optional<std::vector<bool>>& present) {
    if (!present) return PointCloud::full(points);
    return PointCloud(points, *present);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Null-space synchronisation of pairwise transforms and generalised "
              "Procrustes alignment";

    py::register_exception<SingularityError>(m, "SingularityError");
    py::register_exception<IncompleteSetError>(m, "IncompleteSetError");
    py::register_exception<UnderDeterminedError>(m, "UnderDeterminedError");
    py::register_exception<DegenerateError>(m, "DegenerateError");
    py::register_exception<InfeasibleDrawError>(m, "InfeasibleDrawError");
    py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);

    py::enum_<MatrixKind>(m, "MatrixKind")
        .value("linear", MatrixKind::Linear)
        .value("homogeneous", MatrixKind::Homogeneous);

    py::enum_<TransformClass>(m, "TransformClass")
        .value("linear", TransformClass::Linear)
        .value("affine", TransformClass::Affine)
        .value("similarity", TransformClass::Similarity)
        .value("euclidean", TransformClass::Euclidean)
        .value("rigid", TransformClass::Rigid);

    py::enum_<ScaleMode>(m, "ScaleMode")
        .value("geometric", ScaleMode::Geometric)
        .value("arithmetic", ScaleMode::Arithmetic);

    py::enum_<GpaMethod>(m, "GpaMethod")
        .value("reference", GpaMethod::Reference)
        .value("itermean", GpaMethod::IterativeMean)
        .value("sync", GpaMethod::Sync);

    py::class_<Transform>(m, "Transform")
        .def(py::init<int, MatrixKind, Eigen::MatrixXd>(), py::arg("dim"), py::arg("kind"),
             py::arg("matrix"))
        .def_static("identity", &Transform::identity, py::arg("dim"), py::arg("kind"))
        .def_static("from_linear", &Transform::from_linear, py::arg("matrix"))
        .def_static("from_affine", &Transform::from_affine, py::arg("linear"),
                    py::arg("translation"))
        .def_property_readonly("dim", &Transform::dim)
        .def_property_readonly("kind", &Transform::kind)
        .def_property_readonly("matrix", &Transform::matrix)
        .def_property_readonly("linear", &Transform::linear)
        .def_property_readonly("translation", &Transform::translation)
        .def("__repr__", [](const Transform& t) {
            return "<Transform dim=" + std::to_string(t.dim()) + " kind=" +
                   to_string(t.kind()) + ">";
        });

    py::class_<SimilarityParts>(m, "SimilarityParts")
        .def_readonly("scale", &SimilarityParts::scale)
        .def_readonly("orthogonal", &SimilarityParts::orthogonal)
        .def_readonly("translation", &SimilarityParts::translation);

    m.def("compose", &compose, py::arg("a"), py::arg("b"));
    m.def("invert", &invert, py::arg("t"), py::arg("condition_limit") = kConditionLimit);
    m.def("condition_estimate", &condition_estimate, py::arg("matrix"));
    m.def("project_orthogonal", &project_orthogonal, py::arg("matrix"));
    m.def("project_rotation", &project_rotation, py::arg("matrix"));
    m.def("scale_geometric", &scale_geometric, py::arg("singular_values"));
    m.def("scale_arithmetic", &scale_arithmetic, py::arg("singular_values"));
    m.def("project_class", &project_class, py::arg("t"), py::arg("cls"),
          py::arg("scale_mode") = ScaleMode::Geometric);
    m.def("decompose_similarity", &decompose_similarity, py::arg("t"));

    py::class_<PairwiseTransformSet>(m, "PairwiseTransformSet")
        .def(py::init<int, int, MatrixKind, TransformClass>(), py::arg("k"), py::arg("dim"),
             py::arg("kind"), py::arg("cls"))
        .def_property_readonly("k", &PairwiseTransformSet::k)
        .def_property_readonly("dim", &PairwiseTransformSet::dim)
        .def_property_readonly("kind", &PairwiseTransformSet::kind)
        .def_property_readonly("transform_class", &PairwiseTransformSet::transform_class)
        .def("has", &PairwiseTransformSet::has, py::arg("i"), py::arg("j"))
        .def("at", &PairwiseTransformSet::at, py::arg("i"), py::arg("j"),
             py::return_value_policy::copy)
        .def("set", &PairwiseTransformSet::set, py::arg("i"), py::arg("j"), py::arg("t"))
        .def("complete", &PairwiseTransformSet::complete);

    py::class_<SyncResult>(m, "SyncResult")
        .def_readonly("absolute", &SyncResult::absolute)
        .def_readonly("tail_singular_values", &SyncResult::tail_singular_values)
        .def_readonly("gauge_block", &SyncResult::gauge_block)
        .def_readonly("transform_class", &SyncResult::transform_class)
        .def_readonly("degenerate", &SyncResult::degenerate)
        .def_readonly("spectral_norm", &SyncResult::spectral_norm);

    m.def("build_z", &build_z, py::arg("set"));
    m.def("append_homogeneous_row", &append_homogeneous_row, py::arg("z"), py::arg("k"),
          py::arg("d"));
    m.def(
        "extract_null_basis",
        [](const Eigen::MatrixXd& z, int d) {
            const NullBasis nb = extract_null_basis(z, d);
            return py::make_tuple(nb.basis, nb.tail_singular_values, nb.degenerate);
        },
        py::arg("z"), py::arg("d"));
    m.def("fix_gauge", &fix_gauge, py::arg("u1"), py::arg("kind"), py::arg("k"), py::arg("d"),
          py::arg("cls"));
    m.def("synchronise", &synchronise, py::arg("set"), py::arg("cls"),
          py::arg("scale_mode") = ScaleMode::Geometric);
    m.def("reconstruct_pairwise", &reconstruct_pairwise, py::arg("result"));
    m.def("consistency_residual", &consistency_residual, py::arg("set"));

    py::class_<PointCloud>(m, "PointCloud")
        .def(py::init(&make_cloud), py::arg("points"), py::arg("present") = py::none())
        .def_readonly("points", &PointCloud::points)
        .def_readonly("present", &PointCloud::present)
        .def_property_readonly("n", &PointCloud::n)
        .def_property_readonly("d", &PointCloud::d)
        .def("present_count", &PointCloud::present_count)
        .def("all_present", &PointCloud::all_present);

    py::class_<GpaOutcome>(m, "GpaOutcome")
        .def_readonly("aligned", &GpaOutcome::aligned)
        .def_readonly("transforms", &GpaOutcome::transforms)
        .def_readonly("method", &GpaOutcome::method)
        .def_readonly("error", &GpaOutcome::error)
        .def_readonly("iterations", &GpaOutcome::iterations)
        .def_readonly("converged", &GpaOutcome::converged);

    m.def("solve_aop", &solve_aop, py::arg("x"), py::arg("y"), py::arg("cls"));
    m.def("apply", &apply, py::arg("t"), py::arg("x"));
    m.def("gpa_reference", &gpa_reference, py::arg("shapes"), py::arg("ref"), py::arg("cls"));
    m.def(
        "gpa_iterative_mean",
        [](const std::vector<PointCloud>& shapes, TransformClass cls, double tol, int max_iter,
           std::uint64_t seed) {
            RandomEngine rng(seed);
            return gpa_iterative_mean(shapes, cls, tol, max_iter, rng);
        },
        py::arg("shapes"), py::arg("cls"), py::arg("tol") = 1e-8, py::arg("max_iter") = 100,
        py::arg("seed") = 1);
    m.def("gpa_sync", &gpa_sync, py::arg("shapes"), py::arg("cls"),
          py::arg("scale_mode") = ScaleMode::Geometric);
    m.def("shape_error", &shape_error, py::arg("aligned"));

    py::class_<GroundTruth>(m, "GroundTruth")
        .def_readonly("absolute", &GroundTruth::absolute)
        .def_readonly("pairwise", &GroundTruth::pairwise)
        .def_readonly("transform_class", &GroundTruth::transform_class)
        .def_readonly("seed", &GroundTruth::seed);

    py::enum_<TranslationRange>(m, "TranslationRange")
        .value("wide", TranslationRange::Wide)
        .value("narrow", TranslationRange::Narrow);

    m.def("gen_ground_truth", &gen_ground_truth, py::arg("k"), py::arg("d"), py::arg("cls"),
          py::arg("seed"), py::arg("translation_range") = TranslationRange::Wide);
    m.def(
        "add_gaussian_noise",
        [](const PairwiseTransformSet& set, double sigma, std::uint64_t seed) {
            RandomEngine rng(seed);
            return add_gaussian_noise(set, sigma, rng);
        },
        py::arg("set"), py::arg("sigma"), py::arg("seed"));
    m.def("transform_error", &transform_error, py::arg("a"), py::arg("b"));
    m.def(
        "drop_points",
        [](const std::vector<PointCloud>& shapes, double eta, std::uint64_t seed,
           int max_attempts) {
            RandomEngine rng(seed);
            return drop_points(shapes, eta, rng, max_attempts);
        },
        py::arg("shapes"), py::arg("eta"), py::arg("seed"), py::arg("max_attempts") = 1000);
    m.def(
        "scramble_correspondences",
        [](const PointCloud& x, const PointCloud& y, double nu, std::uint64_t seed) {
            RandomEngine rng(seed);
            return scramble_correspondences(x, y, nu, rng);
        },
        py::arg("x"), py::arg("y"), py::arg("nu"), py::arg("seed"));
    m.def("gen_shapes", &gen_shapes, py::arg("K"), py::arg("n"), py::arg("d"),
          py::arg("deform_level"), py::arg("noise_level"), py::arg("seed"));

    m.def(
        "run_experiment",
        [](const std::string& config_json) {
            const io::ExperimentSpec spec = io::parse_experiment_config(config_json);
            std::vector<ResultRow> rows;
            if (spec.kind == io::ExperimentSpec::Kind::Noise) {
                rows = run_noise_experiment(spec.noise);
            } else if (spec.gpp.source.type == ShapeSource::Type::Imported) {
                rows = run_gpp_experiment(spec.gpp, io::read_shape_set(spec.gpp.source.manifest));
            } else {
                rows = run_gpp_experiment(spec.gpp);
            }
            py::list out;
            for (const ResultRow& r : rows)
                out.append(py::make_tuple(r.grid_value, r.signal, r.mean_error, r.std_error,
                                          r.trials));
            return out;
        },
        py::arg("config_json"),
        "Run a config-driven experiment; returns (grid_value, signal, mean, std, trials) rows");

    m.def("pairwise_set_to_json", &io::pairwise_set_to_json, py::arg("set"));
    m.def("pairwise_set_from_json", &io::pairwise_set_from_json, py::arg("text"));
    m.def("transform_to_json", &io::transform_to_json, py::arg("t"));
    m.def("transform_from_json", &io::transform_from_json, py::arg("text"));
    m.def("sync_result_to_json", &io::sync_result_to_json, py::arg("result"));
    m.def(
        "read_shape_set",
        [](const std::string& path) { return io::read_shape_set(path); },
        py::arg("path"));
    m.def(
        "write_shape_set",
        [](const std::string& dir, const std::vector<PointCloud>& shapes) {
            io::write_shape_set(dir, shapes);
        },
        py::arg("dir"), py::arg("shapes"));
}
