// transsync command line tool: synchronise pairwise transform sets, solve
// multi-shape alignment problems, run the simulation protocols, and generate
// fixture data.
//
// Exit codes: 0 success, 2 input/config error, 3 degenerate numerical
// result, 4 infeasible alignment.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "transsync/experiment.hpp"
#include "transsync/io.hpp"
#include "transsync/procrustes.hpp"
#include "transsync/simulate.hpp"
#include "transsync/sync.hpp"

namespace fs = std::filesystem;
using namespace transsync;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitInfeasible = 4;

void require_parent_writable(const fs::path& path) {
    const fs::path parent = path.has_parent_path() ? path.parent_path() : fs::path(".");
    if (!fs::exists(parent))
        throw ContractViolation("output directory '" + parent.string() + "' does not exist");
}

std::string tail_to_string(const Eigen::VectorXd& tail) {
    std::string out;
    for (Eigen::Index i = 0; i < tail.size(); ++i) {
        if (i > 0) out += " ";
        out += io::format_double(tail(i));
    }
    return out;
}

struct SyncArgs {
    std::string input;
    std::string out;
    std::string out_reconstructed;
    std::string cls = "auto";
    std::string scale = "geometric";
};

int run_sync(const SyncArgs& args) {
    require_parent_writable(args.out);
    fs::path rec_path = args.out_reconstructed.empty()
                            ? fs::path(args.out).replace_extension(".reconstructed.json")
                            : fs::path(args.out_reconstructed);
    require_parent_writable(rec_path);

    const PairwiseTransformSet set =
        io::pairwise_set_from_json(io::read_text_file(args.input));
    const TransformClass cls =
        args.cls == "auto" ? set.transform_class() : transform_class_from_string(args.cls);
    const ScaleMode scale = scale_mode_from_string(args.scale);

    const double residual_before = consistency_residual(set);
    const SyncResult result = synchronise(set, cls, scale);
    const PairwiseTransformSet reconstructed = reconstruct_pairwise(result);
    const double residual_after = consistency_residual(reconstructed);

    io::atomic_write_text(args.out, io::sync_result_to_json(result));
    io::atomic_write_text(rec_path, io::pairwise_set_to_json(reconstructed));

    std::cout << "consistency residual (input): " << io::format_double(residual_before) << "\n";
    std::cout << "consistency residual (synced): " << io::format_double(residual_after) << "\n";
    std::cout << "tail singular values: " << tail_to_string(result.tail_singular_values) << "\n";
    std::cout << "gauge block: " << result.gauge_block << "\n";
    if (result.degenerate)
        std::cout << "warning: near-degenerate spectrum, the minimiser is not unique\n";
    return kExitOk;
}

struct GpaArgs {
    std::string shape_dir;
    std::string out;
    std::vector<std::string> methods{"sync"};
    std::string cls = "similarity";
    std::uint64_t seed = 1;
};

int run_gpa(const GpaArgs& args) {
    const TransformClass cls = transform_class_from_string(args.cls);
    std::vector<GpaMethod> methods;
    for (const std::string& m : args.methods) methods.push_back(gpa_method_from_string(m));

    const std::vector<PointCloud> shapes = io::read_shape_set(args.shape_dir);
    fs::create_directories(args.out);

    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        GpaOutcome outcome;
        switch (methods[mi]) {
            case GpaMethod::Reference:
                outcome = gpa_reference(shapes, 0, cls);
                break;
            case GpaMethod::IterativeMean: {
                RandomEngine rng(derive_seed(args.seed, {mi}));
                outcome = gpa_iterative_mean(shapes, cls, 1e-8, 100, rng);
                break;
            }
            case GpaMethod::Sync:
                outcome = gpa_sync(shapes, cls);
                break;
        }

        const fs::path dir = methods.size() == 1
                                 ? fs::path(args.out)
                                 : fs::path(args.out) / to_string(methods[mi]);
        fs::create_directories(dir);
        for (std::size_t i = 0; i < outcome.aligned.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "aligned_%04zu.csv", i);
            io::atomic_write_text(dir / name, io::point_cloud_to_csv(outcome.aligned[i]));
        }
        std::string transforms_json = "[\n";
        for (std::size_t i = 0; i < outcome.transforms.size(); ++i) {
            transforms_json += io::transform_to_json(outcome.transforms[i]);
            if (i + 1 < outcome.transforms.size()) transforms_json += ",";
            transforms_json += "\n";
        }
        transforms_json += "]\n";
        io::atomic_write_text(dir / "transforms.json", transforms_json);

        std::cout << to_string(methods[mi])
                  << " shape_error: " << io::format_double(outcome.error);
        if (methods[mi] == GpaMethod::IterativeMean)
            std::cout << " (iterations: " << outcome.iterations
                      << (outcome.converged ? "" : ", not converged") << ")";
        std::cout << "\n";
    }
    return kExitOk;
}

struct ExperimentArgs {
    std::string config;
    std::string out;
};

int run_experiment(const ExperimentArgs& args) {
    require_parent_writable(args.out);
    const std::string config_text = io::read_text_file(args.config);
    const io::ExperimentSpec spec = io::parse_experiment_config(config_text);

    const auto started = std::chrono::steady_clock::now();
    std::vector<ResultRow> rows;
    std::uint64_t seed = 0;
    if (spec.kind == io::ExperimentSpec::Kind::Noise) {
        seed = spec.noise.seed;
        rows = run_noise_experiment(spec.noise);
    } else {
        seed = spec.gpp.seed;
        if (spec.gpp.source.type == ShapeSource::Type::Imported) {
            const std::vector<PointCloud> shapes =
                io::read_shape_set(spec.gpp.source.manifest);
            rows = run_gpp_experiment(spec.gpp, shapes);
        } else {
            rows = run_gpp_experiment(spec.gpp);
        }
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    io::atomic_write_text(args.out, io::result_table_to_csv(rows));
    io::atomic_write_text(args.out + ".meta.json",
                          io::run_metadata_json(seed, io::fnv1a_hash(config_text), wall));
    std::cout << "wrote " << rows.size() << " result rows to " << args.out << "\n";
    return kExitOk;
}

struct GenTransformsArgs {
    int k = 5;
    int d = 3;
    std::string cls = "similarity";
    double sigma = 0.0;
    std::uint64_t seed = 1;
    std::string translation_range = "wide";
    std::string out;
};

int run_gen_transforms(const GenTransformsArgs& args) {
    require_parent_writable(args.out);
    const TransformClass cls = transform_class_from_string(args.cls);
    TranslationRange range;
    if (args.translation_range == "wide")
        range = TranslationRange::Wide;
    else if (args.translation_range == "narrow")
        range = TranslationRange::Narrow;
    else
        throw ContractViolation("--translation-range must be wide|narrow");

    const GroundTruth truth = gen_ground_truth(args.k, args.d, cls, args.seed, range);
    PairwiseTransformSet set = truth.pairwise;
    if (args.sigma > 0.0) {
        RandomEngine rng(derive_seed(args.seed, {1}));
        set = add_gaussian_noise(set, args.sigma, rng);
    }
    io::atomic_write_text(args.out, io::pairwise_set_to_json(set));
    std::cout << "wrote " << to_string(cls) << " set (k=" << args.k << ", d=" << args.d
              << ", sigma=" << io::format_double(args.sigma) << ") to " << args.out << "\n";
    return kExitOk;
}

struct GenShapesArgs {
    int count = 10;
    int n = 98;
    int d = 2;
    double deform = 3.0;
    double noise = 0.02;
    std::uint64_t seed = 1;
    std::string out;
};

int run_gen_shapes(const GenShapesArgs& args) {
    const std::vector<PointCloud> shapes =
        gen_shapes(args.count, args.n, args.d, args.deform, args.noise, args.seed);
    io::write_shape_set(args.out, shapes);
    std::cout << "wrote " << args.count << " shapes (n=" << args.n << ", d=" << args.d << ") to "
              << args.out << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"transsync: null-space synchronisation of pairwise transforms and "
                 "generalised Procrustes alignment"};
    app.require_subcommand(1);

    SyncArgs sync_args;
    CLI::App* sync_cmd =
        app.add_subcommand("sync", "Synchronise a pairwise transform set file");
    sync_cmd->add_option("input", sync_args.input, "Pairwise transform set JSON")->required();
    sync_cmd->add_option("--out", sync_args.out, "Output path for the sync result JSON")
        ->required();
    sync_cmd->add_option("--out-reconstructed", sync_args.out_reconstructed,
                         "Output path for the reconstructed consistent set "
                         "(default: <out>.reconstructed.json)");
    sync_cmd->add_option("--class", sync_args.cls,
                         "Transform class: linear|affine|similarity|euclidean|rigid|auto "
                         "(auto = class recorded in the input file)");
    sync_cmd->add_option("--scale", sync_args.scale, "Scale mode: geometric|arithmetic");

    GpaArgs gpa_args;
    CLI::App* gpa_cmd = app.add_subcommand("gpa", "Align a directory of shapes");
    gpa_cmd->add_option("shape_dir", gpa_args.shape_dir, "Shape set directory or manifest path")
        ->required();
    gpa_cmd->add_option("--out", gpa_args.out, "Output directory")->required();
    gpa_cmd->add_option("--method", gpa_args.methods,
                        "Method: reference|itermean|sync (repeatable)");
    gpa_cmd->add_option("--class", gpa_args.cls, "Transform class (similarity|euclidean|rigid)");
    gpa_cmd->add_option("--seed", gpa_args.seed, "Random seed");

    ExperimentArgs exp_args;
    CLI::App* exp_cmd = app.add_subcommand("experiment", "Run a config-driven experiment");
    exp_cmd->add_option("config", exp_args.config, "Experiment config JSON")->required();
    exp_cmd->add_option("--out", exp_args.out, "Output CSV path")->required();

    CLI::App* gen_cmd = app.add_subcommand("gen", "Generate fixture data");
    gen_cmd->require_subcommand(1);

    GenTransformsArgs gen_t_args;
    CLI::App* gen_t = gen_cmd->add_subcommand("transforms", "Generate a pairwise transform set");
    gen_t->add_option("--k", gen_t_args.k, "Number of objects");
    gen_t->add_option("--d", gen_t_args.d, "Dimension");
    gen_t->add_option("--class", gen_t_args.cls, "Transform class");
    gen_t->add_option("--sigma", gen_t_args.sigma, "Additive noise level (0 = consistent set)");
    gen_t->add_option("--seed", gen_t_args.seed, "Random seed");
    gen_t->add_option("--translation-range", gen_t_args.translation_range,
                      "Translation support: wide|narrow");
    gen_t->add_option("--out", gen_t_args.out, "Output JSON path")->required();

    GenShapesArgs gen_s_args;
    CLI::App* gen_s = gen_cmd->add_subcommand("shapes", "Generate a synthetic shape set");
    gen_s->add_option("--count", gen_s_args.count, "Number of shapes");
    gen_s->add_option("--n", gen_s_args.n, "Landmarks per shape");
    gen_s->add_option("--d", gen_s_args.d, "Dimension");
    gen_s->add_option("--deform", gen_s_args.deform, "Deformation level");
    gen_s->add_option("--noise", gen_s_args.noise, "Landmark jitter standard deviation");
    gen_s->add_option("--seed", gen_s_args.seed, "Random seed");
    gen_s->add_option("--out", gen_s_args.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInputError;
    }

    try {
        if (sync_cmd->parsed()) return run_sync(sync_args);
        if (gpa_cmd->parsed()) return run_gpa(gpa_args);
        if (exp_cmd->parsed()) return run_experiment(exp_args);
        if (gen_cmd->parsed()) {
            if (gen_t->parsed()) return run_gen_transforms(gen_t_args);
            if (gen_s->parsed()) return run_gen_shapes(gen_s_args);
        }
        std::cerr << "error: no subcommand\n";
        return kExitInputError;
    } catch (const UnderDeterminedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const InfeasibleDrawError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const SingularityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const DegenerateError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
}
