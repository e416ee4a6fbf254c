#include "transsync/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace transsync::io {

using nlohmann::json;

namespace {

json parse_json(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ContractViolation(std::string("failed to parse ") + what + ": " + e.what());
    }
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, const char* field) {
    if (!j.is_array() || j.empty())
        throw ContractViolation(std::string(field) + ": expected a non-empty array of rows");
    const std::size_t rows = j.size();
    if (!j[0].is_array() || j[0].empty())
        throw ContractViolation(std::string(field) + ": rows must be non-empty arrays");
    const std::size_t cols = j[0].size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            throw ContractViolation(std::string(field) + ": ragged matrix rows");
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[r][c].is_number())
                throw ContractViolation(std::string(field) + ": matrix entries must be numbers");
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
        }
    }
    return m;
}

template <typename T>
T require_field(const json& j, const char* field) {
    if (!j.contains(field))
        throw ContractViolation(std::string("missing required field '") + field + "'");
    try {
        return j.at(field).get<T>();
    } catch (const json::exception&) {
        throw ContractViolation(std::string("field '") + field + "' has the wrong type");
    }
}

json transform_to_json_obj(const Transform& t) {
    return json{{"dim", t.dim()}, {"kind", to_string(t.kind())}, {"matrix", matrix_to_json(t.matrix())}};
}

Transform transform_from_json_obj(const json& j) {
    const int dim = require_field<int>(j, "dim");
    const MatrixKind kind = matrix_kind_from_string(require_field<std::string>(j, "kind"));
    if (!j.contains("matrix")) throw ContractViolation("missing required field 'matrix'");
    return Transform(dim, kind, matrix_from_json(j.at("matrix"), "matrix"));
}

}  // namespace

std::string transform_to_json(const Transform& t) { return transform_to_json_obj(t).dump(2); }

Transform transform_from_json(const std::string& text) {
    return transform_from_json_obj(parse_json(text, "transform"));
}

std::string pairwise_set_to_json(const PairwiseTransformSet& set) {
    json entries = json::array();
    for (int i = 0; i < set.k(); ++i) {
        for (int j = 0; j < set.k(); ++j) {
            if (i == j || !set.has(i, j)) continue;
            entries.push_back(
                json{{"i", i}, {"j", j}, {"matrix", matrix_to_json(set.at(i, j).matrix())}});
        }
    }
    return json{{"k", set.k()},
                {"dim", set.dim()},
                {"kind", to_string(set.kind())},
                {"class", to_string(set.transform_class())},
                {"entries", std::move(entries)}}
        .dump(2);
}

PairwiseTransformSet pairwise_set_from_json(const std::string& text) {
    const json j = parse_json(text, "pairwise transform set");
    const int k = require_field<int>(j, "k");
    const int dim = require_field<int>(j, "dim");
    const MatrixKind kind = matrix_kind_from_string(require_field<std::string>(j, "kind"));
    const TransformClass cls =
        transform_class_from_string(require_field<std::string>(j, "class"));

    PairwiseTransformSet set(k, dim, kind, cls);
    if (!j.contains("entries") || !j.at("entries").is_array())
        throw ContractViolation("field 'entries' must be an array");
    for (const json& e : j.at("entries")) {
        const int i = require_field<int>(e, "i");
        const int jj = require_field<int>(e, "j");
        if (i < 0 || i >= k || jj < 0 || jj >= k)
            throw ContractViolation("entry index (" + std::to_string(i) + ", " +
                                    std::to_string(jj) + ") out of range (indices are 0-based)");
        if (i == jj) continue;  // the diagonal is always the identity
        if (!e.contains("matrix")) throw ContractViolation("entry missing field 'matrix'");
        set.set(i, jj, Transform(dim, kind, matrix_from_json(e.at("matrix"), "matrix")));
    }
    return set;
}

std::string sync_result_to_json(const SyncResult& result) {
    json absolute = json::array();
    for (const Transform& t : result.absolute) absolute.push_back(transform_to_json_obj(t));
    json tail = json::array();
    for (Eigen::Index i = 0; i < result.tail_singular_values.size(); ++i)
        tail.push_back(result.tail_singular_values(i));
    return json{{"absolute", std::move(absolute)},
                {"tail_singular_values", std::move(tail)},
                {"gauge_block", result.gauge_block},
                {"class", to_string(result.transform_class)},
                {"degenerate", result.degenerate}}
        .dump(2);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string point_cloud_to_csv(const PointCloud& cloud) {
    std::ostringstream os;
    for (int c = 0; c < cloud.d(); ++c) os << "x" << c << ",";
    os << "present\n";
    for (int r = 0; r < cloud.n(); ++r) {
        for (int c = 0; c < cloud.d(); ++c) os << format_double(cloud.points(r, c)) << ",";
        os << (cloud.present[static_cast<std::size_t>(r)] ? "1" : "0") << "\n";
    }
    return os.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) fields.push_back(field);
    return fields;
}

}  // namespace

PointCloud point_cloud_from_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw ContractViolation("point cloud CSV: empty file");
    const std::vector<std::string> header = split_csv_line(line);
    if (header.size() < 2 || header.back() != "present")
        throw ContractViolation("point cloud CSV: header must be x0,...,x{d-1},present");
    const int d = static_cast<int>(header.size()) - 1;
    for (int c = 0; c < d; ++c) {
        if (header[static_cast<std::size_t>(c)] != "x" + std::to_string(c))
            throw ContractViolation("point cloud CSV: header must be x0,...,x{d-1},present");
    }

    std::vector<double> coords;
    std::vector<bool> mask;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != static_cast<std::size_t>(d) + 1)
            throw ContractViolation("point cloud CSV: row has wrong number of fields");
        for (int c = 0; c < d; ++c) {
            try {
                coords.push_back(std::stod(fields[static_cast<std::size_t>(c)]));
            } catch (const std::exception&) {
                throw ContractViolation("point cloud CSV: bad coordinate '" +
                                        fields[static_cast<std::size_t>(c)] + "'");
            }
        }
        const std::string& p = fields.back();
        if (p == "1")
            mask.push_back(true);
        else if (p == "0")
            mask.push_back(false);
        else
            throw ContractViolation("point cloud CSV: present flag must be 0 or 1, got '" + p + "'");
    }
    const int n = static_cast<int>(mask.size());
    Eigen::MatrixXd pts(n, d);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < d; ++c)
            pts(r, c) = coords[static_cast<std::size_t>(r) * static_cast<std::size_t>(d) +
                               static_cast<std::size_t>(c)];
    return PointCloud(std::move(pts), std::move(mask));
}

void write_shape_set(const std::filesystem::path& dir, const std::vector<PointCloud>& shapes) {
    if (shapes.empty()) throw ContractViolation("write_shape_set: empty shape list");
    std::filesystem::create_directories(dir);
    json files = json::array();
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "shape_%04zu.csv", i);
        atomic_write_text(dir / name, point_cloud_to_csv(shapes[i]));
        files.push_back(name);
    }
    const json manifest{{"n", shapes.front().n()}, {"d", shapes.front().d()}, {"files", files}};
    atomic_write_text(dir / "manifest.json", manifest.dump(2));
}

std::vector<PointCloud> read_shape_set(const std::filesystem::path& manifest_path) {
    std::filesystem::path path = manifest_path;
    if (std::filesystem::is_directory(path)) path /= "manifest.json";
    const json manifest = parse_json(read_text_file(path), "shape set manifest");
    const int n = require_field<int>(manifest, "n");
    const int d = require_field<int>(manifest, "d");
    if (!manifest.contains("files") || !manifest.at("files").is_array() ||
        manifest.at("files").empty())
        throw ContractViolation("manifest field 'files' must be a non-empty array");

    const std::filesystem::path base = path.parent_path();
    std::vector<PointCloud> shapes;
    for (const json& f : manifest.at("files")) {
        if (!f.is_string()) throw ContractViolation("manifest 'files' entries must be strings");
        PointCloud cloud = point_cloud_from_csv(read_text_file(base / f.get<std::string>()));
        if (cloud.n() != n || cloud.d() != d)
            throw ContractViolation("shape file '" + f.get<std::string>() +
                                    "' does not match the manifest's n and d");
        shapes.push_back(std::move(cloud));
    }
    return shapes;
}

namespace {

std::vector<TransformClass> parse_class_list(const json& j, const char* field,
                                             std::vector<TransformClass> all) {
    if (!j.contains(field)) return all;
    const json& v = j.at(field);
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "all") return all;
        return {transform_class_from_string(s)};
    }
    if (v.is_array()) {
        std::vector<TransformClass> out;
        for (const json& e : v) {
            if (!e.is_string())
                throw ContractViolation(std::string("field '") + field +
                                        "' must contain class names");
            out.push_back(transform_class_from_string(e.get<std::string>()));
        }
        if (out.empty())
            throw ContractViolation(std::string("field '") + field + "' must not be empty");
        return out;
    }
    throw ContractViolation(std::string("field '") + field +
                            "' must be a class name, \"all\", or an array of class names");
}

std::vector<double> parse_grid_values(const json& v, const std::string& key) {
    if (!v.is_array() || v.empty())
        throw ContractViolation("grid '" + key + "' must be a non-empty array of numbers");
    std::vector<double> grid;
    for (const json& e : v) {
        if (!e.is_number())
            throw ContractViolation("grid '" + key + "' must contain numbers only");
        grid.push_back(e.get<double>());
    }
    return grid;
}

}  // namespace

ExperimentSpec parse_experiment_config(const std::string& text) {
    const json j = parse_json(text, "experiment config");
    const std::string experiment = require_field<std::string>(j, "experiment");

    if (!j.contains("grid") || !j.at("grid").is_object())
        throw ContractViolation("field 'grid' must be an object mapping one parameter to values");
    const json& grid = j.at("grid");
    if (grid.size() != 1)
        throw ContractViolation("field 'grid' must name exactly one varying parameter, got " +
                                std::to_string(grid.size()));
    const std::string grid_key = grid.begin().key();
    const std::vector<double> grid_values = parse_grid_values(grid.begin().value(), grid_key);

    ExperimentSpec spec;
    if (experiment == "noise") {
        spec.kind = ExperimentSpec::Kind::Noise;
        NoiseExperimentConfig& cfg = spec.noise;
        if (grid_key == "sigma")
            cfg.vary = NoiseExperimentConfig::Vary::Sigma;
        else if (grid_key == "k")
            cfg.vary = NoiseExperimentConfig::Vary::K;
        else if (grid_key == "d")
            cfg.vary = NoiseExperimentConfig::Vary::D;
        else
            throw ContractViolation("noise experiment grid must vary 'sigma', 'k' or 'd', got '" +
                                    grid_key + "'");
        cfg.grid = grid_values;
        cfg.classes = parse_class_list(j, "class", cfg.classes);
        if (j.contains("k")) cfg.k = require_field<int>(j, "k");
        if (j.contains("d")) cfg.d = require_field<int>(j, "d");
        if (j.contains("sigma")) cfg.sigma = require_field<double>(j, "sigma");
        if (j.contains("seed")) cfg.seed = require_field<std::uint64_t>(j, "seed");
        if (j.contains("scale_mode"))
            cfg.scale_mode = scale_mode_from_string(require_field<std::string>(j, "scale_mode"));
        if (j.contains("translation_range")) {
            const std::string r = require_field<std::string>(j, "translation_range");
            if (r == "wide")
                cfg.translation_range = TranslationRange::Wide;
            else if (r == "narrow")
                cfg.translation_range = TranslationRange::Narrow;
            else
                throw ContractViolation("field 'translation_range' must be wide|narrow");
        }
        if (j.contains("trials")) {
            const json& t = j.at("trials");
            if (!t.is_object() || !t.contains("truths") || !t.contains("noise_draws"))
                throw ContractViolation(
                    "noise experiment 'trials' must be {\"truths\": G, \"noise_draws\": R}");
            cfg.truth_draws = require_field<int>(t, "truths");
            cfg.noise_draws = require_field<int>(t, "noise_draws");
        }
        cfg.validate();
        return spec;
    }

    if (experiment == "gpp") {
        spec.kind = ExperimentSpec::Kind::Gpp;
        GppExperimentConfig& cfg = spec.gpp;
        if (grid_key == "eta")
            cfg.axis = GppExperimentConfig::Axis::Missing;
        else if (grid_key == "nu")
            cfg.axis = GppExperimentConfig::Axis::Correspondence;
        else
            throw ContractViolation("gpp experiment grid must vary 'eta' or 'nu', got '" +
                                    grid_key + "'");
        cfg.grid = grid_values;
        if (j.contains("class"))
            cfg.cls = transform_class_from_string(require_field<std::string>(j, "class"));
        if (j.contains("k")) cfg.k = require_field<int>(j, "k");
        if (j.contains("trials")) cfg.draws = require_field<int>(j, "trials");
        if (j.contains("seed")) cfg.seed = require_field<std::uint64_t>(j, "seed");
        if (j.contains("scale_mode"))
            cfg.scale_mode = scale_mode_from_string(require_field<std::string>(j, "scale_mode"));
        if (j.contains("itermean_tol")) cfg.itermean_tol = require_field<double>(j, "itermean_tol");
        if (j.contains("itermean_max_iter"))
            cfg.itermean_max_iter = require_field<int>(j, "itermean_max_iter");
        if (j.contains("methods")) {
            const json& m = j.at("methods");
            if (!m.is_array() || m.empty())
                throw ContractViolation("field 'methods' must be a non-empty array");
            cfg.methods.clear();
            for (const json& e : m) {
                if (!e.is_string())
                    throw ContractViolation("field 'methods' must contain method names");
                cfg.methods.push_back(gpa_method_from_string(e.get<std::string>()));
            }
        }
        if (j.contains("shape_source")) {
            const json& s = j.at("shape_source");
            if (!s.is_object()) throw ContractViolation("field 'shape_source' must be an object");
            const std::string type = require_field<std::string>(s, "type");
            if (type == "synthetic") {
                cfg.source.type = ShapeSource::Type::Synthetic;
                if (s.contains("K")) cfg.source.K = require_field<int>(s, "K");
                if (s.contains("n")) cfg.source.n = require_field<int>(s, "n");
                if (s.contains("d")) cfg.source.d = require_field<int>(s, "d");
                if (s.contains("deform")) cfg.source.deform = require_field<double>(s, "deform");
                if (s.contains("noise")) cfg.source.noise = require_field<double>(s, "noise");
            } else if (type == "imported") {
                cfg.source.type = ShapeSource::Type::Imported;
                cfg.source.manifest = require_field<std::string>(s, "manifest");
            } else {
                throw ContractViolation("shape_source 'type' must be synthetic|imported");
            }
        }
        cfg.validate();
        return spec;
    }

    throw ContractViolation("field 'experiment' must be 'noise' or 'gpp', got '" + experiment +
                            "'");
}

std::string result_table_to_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream os;
    os << "grid_value,method_or_signal,mean_error,std_error,trials\n";
    for (const ResultRow& r : rows) {
        os << format_double(r.grid_value) << "," << r.signal << "," << format_double(r.mean_error)
           << "," << format_double(r.std_error) << "," << r.trials << "\n";
    }
    return os.str();
}

std::string run_metadata_json(std::uint64_t seed, std::uint64_t config_hash,
                              double wall_seconds) {
    char hash_hex[32];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(config_hash));
    return json{{"seed", seed}, {"config_hash", hash_hex}, {"wall_time_seconds", wall_seconds}}
        .dump(2);
}

std::uint64_t fnv1a_hash(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ContractViolation("cannot open file '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ContractViolation("cannot write file '" + tmp.string() + "'");
        out << content;
        if (!out) throw ContractViolation("short write to '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace transsync::io
