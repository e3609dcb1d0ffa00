#include "sdsem/spec_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace sdsem {

using Json = nlohmann::ordered_json;

namespace {

void require_object(const Json& j, const std::string& field) {
    if (!j.is_object()) {
        throw SchemaError(field, "expected an object");
    }
}

/// Rejects unknown keys and reports the first missing required key.
void check_keys(const Json& j, const std::string& field, std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional = {}) {
    require_object(j, field);
    std::set<std::string> allowed;
    for (const auto* key : required) {
        allowed.insert(key);
        if (!j.contains(key)) {
            throw SchemaError(field.empty() ? key : field + "." + key, "missing field");
        }
    }
    for (const auto* key : optional) {
        allowed.insert(key);
    }
    for (const auto& [key, value] : j.items()) {
        if (!allowed.contains(key)) {
            throw SchemaError(field.empty() ? key : field + "." + key, "unknown field");
        }
    }
}

std::string join(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

double read_double(const Json& j, const std::string& field) {
    if (!j.is_number()) {
        throw SchemaError(field, "expected a number");
    }
    return j.get<double>();
}

std::size_t read_count(const Json& j, const std::string& field) {
    if (!j.is_number_integer() || j.get<long long>() < 0) {
        throw SchemaError(field, "expected a nonnegative integer");
    }
    return j.get<std::size_t>();
}

std::vector<double> read_vector(const Json& j, const std::string& field) {
    if (!j.is_array()) {
        throw SchemaError(field, "expected an array of numbers");
    }
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(read_double(j[i], field + "[" + std::to_string(i) + "]"));
    }
    return out;
}

/// Dense row-major array of arrays; `cols` disambiguates a matrix with zero rows.
Matrix read_matrix(const Json& j, const std::string& field, std::size_t rows, std::size_t cols) {
    if (!j.is_array()) {
        throw SchemaError(field, "expected an array of rows");
    }
    if (j.size() != rows) {
        throw SchemaError(field, "expected " + std::to_string(rows) + " rows, got " +
                                     std::to_string(j.size()));
    }
    Matrix out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto row = read_vector(j[r], field + "[" + std::to_string(r) + "]");
        if (row.size() != cols) {
            throw SchemaError(field + "[" + std::to_string(r) + "]",
                              "expected " + std::to_string(cols) + " columns, got " +
                                  std::to_string(row.size()));
        }
        for (std::size_t c = 0; c < cols; ++c) {
            out(r, c) = row[c];
        }
    }
    return out;
}

std::vector<std::string> read_labels(const Json& j, const std::string& field) {
    if (!j.is_array()) {
        throw SchemaError(field, "expected an array of strings");
    }
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_string()) {
            throw SchemaError(field + "[" + std::to_string(i) + "]", "expected a string");
        }
        auto label = j[i].get<std::string>();
        if (label.empty() || label.find_first_of(",\"\r\n") != std::string::npos) {
            throw SchemaError(field + "[" + std::to_string(i) + "]",
                              "labels must be non-empty and free of commas, quotes and newlines");
        }
        out.push_back(std::move(label));
    }
    return out;
}

Json write_matrix(const Matrix& m) {
    Json rows = Json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (double v : m.row(r)) {
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Json write_vector(const std::vector<double>& v) {
    Json out = Json::array();
    for (double x : v) {
        out.push_back(x);
    }
    return out;
}

DisturbanceSpec read_disturbance(const Json& j, const std::string& field, std::size_t n) {
    require_object(j, field);
    if (!j.contains("kind") || !j["kind"].is_string()) {
        throw SchemaError(join(field, "kind"), "expected one of step, pulse, noise");
    }
    DisturbanceSpec d;
    const auto kind = j["kind"].get<std::string>();
    if (kind == "step") {
        check_keys(j, field, {"target", "kind", "height", "onset"});
        d.kind = DisturbanceKind::Step;
    } else if (kind == "pulse") {
        check_keys(j, field, {"target", "kind", "height", "onset", "width"});
        d.kind = DisturbanceKind::Pulse;
        d.width = read_double(j["width"], join(field, "width"));
    } else if (kind == "noise") {
        check_keys(j, field, {"target", "kind", "sd", "seed"});
        d.kind = DisturbanceKind::Noise;
        d.sd = read_double(j["sd"], join(field, "sd"));
        if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() &&
                                                 j["seed"].get<long long>() >= 0)) {
            throw SchemaError(join(field, "seed"), "expected a nonnegative integer");
        }
        d.seed = j["seed"].get<std::uint64_t>();
    } else {
        throw SchemaError(join(field, "kind"), "unknown disturbance kind '" + kind + "'");
    }
    if (d.kind != DisturbanceKind::Noise) {
        d.height = read_double(j["height"], join(field, "height"));
        d.onset = read_double(j["onset"], join(field, "onset"));
    }
    d.target = read_count(j["target"], join(field, "target"));
    if (d.target >= n) {
        throw SchemaError(join(field, "target"), "index out of range");
    }
    return d;
}

Json write_disturbance(const DisturbanceSpec& d) {
    Json j = Json::object();
    j["target"] = d.target;
    j["kind"] = to_string(d.kind);
    switch (d.kind) {
        case DisturbanceKind::Step:
            j["height"] = d.height;
            j["onset"] = d.onset;
            break;
        case DisturbanceKind::Pulse:
            j["height"] = d.height;
            j["onset"] = d.onset;
            j["width"] = d.width;
            break;
        case DisturbanceKind::Noise:
            j["sd"] = d.sd;
            j["seed"] = d.seed;
            break;
    }
    return j;
}

}  // namespace

ModelSpec parse_spec_unvalidated(std::string_view json_text) {
    Json doc;
    try {
        doc = Json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed spec document: ") + e.what());
    }
    check_keys(doc, "",
               {"dims", "horizon", "dynamic", "static", "measurement", "disturbances", "mode",
                "names"},
               {"description"});

    ModelSpec spec;
    const auto& dims = doc["dims"];
    check_keys(dims, "dims", {"m", "n", "p", "q"});
    spec.dims.m = read_count(dims["m"], "dims.m");
    spec.dims.n = read_count(dims["n"], "dims.n");
    spec.dims.p = read_count(dims["p"], "dims.p");
    spec.dims.q = read_count(dims["q"], "dims.q");
    const auto [m, n, p, q] = spec.dims;

    const auto& hz = doc["horizon"];
    check_keys(hz, "horizon", {"t_initial", "t_final", "observation_times"}, {"dt"});
    spec.horizon.t_initial = read_double(hz["t_initial"], "horizon.t_initial");
    spec.horizon.t_final = read_double(hz["t_final"], "horizon.t_final");
    if (hz.contains("dt") && !hz["dt"].is_null()) {
        const double dt = read_double(hz["dt"], "horizon.dt");
        if (!(dt > 0.0)) {
            throw SchemaError("horizon.dt", "must be a positive number");
        }
        spec.horizon.dt = dt;
    }
    spec.horizon.observation_times =
        read_vector(hz["observation_times"], "horizon.observation_times");
    if (spec.horizon.observation_times.size() != q) {
        throw SchemaError("horizon.observation_times",
                          "expected q = " + std::to_string(q) + " entries");
    }

    const auto& dyn = doc["dynamic"];
    check_keys(dyn, "dynamic", {"B1", "Gamma1", "x0"});
    spec.dynamic.B1 = read_matrix(dyn["B1"], "dynamic.B1", m, n);
    spec.dynamic.Gamma1 = read_matrix(dyn["Gamma1"], "dynamic.Gamma1", m, n);
    spec.dynamic.x0 = read_vector(dyn["x0"], "dynamic.x0");
    if (spec.dynamic.x0.size() != m) {
        throw SchemaError("dynamic.x0", "expected m = " + std::to_string(m) + " entries");
    }

    const auto& st = doc["static"];
    check_keys(st, "static", {"B2", "Gamma2", "B3", "Gamma3", "B4"});
    spec.statics.B2 = read_matrix(st["B2"], "static.B2", n, m);
    spec.statics.Gamma2 = read_matrix(st["Gamma2"], "static.Gamma2", n, m);
    spec.statics.B3 = read_matrix(st["B3"], "static.B3", n, n);
    spec.statics.Gamma3 = read_matrix(st["Gamma3"], "static.Gamma3", n, n);
    if (!st["B4"].is_array()) {
        throw SchemaError("static.B4", "expected an array of [i, j, k, beta] quadruples");
    }
    for (std::size_t t = 0; t < st["B4"].size(); ++t) {
        const auto& quad = st["B4"][t];
        const std::string field = "static.B4[" + std::to_string(t) + "]";
        if (!quad.is_array() || quad.size() != 4) {
            throw SchemaError(field, "expected [i, j, k, beta]");
        }
        InteractionTerm term;
        term.i = read_count(quad[0], field + "[0]");
        term.j = read_count(quad[1], field + "[1]");
        term.k = read_count(quad[2], field + "[2]");
        term.beta = read_double(quad[3], field + "[3]");
        spec.statics.B4.push_back(term);
    }

    const auto& ms = doc["measurement"];
    check_keys(ms, "measurement", {"LambdaX", "LambdaY", "ThetaX", "ThetaY", "epsilon_sd"});
    spec.measurement.LambdaX = read_matrix(ms["LambdaX"], "measurement.LambdaX", p, m);
    spec.measurement.LambdaY = read_matrix(ms["LambdaY"], "measurement.LambdaY", p, n);
    spec.measurement.ThetaX = read_matrix(ms["ThetaX"], "measurement.ThetaX", p, m);
    spec.measurement.ThetaY = read_matrix(ms["ThetaY"], "measurement.ThetaY", p, n);
    spec.measurement.epsilon_sd = read_vector(ms["epsilon_sd"], "measurement.epsilon_sd");
    if (spec.measurement.epsilon_sd.size() != p) {
        throw SchemaError("measurement.epsilon_sd", "expected p = " + std::to_string(p) + " entries");
    }

    if (!doc["disturbances"].is_array()) {
        throw SchemaError("disturbances", "expected an array");
    }
    for (std::size_t k = 0; k < doc["disturbances"].size(); ++k) {
        spec.disturbances.push_back(
            read_disturbance(doc["disturbances"][k], "disturbances[" + std::to_string(k) + "]", n));
    }

    const auto& mode = doc["mode"];
    if (mode == "sd_restricted") {
        spec.mode = Mode::SdRestricted;
    } else if (mode == "nonrecursive") {
        spec.mode = Mode::Nonrecursive;
    } else {
        throw SchemaError("mode", "expected \"sd_restricted\" or \"nonrecursive\"");
    }

    const auto& names = doc["names"];
    check_keys(names, "names", {}, {"x", "y", "z"});
    if (names.contains("x")) spec.names.x = read_labels(names["x"], "names.x");
    if (names.contains("y")) spec.names.y = read_labels(names["y"], "names.y");
    if (names.contains("z")) spec.names.z = read_labels(names["z"], "names.z");
    if (doc.contains("description")) {
        if (!doc["description"].is_string()) throw SchemaError("description", "expected a string");
        spec.description = doc["description"].get<std::string>();
    }
    return spec;
}

ModelSpec parse_spec(std::string_view json_text) {
    auto spec = parse_spec_unvalidated(json_text);
    if (auto report = validate(spec); !report.empty()) {
        throw ValidationError(std::move(report));
    }
    return spec;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write '" + path.string() + "'");
    }
    out << text;
}

ModelSpec load_spec_unvalidated(const std::filesystem::path& path) {
    return parse_spec_unvalidated(read_text_file(path));
}

ModelSpec load_spec(const std::filesystem::path& path) { return parse_spec(read_text_file(path)); }

std::string serialize_spec(const ModelSpec& spec) {
    Json doc = Json::object();
    doc["dims"] = {{"m", spec.dims.m}, {"n", spec.dims.n}, {"p", spec.dims.p}, {"q", spec.dims.q}};

    Json hz = Json::object();
    hz["t_initial"] = spec.horizon.t_initial;
    hz["t_final"] = spec.horizon.t_final;
    if (spec.horizon.dt) {
        hz["dt"] = *spec.horizon.dt;
    }
    hz["observation_times"] = write_vector(spec.horizon.observation_times);
    doc["horizon"] = std::move(hz);

    doc["dynamic"] = {{"B1", write_matrix(spec.dynamic.B1)},
                      {"Gamma1", write_matrix(spec.dynamic.Gamma1)},
                      {"x0", write_vector(spec.dynamic.x0)}};

    Json b4 = Json::array();
    for (const auto& t : spec.statics.B4) {
        b4.push_back(Json::array({t.i, t.j, t.k, t.beta}));
    }
    doc["static"] = {{"B2", write_matrix(spec.statics.B2)},
                     {"Gamma2", write_matrix(spec.statics.Gamma2)},
                     {"B3", write_matrix(spec.statics.B3)},
                     {"Gamma3", write_matrix(spec.statics.Gamma3)},
                     {"B4", std::move(b4)}};

    doc["measurement"] = {{"LambdaX", write_matrix(spec.measurement.LambdaX)},
                          {"LambdaY", write_matrix(spec.measurement.LambdaY)},
                          {"ThetaX", write_matrix(spec.measurement.ThetaX)},
                          {"ThetaY", write_matrix(spec.measurement.ThetaY)},
                          {"epsilon_sd", write_vector(spec.measurement.epsilon_sd)}};

    Json dist = Json::array();
    for (const auto& d : spec.disturbances) {
        dist.push_back(write_disturbance(d));
    }
    doc["disturbances"] = std::move(dist);
    doc["mode"] = to_string(spec.mode);

    Json names = Json::object();
    if (!spec.names.x.empty()) names["x"] = spec.names.x;
    if (!spec.names.y.empty()) names["y"] = spec.names.y;
    if (!spec.names.z.empty()) names["z"] = spec.names.z;
    doc["names"] = std::move(names);
    if (!spec.description.empty()) doc["description"] = spec.description;

    return doc.dump(2) + "\n";
}

void save_spec(const ModelSpec& spec, const std::filesystem::path& path) {
    write_text_file(path, serialize_spec(spec));
}

}  // namespace sdsem
