#include "fbcap/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace fbcap {

namespace {

const Json& require_field(const Json& j, const char* key, const char* what) {
    auto it = j.find(key);
    if (it == j.end())
        throw input_error(std::string(what) + ": missing field \"" + key + "\"");
    return *it;
}

void require_schema(const Json& j, const char* schema, const char* what) {
    const Json& s = require_field(j, "schema", what);
    if (!s.is_string() || s.get<std::string>() != schema)
        throw input_error(std::string(what) + ": expected schema \"" + schema + "\"");
}

std::vector<double> number_array(const Json& j, const char* what) {
    if (!j.is_array()) throw input_error(std::string(what) + ": expected an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) throw input_error(std::string(what) + ": expected numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

Unit unit_from_name(const std::string& name) {
    return name == "bits" ? Unit::bits : Unit::nats;
}

}  // namespace

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Json parse_json(const std::string& text, const std::string& what) {
    Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded()) throw input_error(what + ": malformed JSON");
    return j;
}

Mat mat_from_json(const Json& j) {
    const Json& dim = require_field(j, "dim", "matrix");
    if (!dim.is_array() || dim.size() != 2 || !dim[0].is_number_integer() ||
        !dim[1].is_number_integer())
        throw input_error("matrix: \"dim\" must be [rows, cols]");
    const int rows = dim[0].get<int>();
    const int cols = dim[1].get<int>();
    if (rows < 1 || cols < 1) throw input_error("matrix: dimensions must be positive");
    auto data = number_array(require_field(j, "data", "matrix"), "matrix data");
    if (data.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
        throw input_error("matrix: data length does not match dim");
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r * cols + c)];
    return m;
}

Json mat_to_json(const Mat& m) {
    Json j;
    j["dim"] = {m.rows(), m.cols()};
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    j["data"] = data;
    return j;
}

FiniteDist dist_from_json(const Json& j) {
    const Json& axes = require_field(j, "axes", "distribution");
    if (!axes.is_array() || axes.size() != 1)
        throw input_error("distribution: \"axes\" must hold exactly one size");
    auto mass = number_array(require_field(j, "mass", "distribution"), "distribution mass");
    if (mass.size() != axes[0].get<std::size_t>())
        throw input_error("distribution: mass length does not match axes");
    return FiniteDist(std::move(mass));
}

Json dist_to_json(const FiniteDist& d) {
    Json j;
    j["axes"] = {d.size()};
    j["mass"] = d.p;
    return j;
}

JointDist joint_from_json(const Json& j) {
    const Json& axes_j = require_field(j, "axes", "joint");
    if (!axes_j.is_array() || axes_j.empty())
        throw input_error("joint: \"axes\" must be a nonempty array");
    std::vector<int> axes;
    std::size_t cells = 1;
    for (const auto& a : axes_j) {
        if (!a.is_number_integer() || a.get<int>() < 1)
            throw input_error("joint: axis sizes must be positive integers");
        axes.push_back(a.get<int>());
        cells *= a.get<std::size_t>();
    }
    auto mass = number_array(require_field(j, "mass", "joint"), "joint mass");
    if (mass.size() != cells) throw input_error("joint: mass length does not match axes");
    return JointDist(std::move(axes), std::move(mass));
}

Json joint_to_json(const JointDist& d) {
    Json j;
    j["axes"] = d.axes;
    j["mass"] = d.p;
    return j;
}

DMChannel channel_from_json(const Json& j) {
    const Json& axes = require_field(j, "axes", "channel");
    if (!axes.is_array() || axes.size() != 2)
        throw input_error("channel: \"axes\" must be [inputs, outputs]");
    const int in = axes[0].get<int>();
    const int out = axes[1].get<int>();
    if (in < 1 || out < 1) throw input_error("channel: alphabet sizes must be positive");
    auto mass = number_array(require_field(j, "mass", "channel"), "channel mass");
    if (mass.size() != static_cast<std::size_t>(in) * static_cast<std::size_t>(out))
        throw input_error("channel: mass length does not match axes");
    std::vector<FiniteDist> rows;
    rows.reserve(static_cast<std::size_t>(in));
    for (int x = 0; x < in; ++x)
        rows.emplace_back(std::vector<double>(mass.begin() + x * out, mass.begin() + (x + 1) * out));
    return DMChannel(in, out, std::move(rows));
}

Json channel_to_json(const DMChannel& ch) {
    Json j;
    j["axes"] = {ch.in_size, ch.out_size};
    std::vector<double> mass;
    mass.reserve(static_cast<std::size_t>(ch.in_size) * static_cast<std::size_t>(ch.out_size));
    for (int x = 0; x < ch.in_size; ++x)
        mass.insert(mass.end(), ch.row(x).p.begin(), ch.row(x).p.end());
    j["mass"] = mass;
    return j;
}

GaussianBCModel gvbc_model_from_json(const Json& j) {
    require_schema(j, kGvbcModelSchema, "gvbc model");
    return GaussianBCModel(mat_from_json(require_field(j, "G", "gvbc model")),
                           mat_from_json(require_field(j, "K", "gvbc model")),
                           mat_from_json(require_field(j, "Ktilde", "gvbc model")),
                           mat_from_json(require_field(j, "Kprime", "gvbc model")));
}

Json gvbc_model_to_json(const GaussianBCModel& model) {
    Json j;
    j["schema"] = kGvbcModelSchema;
    j["G"] = mat_to_json(model.G);
    j["K"] = mat_to_json(model.K);
    j["Ktilde"] = mat_to_json(model.Ktilde);
    j["Kprime"] = mat_to_json(model.Kprime);
    return j;
}

namespace {

DegradedBC degraded_bc_from_json(const Json& j, const char* what) {
    return DegradedBC(channel_from_json(require_field(j, "stage1", what)),
                      channel_from_json(require_field(j, "stage2", what)));
}

}  // namespace

DmModelInput dm_model_from_json(const Json& j) {
    require_schema(j, kDmModelSchema, "dm model");
    const Json& kind = require_field(j, "kind", "dm model");
    if (!kind.is_string()) throw input_error("dm model: \"kind\" must be a string");
    const std::string name = kind.get<std::string>();

    DmModelInput input;
    if (name == "degraded-bc") {
        input.kind = DmModelKind::degraded_bc;
        input.bc = degraded_bc_from_json(j, "dm model");
        return input;
    }
    if (name == "joint-bc") {
        input.kind = DmModelKind::joint_bc;
        input.q = channel_from_json(require_field(j, "q", "dm model"));
        input.y_size = require_field(j, "y_size", "dm model").get<int>();
        input.z_size = require_field(j, "z_size", "dm model").get<int>();
        if (input.y_size < 1 || input.z_size < 1 ||
            input.q.out_size != input.y_size * input.z_size)
            throw input_error("dm model: q outputs must equal y_size * z_size");
        return input;
    }
    if (name == "rpdbc") {
        input.kind = DmModelKind::rpdbc;
        input.components.push_back(
            degraded_bc_from_json(require_field(j, "component1", "dm model"), "dm model"));
        input.components.push_back(
            degraded_bc_from_json(require_field(j, "component2", "dm model"), "dm model"));
        return input;
    }
    throw input_error("dm model: unknown kind \"" + name + "\"");
}

std::string csv_header(const ArtifactStamp& stamp) {
    std::ostringstream out;
    out << "# fbcap " << kVersion << "\n";
    out << "# schema " << stamp.schema << "\n";
    out << "# seed " << stamp.seed << "\n";
    out << "# input_hash " << stamp.input_hash << "\n";
    out << "# unit " << stamp.unit << "\n";
    return std::move(out).str();
}

void stamp_json(Json& j, const ArtifactStamp& stamp) {
    j["schema"] = stamp.schema;
    j["version"] = kVersion;
    j["seed"] = stamp.seed;
    j["input_hash"] = stamp.input_hash;
    j["unit"] = stamp.unit;
}

std::string csv_row(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ',';
        out += fmt_g17(values[i]);
    }
    out += '\n';
    return out;
}

Json report_to_json(const CheckReport& report, const ArtifactStamp& stamp) {
    const Unit unit = unit_from_name(stamp.unit);
    Json j;
    stamp_json(j, stamp);
    j["suite"] = report.suite;
    j["pass"] = report.pass;
    j["count"] = report.records.size();
    j["min_gap"] = from_nats(report.min_gap(), unit);
    j["max_abs_gap"] = from_nats(report.max_abs_gap(), unit);
    Json records = Json::array();
    for (const auto& r : report.records) {
        Json rec;
        rec["construction"] = r.construction;
        rec["lhs"] = from_nats(r.lhs, unit);
        rec["rhs"] = from_nats(r.rhs, unit);
        rec["gap"] = from_nats(r.gap, unit);
        rec["pass"] = r.pass;
        records.push_back(std::move(rec));
    }
    j["records"] = std::move(records);
    return j;
}

}  // namespace fbcap
