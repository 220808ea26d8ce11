#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "fbcap/common.hpp"
#include "fbcap/envelope.hpp"
#include "fbcap/finite.hpp"
#include "fbcap/gaussian.hpp"

namespace fbcap {

/// Insertion-ordered so emitted documents read schema-first and byte-identical
/// reruns are trivial.
using Json = nlohmann::ordered_json;

inline constexpr const char* kGvbcModelSchema = "fbcap/gvbc-model-v1";
inline constexpr const char* kDmModelSchema = "fbcap/dm-model-v1";
inline constexpr const char* kVerifyReportSchema = "fbcap/verify-report-v1";
inline constexpr const char* kGvbcBoundarySchema = "fbcap/gvbc-boundary-v1";
inline constexpr const char* kDmFrontierSchema = "fbcap/dm-frontier-v1";
inline constexpr const char* kEnvelopeCurveSchema = "fbcap/envelope-curve-v1";

/// 64-bit FNV-1a of the raw bytes, formatted "fnv1a:<16 hex digits>".
std::string fnv1a64_hex(const std::string& bytes);

/// Parses text as JSON; malformed input becomes input_error.
Json parse_json(const std::string& text, const std::string& what);

Mat mat_from_json(const Json& j);
Json mat_to_json(const Mat& m);

FiniteDist dist_from_json(const Json& j);
Json dist_to_json(const FiniteDist& d);
JointDist joint_from_json(const Json& j);
Json joint_to_json(const JointDist& d);

/// Channels share the {"axes":[in,out],"mass":[...]} layout with mass holding
/// the row-major transition matrix.
DMChannel channel_from_json(const Json& j);
Json channel_to_json(const DMChannel& ch);

/// Model document: {"schema":"fbcap/gvbc-model-v1","G":...,"K":...,
/// "Ktilde":...,"Kprime":...} with each matrix as {"dim":[r,c],"data":[...]}.
GaussianBCModel gvbc_model_from_json(const Json& j);
Json gvbc_model_to_json(const GaussianBCModel& model);

enum class DmModelKind { degraded_bc, joint_bc, rpdbc };

/// Parsed fbcap/dm-model-v1 document.  kind "degraded-bc" fills bc from
/// explicit stages; "joint-bc" carries the unfactored channel q with its
/// output split, for the degradedness check downstream; "rpdbc" fills
/// components with the two oppositely degraded parts.
struct DmModelInput {
    DmModelKind kind = DmModelKind::degraded_bc;
    DegradedBC bc;
    DMChannel q;
    int y_size = 0;
    int z_size = 0;
    std::vector<DegradedBC> components;
};

DmModelInput dm_model_from_json(const Json& j);

/// Provenance header stamped on every artifact: '#' comment lines in CSV,
/// top-level fields in JSON.
struct ArtifactStamp {
    std::string schema;
    std::uint64_t seed = 0;
    std::string input_hash = "none";
    std::string unit = "nats";
};

std::string csv_header(const ArtifactStamp& stamp);
void stamp_json(Json& j, const ArtifactStamp& stamp);

/// One "%.17g" CSV row.
std::string csv_row(const std::vector<double>& values);

/// Report document; record values are held in nats internally and emitted in
/// the stamped unit.
Json report_to_json(const CheckReport& report, const ArtifactStamp& stamp);

}  // namespace fbcap
