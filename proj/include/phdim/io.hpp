#pragma once

#include "phdim/detector.hpp"
#include "phdim/estimators.hpp"
#include "phdim/point_cloud.hpp"
#include "phdim/synthetic.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace phdim {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// EMB1: one text's token-embedding cloud.
//
//   offset  size  field
//   0       4     magic "EMB1"
//   4       1     version (1)
//   5       3     reserved, zero
//   8       4     n_vectors, u32 little-endian
//   12      4     dim, u32 little-endian
//   16      4*n*dim  binary32 little-endian payload, row-major
// ---------------------------------------------------------------------------

inline constexpr std::size_t kEmbHeaderSize = 16;
inline constexpr std::uint8_t kEmbVersion = 1;

/// Parses an EMB1 image. Throws BadMagic, TruncatedFile, TrailingData,
/// NonFiniteValue (each with the offending byte offset) or SizeError for an
/// empty cloud.
PointCloud decode_embeddings(std::span<const std::uint8_t> bytes, std::string id);

/// Serialises a cloud; coordinates are rounded to binary32.
std::vector<std::uint8_t> encode_embeddings(const PointCloud& cloud);

/// Reads an EMB1 file; the cloud id is the path as given.
PointCloud read_embeddings(const std::filesystem::path& path);
void write_embeddings(const std::filesystem::path& path, const PointCloud& cloud);

/// True when the file starts with the EMB1 magic.
bool is_embedding_file(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// ---------------------------------------------------------------------------
// Manifests: one JSON object per line,
//   {"path": "a.emb", "label": "human", "language": "en", ...}
// Relative paths resolve against the manifest's directory. A record may carry
// a precomputed "score" instead of (or in addition to) a path.
// ---------------------------------------------------------------------------

struct ManifestRecord {
    std::string id;                 // "id" field, else the path as written
    std::filesystem::path path;     // resolved; empty when only a score is given
    std::optional<Label> label;
    std::map<std::string, std::string> meta;
    std::optional<double> score;
};

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);

/// Parses line-delimited JSON, skipping blank lines. Throws DataError with
/// the line number on malformed input.
std::vector<Json> read_json_lines(const std::filesystem::path& path);

/// Score lists for calibration: either one number per line, or estimate
/// report records (their "value" field; records carrying an error are skipped).
std::vector<double> read_scores(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Structured documents.
// ---------------------------------------------------------------------------

Json to_json(const PhdParams& params);
PhdParams phd_params_from_json(const Json& j);

Json to_json(const DetectorModel& model);
DetectorModel detector_model_from_json(const Json& j); // throws DataError
DetectorModel read_detector_model(const std::filesystem::path& path);
void write_detector_model(const std::filesystem::path& path, const DetectorModel& model);

Json to_json(const GroupMetrics& metrics);
Json to_json(const EvalReport& report);

Json to_json(const ManifoldSpec& spec);
ManifoldSpec manifold_spec_from_json(const Json& j); // throws ParamError
Json to_json(const BenchmarkCell& cell);

/// One JSON document per line.
void write_json_lines(const std::filesystem::path& path, const std::vector<Json>& records);

} // namespace phdim
