#pragma once

#include "sdeu/baselines.hpp"
#include "sdeu/heads.hpp"
#include "sdeu/simulator.hpp"
#include "sdeu/universe.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace sdeu {

using Json = nlohmann::json;
using Bytes = std::vector<std::uint8_t>;

// ---- canonical JSON -------------------------------------------------------
//
// Field names follow the domain types; matrices are row-major nested arrays.
// Doubles are written as the shortest decimal that round-trips exactly.

Json to_json(const SdeSystemSpec& spec);
/// Throws FormatError on missing or mistyped fields.
SdeSystemSpec spec_from_json(const Json& j);

Json to_json(const GmmParams& p);
GmmParams gmm_from_json(const Json& j);
Json to_json(const SkewTParams& p);
SkewTParams skewt_from_json(const Json& j);

Json to_json(const Garch11Params& p);
Json to_json(const DccParams& p);
DccParams dcc_from_json(const Json& j);

/// Parse JSON text; syntax errors become FormatError with the byte offset.
Json parse_json(std::string_view text);

// ---- framed binary --------------------------------------------------------
//
// 32-byte little-endian header:
//   0  magic "SDEU"
//   4  u32 version (1)
//   8  u32 S
//  12  u32 H
//  16  u32 D
//  20  u32 flags (bit 0: S*H regime bytes follow the payload)
//  24  f64 dt
// then S*H*D f64 values, row-major. A PathMatrix is a frame with S = 1, H = T.

inline constexpr std::uint32_t kFrameVersion = 1;
inline constexpr std::size_t kFrameHeaderSize = 32;

Bytes encode_frame(const SampleSet& set);
Bytes encode_frame(const PathMatrix& path);
/// Decodes one frame starting at `offset`; advances offset past it.
SampleSet decode_sample_set(std::span<const std::uint8_t> bytes, std::size_t& offset);
PathMatrix decode_path(std::span<const std::uint8_t> bytes, std::size_t& offset);
/// Whole-buffer forms; trailing bytes are a FormatError.
SampleSet decode_sample_set(std::span<const std::uint8_t> bytes);
PathMatrix decode_path(std::span<const std::uint8_t> bytes);

// ---- NDJSON ---------------------------------------------------------------
//
// Line 1: {"format":"SDEU","version":1,"kind":"sample_set"|"path","S":..,"H":..,"D":..,"dt":..}
// then one line per sample: {"sample":s,"values":[[...D]...H]} (paths add "regimes").

std::string to_ndjson(const SampleSet& set);
std::string to_ndjson(const PathMatrix& path);
SampleSet sample_set_from_ndjson(std::string_view text);
PathMatrix path_from_ndjson(std::string_view text);

// ---- training records -----------------------------------------------------

struct TrainingRecord {
    SdeSystemSpec system_spec;
    PathMatrix history;
    SampleSet future_branches;
};

/// Three u64-LE length-prefixed blocks: compact spec JSON, history frame, branches frame.
Bytes encode_record(const TrainingRecord& record);
TrainingRecord decode_record(std::span<const std::uint8_t> bytes, std::size_t& offset);
std::vector<TrainingRecord> decode_records(std::span<const std::uint8_t> bytes);

// ---- files ----------------------------------------------------------------

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace sdeu
