#pragma once

// File formats: VEPR binary recordings, code-set CSV + JSON sidecar, and JSON for
// TRFs, decoder models, simulator configs and capacity reports.

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "veplab/capacity.hpp"
#include "veplab/decoder.hpp"
#include "veplab/encoder.hpp"
#include "veplab/optimizer.hpp"
#include "veplab/recording.hpp"
#include "veplab/simulator.hpp"
#include "veplab/stimgen.hpp"

namespace veplab::io {

using Json = nlohmann::json;

// VEPR layout, all little-endian:
//   0  "VEPR"              4 bytes
//   4  version u32 = 1
//   8  n_trials u32
//  12  n_channels u32
//  16  n_samples u32
//  20  sample_rate f64
//  28  labels u32 x n_trials
//   .. payload f64, trial-major then channel-major then sample order
inline constexpr std::uint32_t kRecordingVersion = 1;
inline constexpr std::size_t kRecordingHeaderBytes = 28;

std::vector<std::uint8_t> encode_recording(const Recording& recording);
Recording decode_recording(std::span<const std::uint8_t> bytes);
void write_recording(const Recording& recording, const std::filesystem::path& path);
Recording read_recording(const std::filesystem::path& path);

// Shortest text that parses back to the same double would be fine for JSON; CSV
// uses fixed 17 significant digits. Both are locale independent.
std::string format_double(double value, int significant_digits = 17);
double parse_double(std::string_view text);

// `codes.csv` (class_id,frame_index,value) plus `codes.json` sidecar next to it.
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);
void write_codeset(const CodeSet& set, const std::filesystem::path& csv_path);
CodeSet read_codeset(const std::filesystem::path& csv_path);

Json to_json(const Trf& trf);
Trf trf_from_json(const Json& j);

Json to_json(const DecoderModel& model);
DecoderModel model_from_json(const Json& j);

Json to_json(const SimConfig& config);
SimConfig sim_config_from_json(const Json& j);

Json to_json(const SpectralSnr& snr, const InfoReport& info);

// Compact form intended for dump() without indentation.
Json to_json(const OptimizationTrace& trace);
Json to_json(const PersonalSelection& selection);

Json truth_to_json(const SimConfig& config, const GroundTruth& truth);

Json read_json(const std::filesystem::path& path);
// Pretty-printed with a trailing newline.
void write_json(const Json& j, const std::filesystem::path& path);
void write_text(const std::string& text, const std::filesystem::path& path);

// Throws InvalidConfig naming the first key of `j` outside `allowed`.
void reject_unknown_keys(const Json& j, std::initializer_list<std::string_view> allowed,
                         std::string_view context);

}  // namespace veplab::io
