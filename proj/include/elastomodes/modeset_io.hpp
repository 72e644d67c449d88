#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "elastomodes/solver.hpp"

namespace elastomodes {

/// Binary container layout:
///   8 bytes   magic "ELMODES1"
///   8 bytes   header length in bytes, unsigned little-endian
///   header    UTF-8 JSON (counts, tolerances, mesh fingerprint, extra)
///   payload   little-endian float64: lambdas, then modes column-major
inline constexpr char kModeSetMagic[8] = {'E', 'L', 'M', 'O', 'D', 'E', 'S', '1'};

nlohmann::json modeset_header(const ModeSet& modes, const nlohmann::json& extra = nlohmann::json::object());

std::string encode_modeset(const ModeSet& modes, const nlohmann::json& extra = nlohmann::json::object());
ModeSet decode_modeset(const std::string& bytes, nlohmann::json* header = nullptr);

void write_modeset(const std::filesystem::path& path, const ModeSet& modes,
                   const nlohmann::json& extra = nlohmann::json::object());
ModeSet read_modeset(const std::filesystem::path& path, nlohmann::json* header = nullptr);

/// write_modeset picks this form when the path ends in .json.
/// JSON-only export for small cases: {"header": ..., "lambdas": [...], "modes": [[column], ...]}.
nlohmann::json modeset_to_json(const ModeSet& modes, const nlohmann::json& extra = nlohmann::json::object());
ModeSet modeset_from_json(const nlohmann::json& j);

} // namespace elastomodes
