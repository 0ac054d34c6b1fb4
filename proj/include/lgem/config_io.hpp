// JSON form of ScenarioConfig. The document carries a "units" block; see
// docs/config_schema.md for the full schema.

#pragma once

#include <cstdint>
#include <string>

#include "lgem/core_model.hpp"

namespace lgem {

// Pretty-printed, deterministic JSON. A "config_hash" key, when present, is
// informational and ignored on input.
std::string config_to_json(const ScenarioConfig& c, bool with_hash = false);

// Parses a full document. With a base config, the document is applied as a
// JSON merge patch over the base, so a file may override only some keys.
// Unknown keys and malformed values throw Error(Parse).
ScenarioConfig config_from_json(const std::string& text, const ScenarioConfig* base = nullptr);

ScenarioConfig load_config(const std::string& path, const ScenarioConfig* base = nullptr);
void save_config(const std::string& path, const ScenarioConfig& c);

// FNV-1a 64 of the compact, key-sorted JSON form.
std::uint64_t config_hash(const ScenarioConfig& c);
std::string config_hash_hex(const ScenarioConfig& c);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace lgem
