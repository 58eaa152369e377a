// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tslu/network.hpp"

namespace tslu {

inline constexpr int kCheckpointFormatVersion = 1;

struct Provenance {
  std::string stage;        // plan stage that produced the model, or "init"
  std::uint64_t seed = 0;
  std::string parent_hash;  // hash of the checkpoint this one was trained from; empty at the root

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Checkpoint {
  Model model;
  Provenance provenance;
};

// JSON text with keys in a fixed order; parameters are base64 of
// little-endian float32. Byte-identical for identical models.
std::string checkpoint_to_string(const Model& m, const Provenance& p);
// Throws DataError on malformed content or a version mismatch, ShapeError
// when the parameters disagree with the stored config.
Checkpoint checkpoint_from_string(std::string_view text);

// Returns the content hash of what was written.
std::string save_checkpoint(const std::filesystem::path& path, const Model& m, const Provenance& p);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Lowercase hex SHA-256.
std::string content_hash(std::string_view bytes);
std::string file_hash(const std::filesystem::path& path);

std::string base64_encode(std::span<const unsigned char> bytes);
std::vector<unsigned char> base64_decode(std::string_view text);

// Config and vocabulary as JSON text, shared with the plan reader.
std::string config_to_json(const ModelConfig& c);
ModelConfig config_from_json(std::string_view text);

}  // namespace tslu
