// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tslu/utterance.hpp"

namespace tslu {

// One utterance per line:
//   {"id", "speaker", "text"?, "entities"?: [{"label", "value"}], "intent"?,
//    "pos"?: [tags], "features_ref"?}
// Features go to a sidecar next to the JSONL ("x.jsonl" -> "x.feats"):
//   "TSLUFEAT", u64 LE header length, JSON header [{"id","offset","T","F"}],
//   then little-endian float32 data. Offsets count floats from the data start.
std::filesystem::path features_sidecar(const std::filesystem::path& jsonl);

std::string utterance_to_json_line(const AnnotatedUtterance& u, bool with_features_ref);
AnnotatedUtterance utterance_from_json_line(const std::string& line);

// Writes the JSONL and, when any utterance carries features, the sidecar.
void write_corpus(const std::filesystem::path& jsonl, const std::vector<AnnotatedUtterance>& corpus);

// Reads the JSONL and attaches sidecar features where referenced. Throws
// DataError with the line number on malformed input.
std::vector<AnnotatedUtterance> read_corpus(const std::filesystem::path& jsonl);

}  // namespace tslu
