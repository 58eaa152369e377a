// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tslu/tensor.hpp"

namespace tslu {

// A labelled slot: "toloc.city_name" = {"las", "vegas"}. Lists of spans are
// kept in spoken order.
struct EntitySpan {
  std::string label;
  std::vector<std::string> value;

  friend bool operator==(const EntitySpan&, const EntitySpan&) = default;
};

struct AnnotatedUtterance {
  std::string id;
  std::string speaker;
  std::optional<std::vector<std::string>> words;      // verbatim transcript
  std::optional<std::vector<EntitySpan>> entities;    // spoken order
  std::optional<std::string> intent;                  // e.g. "FLIGHT"
  std::optional<std::vector<std::string>> pos_tags;   // one per transcript word
  std::optional<Tensor> features;                     // [T, F]
};

// Splits on runs of spaces.
std::vector<std::string> split_words(const std::string& text);
std::string join_words(const std::vector<std::string>& words);

// Throws DataError when the utterance violates its invariants: nothing
// annotated, empty entity values, entity values not found in the transcript
// in order, or POS tags misaligned with words.
void validate_utterance(const AnnotatedUtterance& u);

// Word index at which each entity starts, matching values against the
// transcript greedily left to right. Throws DataError if a value is missing.
std::vector<std::size_t> locate_entities(const std::vector<std::string>& words,
                                         const std::vector<EntitySpan>& entities);

}  // namespace tslu
