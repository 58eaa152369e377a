// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tslu/utterance.hpp"
#include "tslu/vocab.hpp"

namespace tslu {

// How an utterance is turned into a transducer target.
enum class SerializationSetting {
  kTranscript,          // i want a flight to dallas ...
  kTranscriptEntities,  // ... to dallas B-toloc.city_name from reno B-fromloc.city_name ...
  kEntitiesSpoken,      // dallas B-toloc.city_name reno B-fromloc.city_name ...
  kEntitiesAlpha,       // entity groups sorted by label
  kIntentOnly,          // INT-FLIGHT
  kTranscriptIntent,    // i want a flight ... vegas INT-FLIGHT
  kTranscriptPos,       // i POS-PRP want POS-VBP ...
};

std::string_view setting_name(SerializationSetting s);
// Accepts the names produced by setting_name(); throws DataError otherwise.
SerializationSetting parse_setting(std::string_view name);
std::span<const SerializationSetting> all_settings();

std::string entity_begin_symbol(std::string_view label);
std::string entity_inside_symbol(std::string_view label);
std::string intent_symbol(std::string_view intent);
std::string pos_symbol(std::string_view tag);

// Symbol strings for `u` under `setting`. Words are spelled character by
// character with " " between words; a label symbol follows the last
// character of the word it tags. Throws DataError naming a missing field.
std::vector<std::string> serialize_symbols(const AnnotatedUtterance& u, SerializationSetting setting);

// As above, mapped through `vocab`; throws DataError for unknown symbols.
std::vector<SymbolId> serialize(const AnnotatedUtterance& u, SerializationSetting setting,
                                const Vocab& vocab);

struct ParsedHypothesis {
  std::vector<std::string> words;
  std::vector<EntitySpan> entities;
  std::optional<std::string> intent;
  std::vector<std::string> recoveries;  // one note per repair applied
};

// Inverse of serialize for well-formed sequences, total on everything else.
//
// A word ends at " " or at any label symbol. An entity label tags the word
// right before it when that word is still untagged; otherwise it waits for
// the next word. Repairs:
//   - I-x not continuing an x entity on the previous word becomes B-x;
//   - a label that never finds a word is dropped;
//   - with several intents the last one wins;
//   - BLANK symbols are ignored.
ParsedHypothesis parse_hypothesis(std::span<const SymbolId> symbols, const Vocab& vocab);
ParsedHypothesis parse_symbol_strings(std::span<const std::string> symbols);

}  // namespace tslu
