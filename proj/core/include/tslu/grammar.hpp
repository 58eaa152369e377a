// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tslu/utterance.hpp"

namespace tslu {

// A slot type draws its values from a named lexicon; several slots may
// share one (from/to/stop cities).
struct SlotDef {
  std::string label;
  std::string lexicon;
};

// Carrier phrase with "{slot.label}" placeholders, mapped to one intent.
struct TemplateDef {
  std::string pattern;
  std::string intent;
};

struct GrammarConfig {
  std::map<std::string, std::vector<std::string>> lexicons;  // values may span words
  std::vector<SlotDef> slots;
  std::vector<TemplateDef> templates;
  // Task-independent speech: random word strings from this lexicon.
  std::vector<std::string> general_words;
  std::size_t general_min_words = 3;
  std::size_t general_max_words = 7;
  // Rule-based tagging: word -> tag, lexicon -> tag for slot values, else default.
  std::map<std::string, std::string> pos_lexicon;
  std::map<std::string, std::string> lexicon_pos;
  std::string default_pos = "NN";
};

// Flight-information grammar: 9 slot types over 6 lexicons, 6 intents.
GrammarConfig default_grammar();

// Throws DataError on empty lexicons, unknown placeholders or slot lexicons,
// or an empty template/general-word list.
void validate_grammar(const GrammarConfig& g);

// "B-x" and "I-x" for every slot, in slot order.
std::vector<std::string> entity_symbols(const GrammarConfig& g);
// "INT-x" for every intent, in first-appearance order.
std::vector<std::string> intent_symbols(const GrammarConfig& g);
// "POS-x" for every tag the tagger can produce, sorted.
std::vector<std::string> pos_symbols(const GrammarConfig& g);

enum class CorpusMode {
  kSlu,               // in-domain: transcript, entities, intent
  kTaskIndependent,   // general speech, transcript only
};

struct CorpusOptions {
  CorpusMode mode = CorpusMode::kSlu;
  bool pos_tags = false;
  std::vector<std::string> speakers;  // assigned round-robin; "spk0" when empty
  std::string id_prefix = "utt";
};

// Deterministic in (grammar, n, seed, options); utterance i depends only on
// its own derived seed.
std::vector<AnnotatedUtterance> generate_corpus(const GrammarConfig& g, std::size_t n,
                                                std::uint64_t seed, const CorpusOptions& options);

// Tags each word by the rules in `g`; `entities` mark slot-value words.
std::vector<std::string> tag_pos(const GrammarConfig& g, const std::vector<std::string>& words,
                                 const std::vector<std::pair<std::size_t, std::string>>& slot_words);

}  // namespace tslu
