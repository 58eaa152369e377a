// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tslu/utterance.hpp"
#include "tslu/vocab.hpp"

namespace tslu {

struct EditCounts {
  std::size_t hits = 0;
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t ref_words = 0;

  std::size_t errors() const { return substitutions + deletions + insertions; }
  // Percentage; throws DataError when ref_words is zero.
  double wer() const;
  EditCounts& operator+=(const EditCounts& o);
};

// Unit-cost word alignment. Among minimum-cost alignments the one with the
// most hits is reported.
EditCounts align_words(std::span<const std::string> hyp, std::span<const std::string> ref);

// Drops every BLANK and label symbol, then splits the characters on " ".
std::vector<std::string> filtered_words(std::span<const SymbolId> hyp, const Vocab& vocab);

// Throws DataError on an empty reference.
EditCounts wer_filtered(std::span<const SymbolId> hyp, std::span<const std::string> ref,
                        const Vocab& vocab);

struct SlotCounts {
  std::size_t tp = 0, fp = 0, fn = 0;

  double precision() const;
  double recall() const;
  // 2PR/(P+R); 1.0 when hypothesis and reference are both empty.
  double f1() const;
  SlotCounts& operator+=(const SlotCounts& o);
};

// Multiset matching on (label, value); values compare case-insensitively
// after whitespace normalization. Order never matters.
SlotCounts slot_f1(std::span<const EntitySpan> hyp, std::span<const EntitySpan> ref);

// Exact-match percentage; a missing hypothesis is wrong. Throws DataError on
// a length mismatch or empty input.
double intent_accuracy(std::span<const std::optional<std::string>> hyp,
                       std::span<const std::string> ref);

struct UtteranceScore {
  std::string id;
  std::optional<EditCounts> words;
  std::optional<SlotCounts> slots;
  std::optional<bool> intent_correct;
};

struct ScoreReport {
  EditCounts words;
  SlotCounts slots;
  std::size_t intents_correct = 0, intents_total = 0;
  std::size_t utterances = 0;
  std::vector<UtteranceScore> per_utterance;

  bool has_wer() const { return words.ref_words > 0; }
  double wer() const { return words.wer(); }
  double intent_accuracy() const;
  std::string to_json() const;
  std::string per_utterance_tsv() const;
};

// One hypothesis as produced by the decoder, already parsed.
struct ScoredHypothesis {
  std::string id;
  std::vector<SymbolId> symbols;
};

// Scores each hypothesis against the reference with the same id, on every
// measure the reference supports. Throws DataError on missing ids.
ScoreReport score_corpus(const std::vector<ScoredHypothesis>& hyps,
                         const std::vector<AnnotatedUtterance>& refs, const Vocab& vocab);

}  // namespace tslu
