// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tslu {

using SymbolId = std::size_t;

enum class SymbolKind {
  kBlank,
  kCharacter,    // single character; the word separator " " included
  kEntityBegin,  // "B-<label>"
  kEntityInside, // "I-<label>"
  kIntent,       // "INT-<name>"
  kPosTag,       // "POS-<tag>"
};

// Classifies a symbol string by its spelling alone.
SymbolKind classify_symbol(std::string_view symbol);

// Strips the kind prefix ("B-", "I-", "INT-", "POS-"); characters unchanged.
std::string_view symbol_payload(std::string_view symbol);

// True for entity, intent and POS symbols, i.e. everything that is neither
// BLANK nor a character.
bool is_label_kind(SymbolKind kind);

// Ordered symbol table. BLANK is always id 0; ids never change once assigned
// and new symbols are only ever appended.
class Vocab {
 public:
  static constexpr std::string_view kBlank = "<blank>";
  static constexpr std::string_view kSpace = " ";

  // Lowercase letters, apostrophe and space: 28 characters.
  static constexpr std::string_view kDeskCharset = "abcdefghijklmnopqrstuvwxyz' ";
  // 45 characters, matching the size of a full-scale grapheme inventory.
  static constexpr std::string_view kFullCharset =
      "abcdefghijklmnopqrstuvwxyz0123456789 '-.&/_?,";

  Vocab();  // BLANK only

  static Vocab from_characters(std::string_view charset);
  // Rebuilds a vocabulary from its ordered symbol strings (index 0 must be BLANK).
  static Vocab from_symbols(std::span<const std::string> symbols);

  // Returns a copy with `symbols` appended; throws DataError on duplicates
  // within `symbols` or against existing entries.
  Vocab extended(std::span<const std::string> symbols) const;

  std::size_t size() const { return symbols_.size(); }
  const std::string& symbol(SymbolId id) const { return symbols_.at(id); }
  const std::vector<std::string>& symbols() const { return symbols_; }
  SymbolKind kind(SymbolId id) const { return kinds_.at(id); }

  std::optional<SymbolId> find(std::string_view symbol) const;
  // Throws DataError naming the symbol when absent.
  SymbolId id(std::string_view symbol) const;
  bool contains(std::string_view symbol) const { return find(symbol).has_value(); }

  std::optional<SymbolId> space_id() const { return find(kSpace); }

  // True when `other` starts with exactly this vocabulary's symbols.
  bool is_prefix_of(const Vocab& other) const;

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.symbols_ == b.symbols_; }

 private:
  void append(std::string symbol);

  std::vector<std::string> symbols_;
  std::vector<SymbolKind> kinds_;
  std::unordered_map<std::string, SymbolId> index_;
};

}  // namespace tslu
