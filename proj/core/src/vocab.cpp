// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include "tslu/vocab.hpp"

#include "tslu/error.hpp"

namespace tslu {

SymbolKind classify_symbol(std::string_view s) {
  if (s == Vocab::kBlank) return SymbolKind::kBlank;
  if (s.size() == 1) return SymbolKind::kCharacter;
  if (s.starts_with("B-")) return SymbolKind::kEntityBegin;
  if (s.starts_with("I-")) return SymbolKind::kEntityInside;
  if (s.starts_with("INT-")) return SymbolKind::kIntent;
  if (s.starts_with("POS-")) return SymbolKind::kPosTag;
  throw DataError("unrecognized symbol '" + std::string(s) + "'");
}

std::string_view symbol_payload(std::string_view s) {
  switch (classify_symbol(s)) {
    case SymbolKind::kEntityBegin:
    case SymbolKind::kEntityInside:
      return s.substr(2);
    case SymbolKind::kIntent:
    case SymbolKind::kPosTag:
      return s.substr(s.find('-') + 1);
    default:
      return s;
  }
}

bool is_label_kind(SymbolKind kind) {
  return kind != SymbolKind::kBlank && kind != SymbolKind::kCharacter;
}

Vocab::Vocab() { append(std::string(kBlank)); }

Vocab Vocab::from_characters(std::string_view charset) {
  Vocab v;
  for (char c : charset) {
    std::string s(1, c);
    if (v.contains(s)) throw DataError("duplicate character '" + s + "' in charset");
    v.append(std::move(s));
  }
  return v;
}

Vocab Vocab::from_symbols(std::span<const std::string> symbols) {
  if (symbols.empty() || symbols.front() != kBlank) {
    throw DataError("vocabulary must start with " + std::string(kBlank));
  }
  return Vocab().extended(symbols.subspan(1));
}

Vocab Vocab::extended(std::span<const std::string> symbols) const {
  Vocab v = *this;
  for (const auto& s : symbols) {
    if (v.contains(s)) throw DataError("duplicate symbol '" + s + "'");
    if (classify_symbol(s) == SymbolKind::kBlank) throw DataError("cannot add BLANK twice");
    v.append(s);
  }
  return v;
}

std::optional<SymbolId> Vocab::find(std::string_view symbol) const {
  auto it = index_.find(std::string(symbol));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SymbolId Vocab::id(std::string_view symbol) const {
  if (auto f = find(symbol)) return *f;
  throw DataError("symbol '" + std::string(symbol) + "' not in vocabulary");
}

bool Vocab::is_prefix_of(const Vocab& other) const {
  if (other.size() < size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (symbols_[i] != other.symbols_[i]) return false;
  }
  return true;
}

void Vocab::append(std::string symbol) {
  const SymbolKind k = classify_symbol(symbol);
  index_.emplace(symbol, symbols_.size());
  kinds_.push_back(k);
  symbols_.push_back(std::move(symbol));
}

}  // namespace tslu
