// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include "tslu/slu_format.hpp"

#include <algorithm>
#include <array>

#include "tslu/error.hpp"

namespace tslu {

// ---- utterance helpers ----------------------------------------------------

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    if (c == ' ') {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string s;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) s += ' ';
    s += words[i];
  }
  return s;
}

std::vector<std::size_t> locate_entities(const std::vector<std::string>& words,
                                         const std::vector<EntitySpan>& entities) {
  std::vector<std::size_t> starts;
  std::size_t from = 0;
  for (const auto& e : entities) {
    if (e.value.empty()) throw DataError("entity '" + e.label + "' has an empty value");
    bool found = false;
    for (std::size_t k = from; k + e.value.size() <= words.size(); ++k) {
      if (std::equal(e.value.begin(), e.value.end(), words.begin() + static_cast<std::ptrdiff_t>(k))) {
        starts.push_back(k);
        from = k + e.value.size();
        found = true;
        break;
      }
    }
    if (!found) {
      throw DataError("entity '" + e.label + "' value '" + join_words(e.value) +
                      "' does not occur in the transcript in spoken order");
    }
  }
  return starts;
}

void validate_utterance(const AnnotatedUtterance& u) {
  if (!u.words && !u.entities && !u.intent) {
    throw DataError("utterance '" + u.id + "' has no transcript, entities or intent");
  }
  if (u.entities) {
    for (const auto& e : *u.entities) {
      if (e.label.empty()) throw DataError("utterance '" + u.id + "' has an entity without label");
      if (e.value.empty()) throw DataError("utterance '" + u.id + "' entity '" + e.label + "' is empty");
    }
    if (u.words) locate_entities(*u.words, *u.entities);
  }
  if (u.pos_tags && (!u.words || u.pos_tags->size() != u.words->size())) {
    throw DataError("utterance '" + u.id + "' POS tags do not align with its words");
  }
}

// ---- settings -------------------------------------------------------------

namespace {

constexpr std::array<SerializationSetting, 7> kAllSettings = {
    SerializationSetting::kTranscript,      SerializationSetting::kTranscriptEntities,
    SerializationSetting::kEntitiesSpoken,  SerializationSetting::kEntitiesAlpha,
    SerializationSetting::kIntentOnly,      SerializationSetting::kTranscriptIntent,
    SerializationSetting::kTranscriptPos,
};

const std::vector<std::string>& require_words(const AnnotatedUtterance& u, SerializationSetting s) {
  if (!u.words || u.words->empty()) {
    throw DataError("utterance '" + u.id + "': setting " + std::string(setting_name(s)) +
                    " requires field 'text'");
  }
  return *u.words;
}

const std::vector<EntitySpan>& require_entities(const AnnotatedUtterance& u, SerializationSetting s) {
  if (!u.entities) {
    throw DataError("utterance '" + u.id + "': setting " + std::string(setting_name(s)) +
                    " requires field 'entities'");
  }
  return *u.entities;
}

const std::string& require_intent(const AnnotatedUtterance& u, SerializationSetting s) {
  if (!u.intent) {
    throw DataError("utterance '" + u.id + "': setting " + std::string(setting_name(s)) +
                    " requires field 'intent'");
  }
  return *u.intent;
}

void spell(const std::string& word, std::vector<std::string>& out) {
  for (char c : word) out.emplace_back(1, c);
}

void emit_entity_groups(const std::vector<EntitySpan>& entities, std::vector<std::string>& out) {
  bool first = true;
  for (const auto& e : entities) {
    for (std::size_t i = 0; i < e.value.size(); ++i) {
      if (!first) out.emplace_back(Vocab::kSpace);
      first = false;
      spell(e.value[i], out);
      out.push_back(i == 0 ? entity_begin_symbol(e.label) : entity_inside_symbol(e.label));
    }
  }
}

}  // namespace

std::string_view setting_name(SerializationSetting s) {
  switch (s) {
    case SerializationSetting::kTranscript: return "transcript";
    case SerializationSetting::kTranscriptEntities: return "transcript-entities";
    case SerializationSetting::kEntitiesSpoken: return "entities-spoken";
    case SerializationSetting::kEntitiesAlpha: return "entities-alpha";
    case SerializationSetting::kIntentOnly: return "intent-only";
    case SerializationSetting::kTranscriptIntent: return "transcript-intent";
    case SerializationSetting::kTranscriptPos: return "transcript-pos";
  }
  return "unknown";
}

SerializationSetting parse_setting(std::string_view name) {
  for (auto s : kAllSettings) {
    if (setting_name(s) == name) return s;
  }
  throw DataError("unknown serialization setting '" + std::string(name) + "'");
}

std::span<const SerializationSetting> all_settings() { return kAllSettings; }

std::string entity_begin_symbol(std::string_view label) { return "B-" + std::string(label); }
std::string entity_inside_symbol(std::string_view label) { return "I-" + std::string(label); }
std::string intent_symbol(std::string_view intent) { return "INT-" + std::string(intent); }
std::string pos_symbol(std::string_view tag) { return "POS-" + std::string(tag); }

std::vector<std::string> serialize_symbols(const AnnotatedUtterance& u, SerializationSetting s) {
  std::vector<std::string> out;
  switch (s) {
    case SerializationSetting::kTranscript:
    case SerializationSetting::kTranscriptIntent: {
      const auto& words = require_words(u, s);
      for (std::size_t k = 0; k < words.size(); ++k) {
        if (k) out.emplace_back(Vocab::kSpace);
        spell(words[k], out);
      }
      if (s == SerializationSetting::kTranscriptIntent) out.push_back(intent_symbol(require_intent(u, s)));
      break;
    }
    case SerializationSetting::kTranscriptEntities: {
      const auto& words = require_words(u, s);
      const auto& entities = require_entities(u, s);
      const auto starts = locate_entities(words, entities);
      std::vector<std::string> tag(words.size());
      for (std::size_t e = 0; e < entities.size(); ++e) {
        for (std::size_t i = 0; i < entities[e].value.size(); ++i) {
          tag[starts[e] + i] = i == 0 ? entity_begin_symbol(entities[e].label)
                                      : entity_inside_symbol(entities[e].label);
        }
      }
      for (std::size_t k = 0; k < words.size(); ++k) {
        if (k) out.emplace_back(Vocab::kSpace);
        spell(words[k], out);
        if (!tag[k].empty()) out.push_back(tag[k]);
      }
      break;
    }
    case SerializationSetting::kEntitiesSpoken:
      emit_entity_groups(require_entities(u, s), out);
      break;
    case SerializationSetting::kEntitiesAlpha: {
      auto sorted = require_entities(u, s);
      std::stable_sort(sorted.begin(), sorted.end(),
                       [](const EntitySpan& a, const EntitySpan& b) { return a.label < b.label; });
      emit_entity_groups(sorted, out);
      break;
    }
    case SerializationSetting::kIntentOnly:
      out.push_back(intent_symbol(require_intent(u, s)));
      break;
    case SerializationSetting::kTranscriptPos: {
      const auto& words = require_words(u, s);
      if (!u.pos_tags || u.pos_tags->size() != words.size()) {
        throw DataError("utterance '" + u.id + "': setting transcript-pos requires field 'pos'");
      }
      for (std::size_t k = 0; k < words.size(); ++k) {
        if (k) out.emplace_back(Vocab::kSpace);
        spell(words[k], out);
        out.push_back(pos_symbol((*u.pos_tags)[k]));
      }
      break;
    }
  }
  return out;
}

std::vector<SymbolId> serialize(const AnnotatedUtterance& u, SerializationSetting setting,
                                const Vocab& vocab) {
  const auto symbols = serialize_symbols(u, setting);
  std::vector<SymbolId> ids;
  ids.reserve(symbols.size());
  for (const auto& s : symbols) {
    auto id = vocab.find(s);
    if (!id) {
      throw DataError("utterance '" + u.id + "': symbol '" + s + "' not in model vocabulary");
    }
    ids.push_back(*id);
  }
  return ids;
}

// ---- parsing --------------------------------------------------------------

namespace {

class HypothesisParser {
 public:
  void on_symbol(std::string_view s) {
    switch (classify_symbol(s)) {
      case SymbolKind::kBlank:
        out_.recoveries.push_back("ignored BLANK in hypothesis");
        return;
      case SymbolKind::kCharacter:
        if (s == Vocab::kSpace) {
          flush();
        } else {
          buffer_ += s;
        }
        return;
      case SymbolKind::kEntityBegin:
      case SymbolKind::kEntityInside:
        flush();
        on_entity_label(std::string(s));
        return;
      case SymbolKind::kIntent:
        flush();
        if (out_.intent) out_.recoveries.push_back("multiple intents; keeping the last");
        out_.intent = std::string(symbol_payload(s));
        return;
      case SymbolKind::kPosTag:
        flush();
        return;
    }
  }

  ParsedHypothesis finish() {
    flush();
    if (pending_) {
      out_.recoveries.push_back("dropped " + *pending_ + " with empty value");
      pending_.reset();
    }
    return std::move(out_);
  }

 private:
  void flush() {
    if (buffer_.empty()) return;
    out_.words.push_back(std::move(buffer_));
    buffer_.clear();
    tagged_.push_back(false);
    if (pending_) {
      auto label = std::move(*pending_);
      pending_.reset();
      tag(out_.words.size() - 1, label);
    }
  }

  void on_entity_label(std::string label) {
    if (!out_.words.empty() && !tagged_.back()) {
      tag(out_.words.size() - 1, label);
      return;
    }
    if (pending_) out_.recoveries.push_back("dropped " + *pending_ + " with empty value");
    pending_ = std::move(label);
  }

  void tag(std::size_t word, const std::string& label) {
    tagged_[word] = true;
    const std::string name(symbol_payload(label));
    const bool inside = classify_symbol(label) == SymbolKind::kEntityInside;
    if (inside && !out_.entities.empty() && out_.entities.back().label == name &&
        last_entity_word_ + 1 == word) {
      out_.entities.back().value.push_back(out_.words[word]);
    } else {
      if (inside) out_.recoveries.push_back("promoted orphan " + label + " to B-" + name);
      out_.entities.push_back(EntitySpan{name, {out_.words[word]}});
    }
    last_entity_word_ = word;
  }

  ParsedHypothesis out_;
  std::string buffer_;
  std::vector<bool> tagged_;
  std::optional<std::string> pending_;
  std::size_t last_entity_word_ = 0;
};

}  // namespace

ParsedHypothesis parse_symbol_strings(std::span<const std::string> symbols) {
  HypothesisParser p;
  for (const auto& s : symbols) p.on_symbol(s);
  return p.finish();
}

ParsedHypothesis parse_hypothesis(std::span<const SymbolId> symbols, const Vocab& vocab) {
  HypothesisParser p;
  std::size_t unknown = 0;
  for (SymbolId id : symbols) {
    if (id >= vocab.size()) {
      ++unknown;
      continue;
    }
    p.on_symbol(vocab.symbol(id));
  }
  auto out = p.finish();
  if (unknown) out.recoveries.push_back("skipped " + std::to_string(unknown) + " unknown symbol ids");
  return out;
}

}  // namespace tslu
