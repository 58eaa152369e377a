// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include "tslu/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "tslu/error.hpp"
#include "tslu/slu_format.hpp"

namespace tslu {

double EditCounts::wer() const {
  if (ref_words == 0) throw DataError("WER is undefined for an empty reference");
  return 100.0 * static_cast<double>(errors()) / static_cast<double>(ref_words);
}

EditCounts& EditCounts::operator+=(const EditCounts& o) {
  hits += o.hits;
  substitutions += o.substitutions;
  deletions += o.deletions;
  insertions += o.insertions;
  ref_words += o.ref_words;
  return *this;
}

EditCounts align_words(std::span<const std::string> hyp, std::span<const std::string> ref) {
  struct Cell {
    std::size_t cost = 0, hits = 0, s = 0, d = 0, i = 0;
  };
  auto better = [](const Cell& a, const Cell& b) {
    return a.cost < b.cost || (a.cost == b.cost && a.hits > b.hits);
  };
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<Cell> prev(m + 1), cur(m + 1);
  for (std::size_t j = 1; j <= m; ++j) prev[j] = {j, 0, 0, 0, j};
  for (std::size_t r = 1; r <= n; ++r) {
    cur[0] = {r, 0, 0, r, 0};
    for (std::size_t j = 1; j <= m; ++j) {
      Cell diag = prev[j - 1];
      if (ref[r - 1] == hyp[j - 1]) {
        ++diag.hits;
      } else {
        ++diag.cost;
        ++diag.s;
      }
      Cell del = prev[j];
      ++del.cost;
      ++del.d;
      Cell ins = cur[j - 1];
      ++ins.cost;
      ++ins.i;
      Cell best = diag;
      if (better(del, best)) best = del;
      if (better(ins, best)) best = ins;
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  const Cell& c = prev[m];
  return EditCounts{c.hits, c.s, c.d, c.i, n};
}

std::vector<std::string> filtered_words(std::span<const SymbolId> hyp, const Vocab& vocab) {
  std::string text;
  for (SymbolId id : hyp) {
    if (id >= vocab.size() || vocab.kind(id) != SymbolKind::kCharacter) continue;
    text += vocab.symbol(id);
  }
  return split_words(text);
}

EditCounts wer_filtered(std::span<const SymbolId> hyp, std::span<const std::string> ref,
                        const Vocab& vocab) {
  if (ref.empty()) throw DataError("WER reference is empty");
  const auto words = filtered_words(hyp, vocab);
  return align_words(words, ref);
}

double SlotCounts::precision() const {
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double SlotCounts::recall() const {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double SlotCounts::f1() const {
  if (tp + fp + fn == 0) return 1.0;
  const double p = precision(), r = recall();
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

SlotCounts& SlotCounts::operator+=(const SlotCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

namespace {

std::string slot_key(const EntitySpan& e) {
  std::string v;
  for (const auto& w : e.value) {
    for (const auto& part : split_words(w)) {
      if (!v.empty()) v += ' ';
      for (char c : part) v += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  return e.label + '\n' + v;
}

}  // namespace

SlotCounts slot_f1(std::span<const EntitySpan> hyp, std::span<const EntitySpan> ref) {
  std::unordered_map<std::string, std::size_t> pool;
  for (const auto& e : ref) ++pool[slot_key(e)];
  SlotCounts c;
  for (const auto& e : hyp) {
    auto it = pool.find(slot_key(e));
    if (it != pool.end() && it->second > 0) {
      --it->second;
      ++c.tp;
    } else {
      ++c.fp;
    }
  }
  c.fn = ref.size() - c.tp;
  return c;
}

double intent_accuracy(std::span<const std::optional<std::string>> hyp,
                       std::span<const std::string> ref) {
  if (hyp.size() != ref.size()) {
    throw DataError("intent lists differ in length: " + std::to_string(hyp.size()) + " vs " +
                    std::to_string(ref.size()));
  }
  if (ref.empty()) throw DataError("intent accuracy over an empty list");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) correct += hyp[i] && *hyp[i] == ref[i];
  return 100.0 * static_cast<double>(correct) / static_cast<double>(ref.size());
}

double ScoreReport::intent_accuracy() const {
  if (intents_total == 0) throw DataError("no references carry an intent");
  return 100.0 * static_cast<double>(intents_correct) / static_cast<double>(intents_total);
}

std::string ScoreReport::to_json() const {
  nlohmann::ordered_json j;
  j["utterances"] = utterances;
  if (has_wer()) {
    j["wer"] = wer();
    j["words"] = {{"ref_words", words.ref_words}, {"hits", words.hits},
                  {"substitutions", words.substitutions}, {"deletions", words.deletions},
                  {"insertions", words.insertions}};
  }
  j["slots"] = {{"tp", slots.tp}, {"fp", slots.fp}, {"fn", slots.fn}, {"precision", slots.precision()},
                {"recall", slots.recall()}, {"f1", slots.f1()}};
  if (intents_total > 0) {
    j["intent_accuracy"] = intent_accuracy();
    j["intents"] = {{"correct", intents_correct}, {"total", intents_total}};
  }
  return j.dump(2);
}

std::string ScoreReport::per_utterance_tsv() const {
  std::ostringstream os;
  os << "id\tref_words\terrors\tslot_tp\tslot_fp\tslot_fn\tintent\n";
  for (const auto& u : per_utterance) {
    os << u.id << '\t';
    if (u.words) {
      os << u.words->ref_words << '\t' << u.words->errors() << '\t';
    } else {
      os << "-\t-\t";
    }
    if (u.slots) {
      os << u.slots->tp << '\t' << u.slots->fp << '\t' << u.slots->fn << '\t';
    } else {
      os << "-\t-\t-\t";
    }
    os << (u.intent_correct ? (*u.intent_correct ? "ok" : "wrong") : "-") << '\n';
  }
  return os.str();
}

ScoreReport score_corpus(const std::vector<ScoredHypothesis>& hyps,
                         const std::vector<AnnotatedUtterance>& refs, const Vocab& vocab) {
  std::unordered_map<std::string, const ScoredHypothesis*> by_id;
  for (const auto& h : hyps) by_id[h.id] = &h;
  ScoreReport report;
  for (const auto& ref : refs) {
    auto it = by_id.find(ref.id);
    if (it == by_id.end()) throw DataError("no hypothesis for reference '" + ref.id + "'");
    const auto& h = *it->second;
    const auto parsed = parse_hypothesis(h.symbols, vocab);
    UtteranceScore s{ref.id, {}, {}, {}};
    if (ref.words && !ref.words->empty()) {
      s.words = wer_filtered(h.symbols, *ref.words, vocab);
      report.words += *s.words;
    }
    if (ref.entities) {
      s.slots = slot_f1(parsed.entities, *ref.entities);
      report.slots += *s.slots;
    }
    if (ref.intent) {
      s.intent_correct = parsed.intent && *parsed.intent == *ref.intent;
      report.intents_correct += *s.intent_correct;
      ++report.intents_total;
    }
    ++report.utterances;
    report.per_utterance.push_back(std::move(s));
  }
  return report;
}

}  // namespace tslu
