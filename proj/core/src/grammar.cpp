// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include "tslu/grammar.hpp"

#include <algorithm>
#include <set>

#include "tslu/error.hpp"
#include "tslu/rng.hpp"
#include "tslu/slu_format.hpp"

namespace tslu {

GrammarConfig default_grammar() {
  GrammarConfig g;
  g.lexicons["city"] = {"dallas",  "reno",      "las vegas", "boston", "denver",
                        "atlanta", "new york",  "oakland",   "phoenix", "seattle",
                        "miami",   "st louis",  "houston",   "chicago", "kansas city",
                        "san jose", "pittsburgh", "baltimore"};
  g.lexicons["day"] = {"monday", "tuesday", "wednesday", "thursday", "friday", "saturday",
                       "sunday"};
  g.lexicons["period"] = {"morning", "afternoon", "evening", "night"};
  g.lexicons["airline"] = {"delta", "united", "american", "us air", "continental", "northwest"};
  g.lexicons["class"] = {"first class", "coach", "business class"};
  g.lexicons["cost"] = {"cheapest", "least expensive", "lowest"};

  g.slots = {
      {"fromloc.city_name", "city"},         {"toloc.city_name", "city"},
      {"stoploc.city_name", "city"},         {"depart_date.day_name", "day"},
      {"depart_time.period_of_day", "period"}, {"airline_name", "airline"},
      {"class_type", "class"},               {"cost_relative", "cost"},
      {"city_name", "city"},
  };

  // Each carrier phrase closes on words that give away its intent.
  g.templates = {
      {"to {toloc.city_name} from {fromloc.city_name} with a stop in {stoploc.city_name} i want a "
       "flight",
       "FLIGHT"},
      {"from {fromloc.city_name} to {toloc.city_name} on {depart_date.day_name} show me flights",
       "FLIGHT"},
      {"i need to go to {toloc.city_name} from {fromloc.city_name} in the {depart_time.period_of_day} "
       "on a flight",
       "FLIGHT"},
      {"{airline_name} to {toloc.city_name} from {fromloc.city_name} list the flights", "FLIGHT"},
      {"{class_type} from {fromloc.city_name} to {toloc.city_name} how much is the fare", "AIRFARE"},
      {"to {toloc.city_name} from {fromloc.city_name} what is the {cost_relative} fare", "AIRFARE"},
      {"{airline_name} to {toloc.city_name} on {depart_date.day_name} what are the fares", "AIRFARE"},
      {"in {city_name} what ground transportation is there", "GROUND_SERVICE"},
      {"from the airport into {city_name} is there a taxi", "GROUND_SERVICE"},
      {"to {toloc.city_name} from {fromloc.city_name} which airlines fly", "AIRLINE"},
      {"stopping in {stoploc.city_name} on {depart_date.day_name} what are the airlines", "AIRLINE"},
      {"when does the {airline_name} flight to {toloc.city_name} leave", "FLIGHT_TIME"},
      {"flights to {toloc.city_name} in the {depart_time.period_of_day} what time do they arrive",
       "FLIGHT_TIME"},
      {"{toloc.city_name} from {fromloc.city_name} how far is it", "DISTANCE"},
      {"to {toloc.city_name} from {fromloc.city_name} what is the distance", "DISTANCE"},
  };

  g.general_words = {
      "yeah",   "i",      "think",  "you",    "know",   "that",    "we",     "really",
      "like",   "the",    "people", "it",     "was",    "kind",    "of",     "going",
      "to",     "have",   "been",   "what",   "they",   "do",      "not",    "so",
      "well",   "good",   "about",  "there",  "this",   "time",    "just",   "because",
      "all",    "right",  "one",    "two",    "three",  "family",  "work",   "home",
      "school", "kids",   "car",    "house",  "money",  "weather", "rain",   "summer",
      "winter", "music",  "movie",  "dinner", "friends", "phone",  "call",   "talk",
      "pretty", "sure",   "maybe",  "never",  "always", "quite",   "quick",  "jazz",
      "quiz",   "box",    "six",    "seven",  "vote",   "video",   "fix",    "lazy",
      "zoo",    "jump",   "joke",   "view",   "very",   "next",    "week",   "year",
      "back",   "big",    "old",    "new",    "city",   "travel",  "plane",  "trip",
      "visit",  "leave",  "arrive", "morning", "night", "day",     "from",   "in",
      "on",     "at",     "with",   "my",     "your",   "our",     "would",  "could",
      "should", "every",  "only",   "much",   "long",   "far",     "away",   "than",
      "st",     "louis",  "dallas", "texas",  "boston", "miami",   "fly",    "flew",
  };

  g.pos_lexicon = {
      {"i", "PRP"},      {"me", "PRP"},      {"you", "PRP"},     {"we", "PRP"},
      {"it", "PRP"},     {"they", "PRP"},    {"my", "PRP$"},     {"your", "PRP$"},
      {"our", "PRP$"},   {"a", "DT"},        {"the", "DT"},      {"this", "DT"},
      {"that", "WDT"},   {"all", "DT"},      {"every", "DT"},    {"which", "WDT"},
      {"what", "WP"},    {"how", "WRB"},     {"when", "WRB"},    {"to", "TO"},
      {"from", "IN"},    {"in", "IN"},       {"on", "IN"},       {"at", "IN"},
      {"of", "IN"},      {"with", "IN"},     {"into", "IN"},     {"about", "IN"},
      {"because", "IN"}, {"than", "IN"},     {"want", "VBP"},    {"need", "VBP"},
      {"think", "VBP"},  {"know", "VBP"},    {"like", "VBP"},    {"have", "VBP"},
      {"do", "VBP"},     {"does", "VBZ"},    {"is", "VBZ"},      {"was", "VBD"},
      {"been", "VBN"},   {"going", "VBG"},   {"makes", "VBZ"},   {"show", "VB"},
      {"list", "VB"},    {"fly", "VB"},      {"flew", "VBD"},    {"leave", "VB"},
      {"arrive", "VB"},  {"stop", "VB"},     {"call", "VB"},     {"talk", "VB"},
      {"work", "VB"},    {"vote", "VB"},     {"fix", "VB"},      {"jump", "VB"},
      {"visit", "VB"},   {"travel", "VB"},   {"would", "MD"},    {"could", "MD"},
      {"should", "MD"},  {"not", "RB"},      {"so", "RB"},       {"well", "RB"},
      {"really", "RB"},  {"just", "RB"},     {"never", "RB"},    {"always", "RB"},
      {"maybe", "RB"},   {"very", "RB"},     {"quite", "RB"},    {"pretty", "RB"},
      {"only", "RB"},    {"far", "RB"},      {"away", "RB"},     {"back", "RB"},
      {"there", "EX"},   {"yeah", "UH"},     {"right", "JJ"},    {"good", "JJ"},
      {"sure", "JJ"},    {"big", "JJ"},      {"old", "JJ"},      {"new", "JJ"},
      {"next", "JJ"},    {"quick", "JJ"},    {"lazy", "JJ"},     {"long", "JJ"},
      {"much", "JJ"},    {"ground", "NN"},   {"one", "CD"},      {"two", "CD"},
      {"three", "CD"},   {"six", "CD"},      {"seven", "CD"},    {"flights", "NNS"},
      {"fares", "NNS"},  {"airlines", "NNS"}, {"people", "NNS"}, {"kids", "NNS"},
      {"friends", "NNS"}, {"st", "NNP"},     {"louis", "NNP"},   {"dallas", "NNP"},
      {"texas", "NNP"},  {"boston", "NNP"},  {"miami", "NNP"},
  };
  g.lexicon_pos = {{"city", "NNP"}, {"day", "NNP"},  {"period", "NN"},
                   {"airline", "NNP"}, {"class", "NN"}, {"cost", "JJS"}};
  return g;
}

namespace {

struct Piece {
  bool is_slot = false;
  std::string text;  // literal words or slot label
};

std::vector<Piece> split_pattern(const std::string& pattern) {
  std::vector<Piece> pieces;
  std::size_t pos = 0;
  while (pos < pattern.size()) {
    const std::size_t open = pattern.find('{', pos);
    if (open == std::string::npos) {
      pieces.push_back({false, pattern.substr(pos)});
      break;
    }
    if (open > pos) pieces.push_back({false, pattern.substr(pos, open - pos)});
    const std::size_t close = pattern.find('}', open);
    if (close == std::string::npos) throw DataError("unterminated placeholder in '" + pattern + "'");
    pieces.push_back({true, pattern.substr(open + 1, close - open - 1)});
    pos = close + 1;
  }
  return pieces;
}

const SlotDef* find_slot(const GrammarConfig& g, const std::string& label) {
  for (const auto& s : g.slots) {
    if (s.label == label) return &s;
  }
  return nullptr;
}

}  // namespace

void validate_grammar(const GrammarConfig& g) {
  for (const auto& [name, values] : g.lexicons) {
    if (values.empty()) throw DataError("lexicon '" + name + "' is empty");
    for (const auto& v : values) {
      if (split_words(v).empty()) throw DataError("lexicon '" + name + "' has an empty value");
    }
  }
  for (const auto& s : g.slots) {
    if (!g.lexicons.count(s.lexicon)) {
      throw DataError("slot '" + s.label + "' references unknown lexicon '" + s.lexicon + "'");
    }
  }
  if (g.templates.empty()) throw DataError("grammar has no templates");
  for (const auto& t : g.templates) {
    if (t.intent.empty()) throw DataError("template '" + t.pattern + "' has no intent");
    for (const auto& p : split_pattern(t.pattern)) {
      if (p.is_slot && !find_slot(g, p.text)) {
        throw DataError("template '" + t.pattern + "' uses unknown slot '" + p.text + "'");
      }
    }
  }
  if (g.general_words.empty()) throw DataError("grammar has an empty general lexicon");
  if (g.general_min_words == 0 || g.general_min_words > g.general_max_words) {
    throw DataError("grammar general utterance length range is invalid");
  }
}

std::vector<std::string> entity_symbols(const GrammarConfig& g) {
  std::vector<std::string> out;
  for (const auto& s : g.slots) {
    out.push_back(entity_begin_symbol(s.label));
    out.push_back(entity_inside_symbol(s.label));
  }
  return out;
}

std::vector<std::string> intent_symbols(const GrammarConfig& g) {
  std::vector<std::string> out;
  for (const auto& t : g.templates) {
    auto sym = intent_symbol(t.intent);
    if (std::find(out.begin(), out.end(), sym) == out.end()) out.push_back(std::move(sym));
  }
  return out;
}

std::vector<std::string> pos_symbols(const GrammarConfig& g) {
  std::set<std::string> tags{g.default_pos};
  for (const auto& [w, t] : g.pos_lexicon) tags.insert(t);
  for (const auto& [l, t] : g.lexicon_pos) tags.insert(t);
  std::vector<std::string> out;
  for (const auto& t : tags) out.push_back(pos_symbol(t));
  return out;
}

std::vector<std::string> tag_pos(const GrammarConfig& g, const std::vector<std::string>& words,
                                 const std::vector<std::pair<std::size_t, std::string>>& slot_words) {
  std::vector<std::string> tags(words.size());
  for (std::size_t k = 0; k < words.size(); ++k) {
    auto it = g.pos_lexicon.find(words[k]);
    tags[k] = it != g.pos_lexicon.end() ? it->second : g.default_pos;
  }
  for (const auto& [k, lexicon] : slot_words) {
    auto it = g.lexicon_pos.find(lexicon);
    if (it != g.lexicon_pos.end() && k < tags.size()) tags[k] = it->second;
  }
  return tags;
}

std::vector<AnnotatedUtterance> generate_corpus(const GrammarConfig& g, std::size_t n,
                                                std::uint64_t seed, const CorpusOptions& options) {
  validate_grammar(g);
  std::vector<std::vector<Piece>> patterns;
  for (const auto& t : g.templates) patterns.push_back(split_pattern(t.pattern));

  std::vector<AnnotatedUtterance> corpus;
  corpus.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(mix_seed(seed, i));
    AnnotatedUtterance u;
    u.id = options.id_prefix + "-" + std::to_string(i);
    u.speaker = options.speakers.empty() ? "spk0" : options.speakers[i % options.speakers.size()];

    std::vector<std::string> words;
    std::vector<std::pair<std::size_t, std::string>> slot_words;
    if (options.mode == CorpusMode::kTaskIndependent) {
      const std::size_t len = rng.between(g.general_min_words, g.general_max_words);
      for (std::size_t k = 0; k < len; ++k) words.push_back(g.general_words[rng.index(g.general_words.size())]);
    } else {
      const std::size_t which = rng.index(g.templates.size());
      std::vector<EntitySpan> entities;
      std::set<std::string> used;
      for (const auto& piece : patterns[which]) {
        if (!piece.is_slot) {
          for (auto& w : split_words(piece.text)) words.push_back(std::move(w));
          continue;
        }
        const SlotDef* slot = find_slot(g, piece.text);
        const auto& values = g.lexicons.at(slot->lexicon);
        // Distinct values within an utterance where the lexicon allows it.
        std::string value = values[rng.index(values.size())];
        for (int tries = 0; used.count(value) && tries < 16; ++tries) {
          value = values[rng.index(values.size())];
        }
        used.insert(value);
        auto value_words = split_words(value);
        for (auto& w : value_words) {
          slot_words.emplace_back(words.size(), slot->lexicon);
          words.push_back(w);
        }
        entities.push_back(EntitySpan{slot->label, std::move(value_words)});
      }
      u.entities = std::move(entities);
      u.intent = g.templates[which].intent;
    }
    if (options.pos_tags) u.pos_tags = tag_pos(g, words, slot_words);
    u.words = std::move(words);
    corpus.push_back(std::move(u));
  }
  return corpus;
}

}  // namespace tslu
