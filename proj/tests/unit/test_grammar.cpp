// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <set>

#include "tslu/error.hpp"
#include "tslu/grammar.hpp"
#include "tslu/slu_format.hpp"
#include "tslu/vocab.hpp"

using namespace tslu;

TEST_CASE("default grammar shape") {
  const auto g = default_grammar();
  validate_grammar(g);
  CHECK(g.slots.size() == 9);
  CHECK(intent_symbols(g).size() == 6);
  CHECK(entity_symbols(g).size() == 18);
  CHECK(entity_symbols(g).front() == "B-" + g.slots.front().label);
  const auto pos = pos_symbols(g);
  CHECK(std::is_sorted(pos.begin(), pos.end()));
}

TEST_CASE("empty and repeated generation") {
  const auto g = default_grammar();
  CHECK(generate_corpus(g, 0, 1, {}).empty());
  const auto a = generate_corpus(g, 20, 5, {}), b = generate_corpus(g, 20, 5, {});
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].words == b[i].words);
    CHECK(a[i].entities == b[i].entities);
    CHECK(a[i].intent == b[i].intent);
  }
  const auto c = generate_corpus(g, 20, 6, {});
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= a[i].words != c[i].words;
  CHECK(differs);
}

TEST_CASE("a prefix of a larger corpus is the smaller corpus") {
  const auto g = default_grammar();
  const auto small = generate_corpus(g, 10, 3, {CorpusMode::kTaskIndependent, true, {}, "gen"});
  const auto large = generate_corpus(g, 30, 3, {CorpusMode::kTaskIndependent, true, {}, "gen"});
  for (std::size_t i = 0; i < small.size(); ++i) CHECK(small[i].words == large[i].words);
}

TEST_CASE("every entity value occurs in its transcript in spoken order") {
  const auto g = default_grammar();
  const auto corpus = generate_corpus(g, 500, 11, {CorpusMode::kSlu, false, {"s1", "s2"}, "u"});
  const auto desk = Vocab::from_characters(Vocab::kDeskCharset);
  std::set<std::string> intents;
  for (const auto& u : corpus) {
    validate_utterance(u);
    REQUIRE(u.entities.has_value());
    REQUIRE(u.intent.has_value());
    intents.insert(*u.intent);
    for (const auto& w : *u.words) {
      for (char ch : w) CHECK(desk.contains(std::string(1, ch)));
    }
    for (auto s : all_settings()) {
      if (s == SerializationSetting::kTranscriptPos) continue;
      CHECK_NOTHROW(serialize_symbols(u, s));
    }
  }
  CHECK(intents.size() == 6);
  CHECK(corpus[1].speaker == "s2");
  CHECK(corpus[3].id == "u-3");
}

TEST_CASE("task-independent mode with POS tags") {
  const auto g = default_grammar();
  const auto corpus = generate_corpus(g, 50, 2, {CorpusMode::kTaskIndependent, true, {}, "gen"});
  for (const auto& u : corpus) {
    CHECK_FALSE(u.entities.has_value());
    CHECK_FALSE(u.intent.has_value());
    REQUIRE(u.pos_tags.has_value());
    CHECK(u.pos_tags->size() == u.words->size());
    CHECK(u.words->size() >= g.general_min_words);
    CHECK(u.words->size() <= g.general_max_words);
    CHECK(u.speaker == "spk0");
  }
}

TEST_CASE("rule-based tagging") {
  const auto g = default_grammar();
  const std::vector<std::string> words{"i", "fly", "to", "reno", "zzz"};
  const auto tags = tag_pos(g, words, {{3, "city"}});
  CHECK(tags == std::vector<std::string>{"PRP", "VB", "TO", "NNP", "NN"});
}

TEST_CASE("grammar validation") {
  auto g = default_grammar();
  g.templates.push_back({"to {nowhere}", "X"});
  CHECK_THROWS_AS(validate_grammar(g), DataError);
  g = default_grammar();
  g.templates.clear();
  CHECK_THROWS_AS(validate_grammar(g), DataError);
  g = default_grammar();
  g.lexicons["city"].clear();
  CHECK_THROWS_AS(validate_grammar(g), DataError);
  g = default_grammar();
  g.general_words.clear();
  CHECK_THROWS_AS(validate_grammar(g), DataError);
}
