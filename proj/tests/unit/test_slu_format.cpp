// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "tslu/error.hpp"
#include "tslu/slu_format.hpp"
#include "tslu/utterance.hpp"

using namespace tslu;

namespace {

AnnotatedUtterance example() {
  AnnotatedUtterance u;
  u.id = "ex";
  u.words = split_words("i want a flight to dallas from reno that makes a stop in las vegas");
  u.entities = std::vector<EntitySpan>{{"toloc.city_name", {"dallas"}},
                                       {"fromloc.city_name", {"reno"}},
                                       {"stoploc.city_name", {"las", "vegas"}}};
  u.intent = "FLIGHT";
  return u;
}

// Concatenation with label symbols wrapped as <...> for readable checks.
std::string render(const std::vector<std::string>& symbols) {
  std::string s;
  for (const auto& x : symbols) s += x.size() == 1 ? x : "<" + x + ">";
  return s;
}

}  // namespace

TEST_CASE("transcript with inline entity labels") {
  CHECK(render(serialize_symbols(example(), SerializationSetting::kTranscriptEntities)) ==
        "i want a flight to dallas<B-toloc.city_name> from reno<B-fromloc.city_name> that makes a stop in "
        "las<B-stoploc.city_name> vegas<I-stoploc.city_name>");
}

TEST_CASE("entities in spoken order") {
  CHECK(render(serialize_symbols(example(), SerializationSetting::kEntitiesSpoken)) ==
        "dallas<B-toloc.city_name> reno<B-fromloc.city_name> las<B-stoploc.city_name> vegas<I-stoploc.city_name>");
}

TEST_CASE("entities in alphabetic order") {
  CHECK(render(serialize_symbols(example(), SerializationSetting::kEntitiesAlpha)) ==
        "reno<B-fromloc.city_name> las<B-stoploc.city_name> vegas<I-stoploc.city_name> dallas<B-toloc.city_name>");
}

TEST_CASE("intent settings") {
  CHECK(render(serialize_symbols(example(), SerializationSetting::kIntentOnly)) == "<INT-FLIGHT>");
  const auto t = render(serialize_symbols(example(), SerializationSetting::kTranscriptIntent));
  CHECK(t == "i want a flight to dallas from reno that makes a stop in las vegas<INT-FLIGHT>");
  CHECK(render(serialize_symbols(example(), SerializationSetting::kTranscript)) ==
        "i want a flight to dallas from reno that makes a stop in las vegas");
}

TEST_CASE("pos setting") {
  AnnotatedUtterance u;
  u.id = "p";
  u.words = split_words("i fly");
  u.pos_tags = std::vector<std::string>{"PRP", "VB"};
  CHECK(render(serialize_symbols(u, SerializationSetting::kTranscriptPos)) == "i<POS-PRP> fly<POS-VB>");
  u.pos_tags.reset();
  CHECK_THROWS_AS(serialize_symbols(u, SerializationSetting::kTranscriptPos), DataError);
}

TEST_CASE("missing fields are named") {
  AnnotatedUtterance u;
  u.id = "x";
  u.intent = "FLIGHT";
  CHECK(serialize_symbols(u, SerializationSetting::kIntentOnly).size() == 1);
  CHECK_THROWS_WITH_AS(serialize_symbols(u, SerializationSetting::kTranscript),
                       doctest::Contains("text"), DataError);
  CHECK_THROWS_WITH_AS(serialize_symbols(u, SerializationSetting::kEntitiesSpoken),
                       doctest::Contains("entities"), DataError);
}

TEST_CASE("settings by name") {
  for (auto s : all_settings()) CHECK(parse_setting(setting_name(s)) == s);
  CHECK_THROWS_AS(parse_setting("bogus"), DataError);
}

TEST_CASE("ids through a vocabulary") {
  const auto vocab = Vocab::from_characters(Vocab::kDeskCharset).extended(std::vector<std::string>{"INT-FLIGHT"});
  const auto ids = serialize(example(), SerializationSetting::kTranscriptIntent, vocab);
  CHECK(ids.back() == vocab.id("INT-FLIGHT"));
  CHECK_THROWS_AS(serialize(example(), SerializationSetting::kTranscriptEntities, vocab), DataError);
}

TEST_CASE("parse inverts serialize") {
  for (auto s : {SerializationSetting::kTranscriptEntities, SerializationSetting::kTranscriptIntent,
                 SerializationSetting::kEntitiesSpoken}) {
    const auto u = example();
    const auto p = parse_symbol_strings(serialize_symbols(u, s));
    CHECK(p.recoveries.empty());
    if (s != SerializationSetting::kEntitiesSpoken) CHECK(p.words == *u.words);
    if (s != SerializationSetting::kTranscriptIntent) CHECK(p.entities == *u.entities);
    if (s == SerializationSetting::kTranscriptIntent) CHECK(p.intent == "FLIGHT");
  }
}

TEST_CASE("recovery rules") {
  SUBCASE("orphan I- before a word is promoted") {
    const std::vector<std::string> s{"I-x", "d", "a", "l", "l", "a", "s"};
    const auto p = parse_symbol_strings(s);
    REQUIRE(p.entities.size() == 1);
    CHECK(p.entities[0] == EntitySpan{"x", {"dallas"}});
    CHECK(p.recoveries.size() == 1);
  }
  SUBCASE("orphan I- after an unrelated word is promoted") {
    const std::vector<std::string> s{"a", "b", "I-x"};
    const auto p = parse_symbol_strings(s);
    CHECK(p.entities == std::vector<EntitySpan>{{"x", {"ab"}}});
  }
  SUBCASE("label without a value is dropped") {
    const std::vector<std::string> s{"a", "B-x", "B-y"};
    const auto p = parse_symbol_strings(s);
    CHECK(p.entities == std::vector<EntitySpan>{{"x", {"a"}}});
    CHECK(p.recoveries.size() == 1);
  }
  SUBCASE("last intent wins") {
    const std::vector<std::string> s{"a", "INT-A", "INT-B"};
    CHECK(parse_symbol_strings(s).intent == "B");
  }
  SUBCASE("intent at the end") {
    const std::vector<std::string> s{"h", "i", "INT-FLIGHT"};
    const auto p = parse_symbol_strings(s);
    CHECK(p.intent == "FLIGHT");
    CHECK(p.words == std::vector<std::string>{"hi"});
  }
  SUBCASE("blank and POS tags are tolerated") {
    const std::vector<std::string> s{"a", "POS-NN", " ", "<blank>", "b"};
    const auto p = parse_symbol_strings(s);
    CHECK(p.words == std::vector<std::string>{"a", "b"});
    CHECK(p.recoveries.size() == 1);
  }
}

TEST_CASE("utterance validation") {
  auto u = example();
  validate_utterance(u);
  (*u.entities)[0].value = {"houston"};
  CHECK_THROWS_AS(validate_utterance(u), DataError);
  u = example();
  std::swap((*u.entities)[0], (*u.entities)[1]);
  CHECK_THROWS_AS(validate_utterance(u), DataError);
  AnnotatedUtterance empty;
  CHECK_THROWS_AS(validate_utterance(empty), DataError);
  CHECK(join_words(split_words("  a  b ")) == "a b");
}
