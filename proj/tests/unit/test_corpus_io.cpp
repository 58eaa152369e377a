// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <fstream>

#include "test_util.hpp"
#include "tslu/corpus_io.hpp"
#include "tslu/error.hpp"

using namespace tslu;

namespace {

std::vector<AnnotatedUtterance> sample() {
  Rng r(3);
  AnnotatedUtterance a;
  a.id = "a";
  a.speaker = "s1";
  a.words = split_words("fly to las vegas");
  a.entities = std::vector<EntitySpan>{{"toloc.city_name", {"las", "vegas"}}};
  a.intent = "FLIGHT";
  a.features = test::random_tensor<float>({5, 3}, r);
  AnnotatedUtterance b;
  b.id = "b";
  b.speaker = "s2";
  b.intent = "AIRFARE";
  b.features = test::random_tensor<float>({2, 3}, r);
  AnnotatedUtterance c;
  c.id = "c";
  c.speaker = "s1";
  c.words = split_words("i fly");
  c.pos_tags = std::vector<std::string>{"PRP", "VB"};
  return {a, b, c};
}

void write_text(const std::filesystem::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST_CASE("round trip with sidecar features") {
  test::TempDir dir("corpus");
  const auto path = dir / "x.jsonl";
  const auto corpus = sample();
  write_corpus(path, corpus);
  CHECK(std::filesystem::exists(features_sidecar(path)));
  CHECK(features_sidecar(path).extension() == ".feats");
  const auto back = read_corpus(path);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].id == corpus[i].id);
    CHECK(back[i].speaker == corpus[i].speaker);
    CHECK(back[i].words == corpus[i].words);
    CHECK(back[i].entities == corpus[i].entities);
    CHECK(back[i].intent == corpus[i].intent);
    CHECK(back[i].pos_tags == corpus[i].pos_tags);
    CHECK(back[i].features.has_value() == corpus[i].features.has_value());
    if (corpus[i].features) CHECK(bit_identical(*back[i].features, *corpus[i].features));
  }
}

TEST_CASE("json lines") {
  const auto line = utterance_to_json_line(sample()[0], false);
  CHECK(line.find("\"text\":\"fly to las vegas\"") != std::string::npos);
  CHECK(line.find("features_ref") == std::string::npos);
  const auto u = utterance_from_json_line(line);
  CHECK(u.entities->front().value == std::vector<std::string>{"las", "vegas"});
  CHECK_THROWS_AS(utterance_from_json_line("{not json"), DataError);
  CHECK_THROWS_AS(utterance_from_json_line(R"({"id":"x","speaker":"s"})"), DataError);
  CHECK_THROWS_AS(utterance_from_json_line(R"({"id":"x","speaker":"s","text":"a b","entities":[{"label":"l","value":"c"}]})"),
                  DataError);
  CHECK_THROWS_AS(utterance_from_json_line(R"({"speaker":"s","intent":"X"})"), DataError);
}

TEST_CASE("errors carry the line number") {
  test::TempDir dir("corpus-bad");
  const auto path = dir / "bad.jsonl";
  write_text(path, "{\"id\":\"a\",\"speaker\":\"s\",\"intent\":\"X\"}\n{oops\n");
  CHECK_THROWS_WITH_AS(read_corpus(path), doctest::Contains(":2"), DataError);
  CHECK_THROWS_AS(read_corpus(dir / "missing.jsonl"), DataError);
}

TEST_CASE("missing or corrupt sidecar") {
  test::TempDir dir("corpus-sidecar");
  const auto path = dir / "x.jsonl";
  write_corpus(path, sample());
  std::filesystem::resize_file(features_sidecar(path), 20);
  CHECK_THROWS_AS(read_corpus(path), DataError);
  std::filesystem::remove(features_sidecar(path));
  CHECK_THROWS_AS(read_corpus(path), DataError);
}
