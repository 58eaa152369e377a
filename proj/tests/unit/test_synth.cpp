// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "tslu/error.hpp"
#include "tslu/synth.hpp"
#include "tslu/tensor.hpp"
#include "tslu/vocab.hpp"

using namespace tslu;

namespace {

AnnotatedUtterance text(const std::string& id, const std::string& s) {
  AnnotatedUtterance u;
  u.id = id;
  u.speaker = "s";
  u.words = split_words(s);
  return u;
}

}  // namespace

TEST_CASE("empty transcript is an error") {
  const auto space = make_synth_space("ab ", 4, 1);
  const auto spk = make_speaker("s", space, VoiceStyle{}, 2);
  AnnotatedUtterance u;
  u.id = "e";
  CHECK_THROWS_AS(synthesize_features(u, spk), DataError);
  u.words = std::vector<std::string>{};
  CHECK_THROWS_AS(synthesize_features(u, spk), DataError);
  CHECK_THROWS_AS(synthesize_features(text("q", "abc"), spk), DataError);
}

TEST_CASE("noise-free synthesis is a function of speaker and text") {
  const auto space = make_synth_space(std::string(Vocab::kDeskCharset), 8, 3);
  VoiceStyle style;
  style.noise_scale = 0.0;
  const auto spk = make_speaker("s", space, style, 9);
  const auto a = synthesize_features(text("one", "hello there"), spk);
  const auto b = synthesize_features(text("two", "hello there"), spk);
  CHECK(bit_identical(a, b));
  CHECK(a.dim(0) >= 11);
  CHECK(a.dim(0) <= 22);
  CHECK(a.dim(1) == 8);
}

TEST_CASE("noise depends on the utterance id") {
  const auto space = make_synth_space("ab ", 4, 3);
  const auto spk = make_speaker("s", space, VoiceStyle{}, 9);
  const auto a = synthesize_features(text("one", "ab ba"), spk);
  const auto b = synthesize_features(text("two", "ab ba"), spk);
  CHECK(a.dims() == b.dims());
  CHECK_FALSE(bit_identical(a, b));
  CHECK(bit_identical(a, synthesize_features(text("one", "ab ba"), spk)));
}

TEST_CASE("two speakers differ by exactly their offsets without spread or noise") {
  const auto space = make_synth_space(std::string(Vocab::kDeskCharset), 6, 5);
  VoiceStyle style{0.0, 0.5, 0.0, 1, 1};
  const auto s1 = make_speaker("a", space, style, 1), s2 = make_speaker("b", space, style, 2);
  double offset_gap = 0;
  for (std::size_t d = 0; d < 6; ++d) offset_gap += std::pow(s1.offset[d] - s2.offset[d], 2);
  offset_gap = std::sqrt(offset_gap);
  CHECK(offset_gap > 0);
  const auto u = text("x", "a quick test");
  const auto f1 = synthesize_features(u, s1), f2 = synthesize_features(u, s2);
  REQUIRE(f1.dims() == f2.dims());
  for (std::size_t t = 0; t < f1.dim(0); ++t) {
    double dist = 0;
    for (std::size_t d = 0; d < 6; ++d) dist += std::pow(f1.at(t, d) - f2.at(t, d), 2);
    CHECK(std::sqrt(dist) == doctest::Approx(offset_gap).epsilon(1e-5));
  }
}

TEST_CASE("speaker pools") {
  const auto space = make_synth_space(std::string(Vocab::kDeskCharset), 8, 1);
  const auto pools = make_speaker_pools(space, SpeakerPoolOptions{}, 4);
  CHECK(pools.real_train.size() == 8);
  CHECK(pools.real_test.size() == 4);
  CHECK(pools.tts.size() == 8);
  CHECK(pools.real_test.front() == "real-test-0");
  for (const auto& id : pools.real_test) {
    CHECK(std::find(pools.real_train.begin(), pools.real_train.end(), id) == pools.real_train.end());
  }
  CHECK(pools.bank.ids().size() == 20);
  CHECK(pools.bank.contains("tts-7"));
  CHECK_THROWS_AS(pools.bank.get("nobody"), DataError);
  SpeakerBank bank;
  bank.add(make_speaker("x", space, VoiceStyle{}, 1));
  CHECK_THROWS_AS(bank.add(make_speaker("x", space, VoiceStyle{}, 2)), DataError);
  CHECK_THROWS_AS(make_speaker("y", space, VoiceStyle{0.1, 0.1, 0.1, 3, 2}, 1), DataError);
}

TEST_CASE("corpus helpers") {
  const auto space = make_synth_space(std::string(Vocab::kDeskCharset), 4, 1);
  const auto pools = make_speaker_pools(space, SpeakerPoolOptions{}, 2);
  std::vector<AnnotatedUtterance> corpus{text("a", "hi"), text("b", "yo"), text("c", "ok")};
  assign_speakers(corpus, pools.tts);
  CHECK(corpus[1].speaker == "tts-1");
  synthesize_corpus(corpus, pools.bank);
  for (const auto& u : corpus) CHECK(u.features.has_value());
  CHECK_THROWS_AS(assign_speakers(corpus, {}), DataError);
}
