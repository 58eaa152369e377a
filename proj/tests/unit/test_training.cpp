// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <limits>

#include "test_util.hpp"
#include "train_fixture.hpp"
#include "tslu/checkpoint.hpp"
#include "tslu/error.hpp"
#include "tslu/training.hpp"

using namespace tslu;
using test::small_config;
using test::small_corpus;

TEST_CASE("learning-rate schedule") {
  CHECK(LrSchedule{0.1, 0.5, 0}.at(7) == 0.1);
  CHECK(LrSchedule{0.1, 0.5, 2}.at(0) == 0.1);
  CHECK(LrSchedule{0.1, 0.5, 2}.at(3) == doctest::Approx(0.05));
  CHECK(LrSchedule{0.1, 0.5, 2}.at(4) == doctest::Approx(0.025));
}

TEST_CASE("sgd step") {
  auto m = make_model<float>(small_config(), 1);
  auto grads = zero_grads(m);
  MomentumState state;
  SUBCASE("zero gradients leave the model alone") {
    const auto before = m;
    sgd_step(m, grads, 0.1, 0.0, {}, state);
    for (const auto& [name, t] : before.params) CHECK(bit_identical(t, m.param(name)));
  }
  SUBCASE("scalar arithmetic") {
    m.param("joint.bias")[0] = 1.0f;
    grads.at("joint.bias")[0] = 0.5f;
    const auto counts = sgd_step(m, grads, 0.1, 0.0, {}, state);
    CHECK(m.param("joint.bias")[0] == doctest::Approx(0.95f));
    CHECK(counts.at("joint") == 5);
  }
  SUBCASE("momentum accumulates") {
    m.param("joint.bias")[0] = 1.0f;
    grads.at("joint.bias")[0] = 1.0f;
    sgd_step(m, grads, 0.1, 0.5, {}, state);
    sgd_step(m, grads, 0.1, 0.5, {}, state);
    CHECK(m.param("joint.bias")[0] == doctest::Approx(1.0f - 0.1f - 0.15f));
  }
  SUBCASE("masked tensors never move") {
    for (auto& [name, g] : grads) g.fill(1.0f);
    const auto before = m;
    const FreezeMask mask{{"transcription"}};
    const auto counts = sgd_step(m, grads, 0.1, 0.9, mask, state);
    CHECK(counts.at("transcription") == 0);
    for (const auto& [name, t] : before.params) {
      if (name.rfind("transcription", 0) == 0) {
        CHECK(bit_identical(t, m.param(name)));
      } else {
        CHECK_FALSE(bit_identical(t, m.param(name)));
      }
    }
  }
  SUBCASE("missing gradient") {
    grads.erase("joint.bias");
    CHECK_THROWS_AS(sgd_step(m, grads, 0.1, 0.0, {}, state), ShapeError);
  }
}

TEST_CASE("freeze mask validation") {
  const auto m = make_model<float>(small_config(), 1);
  FreezeMask{{"prediction", "joint.output"}}.validate(m);
  CHECK_THROWS_AS(FreezeMask{{"decoder"}}.validate(m), DataError);
  CHECK(FreezeMask{{"joint"}}.frozen("joint.bias"));
  CHECK_FALSE(FreezeMask{{"joint"}}.frozen("prediction.embedding"));
}

TEST_CASE("missing symbols") {
  const auto corpus = small_corpus(10, 1);
  const auto v = Vocab::from_characters(Vocab::kDeskCharset);
  CHECK(missing_symbols(corpus, SerializationSetting::kTranscript, v).empty());
  const auto need = missing_symbols(corpus, SerializationSetting::kTranscriptIntent, v);
  CHECK_FALSE(need.empty());
  CHECK(std::is_sorted(need.begin(), need.end()));
  for (const auto& s : need) CHECK(classify_symbol(s) == SymbolKind::kIntent);
}

TEST_CASE("zero epochs only extends the vocabulary") {
  const auto m = make_model<float>(small_config(), 2);
  StageConfig st;
  st.setting = SerializationSetting::kTranscriptIntent;
  st.extend_auto = true;
  st.epochs = 0;
  const auto r = run_stage(m, st, small_corpus(6, 2), nullptr, {});
  CHECK(r.report.epochs.empty());
  CHECK(m.vocab().is_prefix_of(r.model.vocab()));
  CHECK(r.model.vocab().size() > m.vocab().size());
  CHECK(bit_identical(m.param("prediction.lstm.bias"), r.model.param("prediction.lstm.bias")));
}

TEST_CASE("training lowers the loss") {
  const auto corpus = small_corpus(8, 3);
  StageConfig st;
  st.setting = SerializationSetting::kTranscript;
  st.epochs = 6;
  st.lr = {0.01, 1, 0};
  st.batch_size = 2;
  st.seed = 4;
  const auto r = run_stage(make_model<float>(small_config(), 3), st, corpus, &corpus, {});
  REQUIRE(r.report.epochs.size() == 6);
  CHECK(r.report.epochs.back().train_loss < r.report.epochs.front().train_loss);
  CHECK(r.report.epochs.back().heldout_loss.has_value());
  CHECK(r.report.epochs[0].updates.at("transcription") == 4 * 6);
}

TEST_CASE("a frozen transcription network stays bit-identical") {
  const auto m = make_model<float>(small_config(), 5);
  StageConfig st;
  st.setting = SerializationSetting::kTranscriptIntent;
  st.extend_auto = true;
  st.freeze.prefixes = {"transcription"};
  st.epochs = 3;
  st.lr = {0.02, 1, 0};
  st.batch_size = 2;
  const auto r = run_stage(m, st, small_corpus(6, 5), nullptr, {});
  for (const auto& [name, t] : m.params) {
    if (name.rfind("transcription", 0) == 0) CHECK(bit_identical(t, r.model.param(name)));
  }
  CHECK(r.report.epochs.back().updates.at("transcription") == 0);
  CHECK(r.report.epochs.back().checksums.at("transcription") == subnetwork_checksum(m, "transcription"));
  CHECK(r.report.epochs.back().checksums.at("joint") != subnetwork_checksum(m, "joint"));
}

TEST_CASE("results do not depend on the thread count") {
  const auto corpus = small_corpus(9, 6);
  StageConfig st;
  st.setting = SerializationSetting::kTranscriptEntities;
  st.extend_auto = true;
  st.epochs = 2;
  st.batch_size = 4;
  st.seed = 1;
  const auto m = make_model<float>(small_config(), 6);
  const auto a = run_stage(m, st, corpus, nullptr, {1, {}});
  const auto b = run_stage(m, st, corpus, nullptr, {3, {}});
  CHECK(checkpoint_to_string(a.model, {}) == checkpoint_to_string(b.model, {}));
  CHECK(a.report.to_jsonl() == b.report.to_jsonl());
  CHECK(a.report.to_jsonl().find("seconds") == std::string::npos);
  CHECK(a.report.to_jsonl(true).find("seconds") != std::string::npos);
}

TEST_CASE("divergence names the stage and utterance") {
  auto m = make_model<float>(small_config(), 7);
  m.param("joint.output.bias")[0] = std::numeric_limits<float>::quiet_NaN();
  StageConfig st;
  st.name = "boom";
  st.epochs = 1;
  const auto corpus = small_corpus(3, 7);
  CHECK_THROWS_WITH_AS(run_stage(m, st, corpus, nullptr, {}), doctest::Contains("boom"), DivergenceError);
}

TEST_CASE("corpus that needs unknown symbols without extension") {
  StageConfig st;
  st.setting = SerializationSetting::kIntentOnly;
  st.epochs = 1;
  CHECK_THROWS_AS(run_stage(make_model<float>(small_config(), 1), st, small_corpus(2, 1), nullptr, {}), DataError);
}

TEST_CASE("plans") {
  test::TempDir dir("plan");
  const auto corpus = small_corpus(6, 8);
  const CorpusSet corpora{{"slu", corpus}};
  AdaptationPlan plan;
  plan.corpora["slu"] = dir / "slu.jsonl";
  StageConfig asr;
  asr.name = "asr";
  asr.corpus = "slu";
  asr.epochs = 1;
  asr.batch_size = 3;
  asr.seed = 1;
  StageConfig slu = asr;
  slu.name = "slu";
  slu.setting = SerializationSetting::kTranscriptEntities;
  slu.extend_auto = true;
  slu.extend_seed = 2;
  slu.seed = 2;
  const auto m = make_model<float>(small_config(), 8);

  SUBCASE("one stage equals run_stage") {
    plan.stages = {asr};
    const auto p = run_plan(m, {"init", 8, ""}, plan, corpora, std::nullopt, {});
    const auto s = run_stage(m, asr, corpus, nullptr, {});
    CHECK(checkpoint_to_string(p.model, {}) == checkpoint_to_string(s.model, {}));
  }
  SUBCASE("two stages write two chained checkpoints") {
    plan.stages = {asr, slu};
    const auto p = run_plan(m, {"init", 8, ""}, plan, corpora, dir.path() / "out", {});
    REQUIRE(p.checkpoints.size() == 2);
    CHECK(p.checkpoints[0].filename() == "01-asr.ckpt");
    CHECK(std::filesystem::exists(dir.path() / "out" / "02-slu.jsonl"));
    const auto second = load_checkpoint(p.checkpoints[1]);
    CHECK(second.provenance.stage == "slu");
    CHECK(second.provenance.parent_hash == p.hashes[0]);
    CHECK(p.hashes[1] == file_hash(p.checkpoints[1]));
    const auto again = run_plan(m, {"init", 8, ""}, plan, corpora, dir.path() / "again", {});
    CHECK(again.hashes == p.hashes);
  }
  SUBCASE("validation") {
    StageConfig bad = asr;
    bad.corpus = "nope";
    plan.stages = {bad};
    CHECK_THROWS_AS(validate_plan(plan), DataError);
    StageConfig e1 = asr, e2 = asr;
    e1.extension = VocabExtension{{"INT-A"}, 1};
    e2.extension = VocabExtension{{"INT-A"}, 2};
    plan.stages = {e1, e2};
    CHECK_THROWS_AS(validate_plan(plan), DataError);
  }
}
