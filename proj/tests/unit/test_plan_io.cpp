// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <fstream>

#include "test_util.hpp"
#include "tslu/error.hpp"
#include "tslu/plan_io.hpp"

using namespace tslu;

namespace {

const char* kPlan = R"({
  "model": {"config": {"feature_dim": 8, "enc_layers": 1, "charset": "full"}, "init_seed": 5},
  "corpora": {"gen": "data/gen.jsonl", "slu": "/abs/slu.jsonl"},
  "stages": [
    {"name": "asr-pt", "corpus": "gen", "setting": "transcript", "epochs": 3,
     "lr": {"initial": 0.02, "decay": 0.5, "interval": 2}, "batch_size": 4, "seed": 9},
    {"corpus": "slu", "heldout": "gen", "setting": "transcript-entities", "epochs": 2,
     "extend_vocab": {"symbols": "auto", "seed": 3}, "freeze": ["transcription"], "momentum": 0.5},
    {"name": "intent", "corpus": "slu", "setting": "intent-only", "epochs": 1,
     "extend_vocab": {"symbols": ["INT-FLIGHT"], "seed": 4}}
  ]
})";

}  // namespace

TEST_CASE("full plan") {
  const auto p = parse_plan(kPlan, "/base");
  CHECK_FALSE(p.init_checkpoint.has_value());
  CHECK(p.init_seed == 5);
  CHECK(p.init_config.feature_dim == 8);
  CHECK(p.init_config.enc_layers == 1);
  CHECK(p.init_config.vocab.size() == 46);
  CHECK(p.corpora.at("gen") == std::filesystem::path("/base/data/gen.jsonl"));
  CHECK(p.corpora.at("slu") == std::filesystem::path("/abs/slu.jsonl"));
  REQUIRE(p.stages.size() == 3);
  const auto& a = p.stages[0];
  CHECK(a.name == "asr-pt");
  CHECK(a.lr.initial == 0.02);
  CHECK(a.lr.decay == 0.5);
  CHECK(a.lr.interval == 2);
  CHECK(a.batch_size == 4);
  CHECK(a.seed == 9);
  const auto& b = p.stages[1];
  CHECK(b.name == "stage2");
  CHECK(b.heldout == "gen");
  CHECK(b.extend_auto);
  CHECK(b.extend_seed == 3);
  CHECK(b.freeze.prefixes == std::vector<std::string>{"transcription"});
  CHECK(b.momentum == 0.5);
  const auto& c = p.stages[2];
  REQUIRE(c.extension.has_value());
  CHECK(c.extension->new_symbols == std::vector<std::string>{"INT-FLIGHT"});
  CHECK(c.setting == SerializationSetting::kIntentOnly);
}

TEST_CASE("checkpoint start and literal charset") {
  const auto p = parse_plan(R"({"model": {"init_checkpoint": "m.ckpt"}, "corpora": {"a": "a.jsonl"}, "stages": [{"corpus": "a", "setting": "transcript", "epochs": 1}]})", "dir");
  CHECK(p.init_checkpoint == std::filesystem::path("dir/m.ckpt"));
  CHECK(parse_model_config(R"({"charset": "xyz "})").vocab.size() == 5);
}

TEST_CASE("bad plans") {
  CHECK_THROWS_AS(parse_plan("[]", "."), DataError);
  CHECK_THROWS_AS(parse_plan(R"({"model": {}, "corpora": {}, "stages": []})", "."), DataError);
  CHECK_THROWS_AS(parse_plan("{", "."), DataError);
  CHECK_THROWS_AS(parse_plan(R"({"model": {}, "corpora": {}, "stages": [{"corpus": "x", "epochs": 1}]})", "."),
                  DataError);
  CHECK_THROWS_AS(
      parse_plan(R"({"model": {}, "corpora": {}, "stages": [{"corpus": "x", "setting": "nope", "epochs": 1}]})", "."),
      DataError);
  CHECK_THROWS_AS(parse_plan(R"({"model": {}, "corpora": {}, "stages": [{"corpus": "x", "setting": "transcript",
      "epochs": 1, "extend_vocab": {"symbols": "some"}}]})", "."), DataError);
  CHECK_THROWS_AS(parse_model_config(R"({"joint_dim": 0})"), DataError);
  CHECK_THROWS_AS(load_plan("/nonexistent/plan.json"), DataError);
}

TEST_CASE("load_plan resolves against the plan's directory") {
  test::TempDir dir("planio");
  std::ofstream(dir / "p.json") << R"({"model": {}, "corpora": {"a": "a.jsonl"}, "stages": [{"corpus": "a", "setting": "transcript", "epochs": 1}]})";
  const auto p = load_plan(dir / "p.json");
  CHECK(p.corpora.at("a") == dir / "a.jsonl");
}
