// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "tslu/decode.hpp"
#include "tslu/grammar.hpp"
#include "tslu/lattice.hpp"
#include "tslu/layers.hpp"
#include "tslu/network.hpp"
#include "tslu/rng.hpp"
#include "tslu/slu_format.hpp"
#include "tslu/synth.hpp"
#include "tslu/training.hpp"

namespace {

using namespace tslu;

JointLogProbs<float> random_joint(std::size_t T, std::size_t U, std::size_t V, std::uint64_t seed) {
  Rng rng(seed);
  Tensor z({T, U + 1, V});
  for (auto& v : z.values()) v = static_cast<float>(rng.normal());
  std::vector<SymbolId> target(U);
  for (auto& y : target) y = 1 + rng.index(V - 1);
  return {log_softmax(z), std::move(target)};
}

std::vector<AnnotatedUtterance> voiced_corpus(std::size_t n, const ModelConfig& c) {
  const auto space = make_synth_space(std::string(Vocab::kDeskCharset), c.feature_dim, 1);
  const auto pools = make_speaker_pools(space, {}, 2);
  auto corpus = generate_corpus(default_grammar(), n, 3, {CorpusMode::kTaskIndependent, false, pools.real_train, "b"});
  synthesize_corpus(corpus, pools.bank);
  return corpus;
}

void BM_LatticeForwardBackward(benchmark::State& state) {
  const auto T = static_cast<std::size_t>(state.range(0)), U = static_cast<std::size_t>(state.range(1));
  const auto j = random_joint(T, U, 75, 7);
  for (auto _ : state) {
    const auto lat = forward_loss(j);
    benchmark::DoNotOptimize(logit_gradients(j, lat));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(T * (U + 1)));
}
BENCHMARK(BM_LatticeForwardBackward)->Args({50, 20})->Args({100, 40})->Args({200, 80});

void BM_JointForward(benchmark::State& state) {
  const auto T = static_cast<std::size_t>(state.range(0)), U = static_cast<std::size_t>(state.range(1));
  const Model m = make_model<float>(ModelConfig{}, 1);
  Rng rng(2);
  Tensor enc({T, m.config.encoder_width()}), pred({U + 1, m.config.pred_cells});
  for (auto& v : enc.values()) v = static_cast<float>(rng.uniform(-1, 1));
  for (auto& v : pred.values()) v = static_cast<float>(rng.uniform(-1, 1));
  std::vector<SymbolId> target(U, 1);
  for (auto _ : state) benchmark::DoNotOptimize(joint(m, enc, pred, target));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(T * (U + 1)));
}
BENCHMARK(BM_JointForward)->Args({50, 20})->Args({100, 40});

void BM_UtteranceLossAndGrads(benchmark::State& state) {
  const ModelConfig config;
  const Model m = make_model<float>(config, 1);
  const auto corpus = voiced_corpus(1, config);
  const auto target = serialize(corpus[0], SerializationSetting::kTranscript, m.vocab());
  for (auto _ : state) benchmark::DoNotOptimize(utterance_loss_and_grads(m, *corpus[0].features, target));
  state.counters["frames"] = static_cast<double>(corpus[0].features->dim(0));
}
BENCHMARK(BM_UtteranceLossAndGrads);

void BM_TrainEpoch(benchmark::State& state) {
  const ModelConfig config;
  const auto corpus = voiced_corpus(static_cast<std::size_t>(state.range(0)), config);
  StageConfig stage;
  stage.batch_size = 4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_stage(make_model<float>(config, 1), stage, corpus, nullptr, {}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainEpoch)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_GreedyDecode(benchmark::State& state) {
  const ModelConfig config;
  const Model m = make_model<float>(config, 1);
  const auto corpus = voiced_corpus(1, config);
  for (auto _ : state) benchmark::DoNotOptimize(greedy_decode(m, *corpus[0].features));
}
BENCHMARK(BM_GreedyDecode);

}  // namespace

BENCHMARK_MAIN();
