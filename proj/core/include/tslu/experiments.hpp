// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tslu/metrics.hpp"
#include "tslu/network.hpp"
#include "tslu/synth.hpp"
#include "tslu/training.hpp"

namespace tslu {

// Corpus sizes, budgets and optimizer settings shared by all experiments.
struct ExperimentScale {
  std::string name = "desk";
  ModelConfig model;
  std::size_t pretrain_small = 400;   // task-independent utterances, small tier
  std::size_t pretrain_large = 1600;  // large tier; the small tier is its prefix
  std::size_t slu_train = 100;
  std::size_t slu_test = 200;
  // pretrain-vs-scratch adapts on this prefix of the SLU training set.
  std::size_t low_resource_slu_train = 30;
  std::size_t pretrain_epochs = 20;
  std::size_t asr_adapt_epochs = 10;
  std::size_t slu_epochs = 40;
  std::size_t low_resource_slu_epochs = 80;
  LrSchedule pretrain_lr{0.01, 1.0, 0};
  LrSchedule adapt_lr{0.01, 1.0, 0};
  double momentum = 0.9;
  std::size_t batch_size = 4;
  SpeakerPoolOptions speakers;

  // Every field that affects results, as text; used as a cache key.
  std::string describe() const;
};

ExperimentScale desk_scale();
// A few utterances and epochs; exercises the code paths in seconds.
ExperimentScale smoke_scale();
// Throws DataError for an unknown name.
ExperimentScale scale_by_name(const std::string& name);

struct ExperimentOptions {
  std::uint64_t seed = 1;
  std::size_t seeds = 3;
  std::size_t threads = 1;
  ExperimentScale scale = desk_scale();
  std::optional<std::filesystem::path> out_dir;    // checkpoints, reports, tables
  std::optional<std::filesystem::path> cache_dir;  // pre-trained models shared across runs
  bool timing = false;                             // wall-clock in epoch reports
  std::function<void(const std::string&)> log;
};

struct ExperimentRow {
  std::string system;
  std::size_t seed_index = 0;
  std::uint64_t seed = 0;
  std::map<std::string, double> metrics;
};

struct ExperimentResult {
  std::string name;
  std::vector<std::string> systems;  // display order
  std::vector<std::string> metrics;  // display order
  std::vector<ExperimentRow> rows;

  // Per-seed values of one metric for one system, by seed index.
  std::vector<double> values(const std::string& system, const std::string& metric) const;
  double mean(const std::string& system, const std::string& metric) const;

  std::string table() const;  // aligned text, one line per system
  std::string to_tsv() const;
  std::string to_json() const;
};

// "pretrain-vs-scratch", "spoken-vs-alpha", "ss-vs-ms", "curriculum".
const std::vector<std::string>& experiment_names();

ExperimentResult run_experiment(const std::string& name, const ExperimentOptions& options);

// Greedy-decodes every utterance and scores it against its own annotation.
ScoreReport evaluate_model(const Model& m, const std::vector<AnnotatedUtterance>& corpus,
                           std::size_t threads);

}  // namespace tslu
