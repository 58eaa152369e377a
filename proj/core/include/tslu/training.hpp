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

#include "tslu/checkpoint.hpp"
#include "tslu/network.hpp"
#include "tslu/slu_format.hpp"
#include "tslu/surgery.hpp"
#include "tslu/utterance.hpp"

namespace tslu {

// Parameters whose names start with any prefix are never updated.
struct FreezeMask {
  std::vector<std::string> prefixes;

  bool frozen(const std::string& name) const;
  // Throws DataError for a prefix that matches no parameter.
  void validate(const Model& m) const;
};

// lr(epoch) = initial * decay^(epoch / interval); interval 0 keeps it constant.
struct LrSchedule {
  double initial = 0.05;
  double decay = 1.0;
  std::size_t interval = 0;

  double at(std::size_t epoch) const;
};

struct MomentumState {
  ParamTree<float> velocity;
};

// v <- mu v + g; w <- w - lr v, for unmasked parameters only. Returns the
// number of tensors updated per sub-network. Throws ShapeError when a
// gradient is missing or has the wrong shape.
std::map<std::string, std::size_t> sgd_step(Model& m, const ParamTree<float>& grads, double lr,
                                            double momentum, const FreezeMask& mask,
                                            MomentumState& state);

struct StageConfig {
  std::string name = "stage";
  std::string corpus;   // corpus key in a plan
  std::string heldout;  // optional held-out corpus key
  SerializationSetting setting = SerializationSetting::kTranscript;
  std::optional<VocabExtension> extension;  // applied before the first epoch
  // Instead of a fixed list: add whatever label symbols the corpus needs.
  bool extend_auto = false;
  std::uint64_t extend_seed = 0;
  FreezeMask freeze;
  std::size_t epochs = 1;
  LrSchedule lr;
  double momentum = 0.9;
  std::size_t batch_size = 8;
  std::uint64_t seed = 0;
};

struct EpochReport {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean per utterance
  std::optional<double> heldout_loss;
  double learning_rate = 0.0;
  double seconds = 0.0;
  std::map<std::string, std::size_t> updates;      // tensor updates per sub-network
  std::map<std::string, std::string> checksums;    // per sub-network, after the epoch
};

struct TrainReport {
  std::string stage;
  std::vector<EpochReport> epochs;

  // One JSON object per epoch. Wall-clock is only written when asked for, so
  // reports of identical runs compare byte for byte.
  std::string to_jsonl(bool with_timing = false) const;
};

struct TrainOptions {
  std::size_t threads = 1;
  // Called after every epoch with the current model; observation only.
  std::function<void(const Model&, const EpochReport&)> on_epoch;
};

// Hex digest over the bytes of every parameter in one sub-network.
std::string subnetwork_checksum(const Model& m, std::string_view subnetwork);

// Label symbols the corpus needs under `setting` that `vocab` lacks, sorted.
std::vector<std::string> missing_symbols(const std::vector<AnnotatedUtterance>& corpus,
                                         SerializationSetting setting, const Vocab& vocab);

// Mean loss over a corpus; utterances in fixed order.
double corpus_loss(const Model& m, const std::vector<AnnotatedUtterance>& corpus,
                   SerializationSetting setting, std::size_t threads);

struct StageResult {
  Model model;
  TrainReport report;
};

// Extends the vocabulary if asked, then runs the epochs: a seeded shuffle per
// epoch, gradients averaged over each mini-batch, one sgd_step per batch.
// Deterministic for any thread count. Throws DivergenceError naming the
// utterance and epoch on a non-finite loss.
StageResult run_stage(Model m, const StageConfig& stage, const std::vector<AnnotatedUtterance>& corpus,
                      const std::vector<AnnotatedUtterance>* heldout, const TrainOptions& options);

struct AdaptationPlan {
  std::optional<std::filesystem::path> init_checkpoint;
  ModelConfig init_config;  // used when no checkpoint is given
  std::uint64_t init_seed = 0;
  std::map<std::string, std::filesystem::path> corpora;
  std::vector<StageConfig> stages;
};

struct PlanResult {
  Model model;
  std::vector<TrainReport> reports;
  std::vector<std::filesystem::path> checkpoints;
  std::vector<std::string> hashes;
};

using CorpusSet = std::map<std::string, std::vector<AnnotatedUtterance>>;

// Throws DataError when a stage names an undefined corpus or two stages add
// the same symbol.
void validate_plan(const AdaptationPlan& plan);

// Threads the model through the stages, writing "<NN>-<stage>.ckpt" and
// "<NN>-<stage>.jsonl" into `out_dir` after each one when it is set.
// A failing stage leaves earlier checkpoints on disk.
PlanResult run_plan(Model initial, const Provenance& initial_provenance, const AdaptationPlan& plan,
                    const CorpusSet& corpora, const std::optional<std::filesystem::path>& out_dir,
                    const TrainOptions& options, bool with_timing = false);

}  // namespace tslu
