// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include "tslu/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "tslu/error.hpp"
#include "tslu/parallel.hpp"
#include "tslu/rng.hpp"

namespace tslu {

bool FreezeMask::frozen(const std::string& name) const {
  for (const auto& p : prefixes) {
    if (name.compare(0, p.size(), p) == 0) return true;
  }
  return false;
}

void FreezeMask::validate(const Model& m) const {
  for (const auto& p : prefixes) {
    bool hit = false;
    for (const auto& [name, t] : m.params) hit = hit || name.compare(0, p.size(), p) == 0;
    if (p.empty() || !hit) throw DataError("freeze prefix '" + p + "' matches no parameter");
  }
}

double LrSchedule::at(std::size_t epoch) const {
  if (interval == 0) return initial;
  return initial * std::pow(decay, static_cast<double>(epoch / interval));
}

std::map<std::string, std::size_t> sgd_step(Model& m, const ParamTree<float>& grads, double lr,
                                            double momentum, const FreezeMask& mask,
                                            MomentumState& state) {
  std::map<std::string, std::size_t> updates;
  for (auto& [name, w] : m.params) {
    updates.try_emplace(std::string(subnetwork_of(name)), 0);
    if (mask.frozen(name)) continue;
    auto git = grads.find(name);
    if (git == grads.end()) throw ShapeError("no gradient for parameter " + name);
    const Tensor& g = git->second;
    w.require_same_shape(g, name.c_str());
    auto [vit, fresh] = state.velocity.try_emplace(name, w.dims());
    Tensor& v = vit->second;
    if (!fresh && v.dims() != w.dims()) v = Tensor(w.dims());
    const float mu = static_cast<float>(momentum), rate = static_cast<float>(lr);
    for (std::size_t i = 0; i < w.size(); ++i) {
      v[i] = mu * v[i] + g[i];
      w[i] -= rate * v[i];
    }
    ++updates[std::string(subnetwork_of(name))];
  }
  return updates;
}

std::string TrainReport::to_jsonl(bool with_timing) const {
  std::string out;
  for (const auto& e : epochs) {
    nlohmann::ordered_json j;
    j["stage"] = stage;
    j["epoch"] = e.epoch;
    j["train_loss"] = e.train_loss;
    if (e.heldout_loss) j["heldout_loss"] = *e.heldout_loss;
    j["learning_rate"] = e.learning_rate;
    if (with_timing) j["seconds"] = e.seconds;
    j["updates"] = e.updates;
    j["checksums"] = e.checksums;
    out += j.dump() + "\n";
  }
  return out;
}

std::string subnetwork_checksum(const Model& m, std::string_view subnetwork) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [name, t] : m.params) {
    if (subnetwork_of(name) != subnetwork) continue;
    h = fnv1a64(name, h);
    h = fnv1a64(std::string_view(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(float)), h);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> missing_symbols(const std::vector<AnnotatedUtterance>& corpus,
                                         SerializationSetting setting, const Vocab& vocab) {
  std::set<std::string> missing;
  for (const auto& u : corpus) {
    for (const auto& s : serialize_symbols(u, setting)) {
      if (!vocab.contains(s)) missing.insert(s);
    }
  }
  return {missing.begin(), missing.end()};
}

namespace {

const Tensor& features_of(const AnnotatedUtterance& u) {
  if (!u.features) throw DataError("utterance '" + u.id + "' has no features");
  return *u.features;
}

std::vector<std::vector<SymbolId>> serialize_all(const std::vector<AnnotatedUtterance>& corpus,
                                                 SerializationSetting setting, const Vocab& vocab) {
  std::vector<std::vector<SymbolId>> targets;
  targets.reserve(corpus.size());
  for (const auto& u : corpus) {
    features_of(u);
    targets.push_back(serialize(u, setting, vocab));
  }
  return targets;
}

void add_scaled(ParamTree<float>& acc, const ParamTree<float>& g) {
  for (auto& [name, t] : acc) t += g.at(name);
}

std::uint64_t tensor_digest(const Tensor& t) {
  return fnv1a64(std::string_view(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(float)));
}

}  // namespace

double corpus_loss(const Model& m, const std::vector<AnnotatedUtterance>& corpus,
                   SerializationSetting setting, std::size_t threads) {
  if (corpus.empty()) throw DataError("loss over an empty corpus");
  const auto targets = serialize_all(corpus, setting, m.vocab());
  std::vector<double> losses(corpus.size());
  parallel_for(corpus.size(), threads, [&](std::size_t i) {
    losses[i] = utterance_loss(m, *corpus[i].features, std::span<const SymbolId>(targets[i]));
  });
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(corpus.size());
}

StageResult run_stage(Model m, const StageConfig& stage, const std::vector<AnnotatedUtterance>& corpus,
                      const std::vector<AnnotatedUtterance>* heldout, const TrainOptions& options) {
  if (stage.batch_size == 0) throw DataError("stage '" + stage.name + "': batch size must be positive");
  if (stage.epochs > 0 && corpus.empty()) throw DataError("stage '" + stage.name + "': empty corpus");
  if (stage.extension) m = extend_vocab(m, *stage.extension);
  if (stage.extend_auto) {
    m = extend_vocab(m, VocabExtension{missing_symbols(corpus, stage.setting, m.vocab()), stage.extend_seed});
  }
  stage.freeze.validate(m);

  const auto targets = serialize_all(corpus, stage.setting, m.vocab());
  std::map<std::string, std::uint64_t> frozen_digest;
  for (const auto& [name, t] : m.params) {
    if (stage.freeze.frozen(name)) frozen_digest[name] = tensor_digest(t);
  }

  StageResult result{std::move(m), TrainReport{stage.name, {}}};
  Model& model = result.model;
  MomentumState momentum;
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < stage.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(mix_seed(stage.seed, epoch));
    rng.shuffle(std::span<std::size_t>(order));
    const double lr = stage.lr.at(epoch);

    EpochReport report;
    report.epoch = epoch;
    report.learning_rate = lr;
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += stage.batch_size) {
      const std::size_t n = std::min(stage.batch_size, order.size() - begin);
      std::vector<LossAndGrads<float>> parts(n);
      parallel_for(n, options.threads, [&](std::size_t k) {
        const std::size_t i = order[begin + k];
        try {
          parts[k] = utterance_loss_and_grads(model, *corpus[i].features,
                                              std::span<const SymbolId>(targets[i]));
        } catch (const NumericError& e) {
          throw DivergenceError("stage '" + stage.name + "' epoch " + std::to_string(epoch) +
                                ": utterance '" + corpus[i].id + "': " + e.what());
        }
      });
      ParamTree<float> grads = zero_grads(model);
      for (std::size_t k = 0; k < n; ++k) {
        if (!std::isfinite(parts[k].loss)) {
          throw DivergenceError("stage '" + stage.name + "' epoch " + std::to_string(epoch) +
                                ": non-finite loss on utterance '" + corpus[order[begin + k]].id + "'");
        }
        loss_sum += parts[k].loss;
        add_scaled(grads, parts[k].grads);
      }
      const float scale = 1.0f / static_cast<float>(n);
      for (auto& [name, g] : grads) g *= scale;
      for (const auto& [sub, count] : sgd_step(model, grads, lr, stage.momentum, stage.freeze, momentum)) {
        report.updates[sub] += count;
      }
    }
    report.train_loss = loss_sum / static_cast<double>(corpus.size());
    if (heldout && !heldout->empty()) {
      report.heldout_loss = corpus_loss(model, *heldout, stage.setting, options.threads);
    }
    for (const auto& [name, digest] : frozen_digest) {
      if (tensor_digest(model.param(name)) != digest) {
        throw VerificationError("frozen parameter " + name + " changed in epoch " + std::to_string(epoch));
      }
    }
    for (auto sub : {kTranscriptionPrefix, kPredictionPrefix, kJointPrefix}) {
      report.checksums[std::string(sub)] = subnetwork_checksum(model, sub);
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (options.on_epoch) options.on_epoch(model, report);
    result.report.epochs.push_back(std::move(report));
  }
  return result;
}

void validate_plan(const AdaptationPlan& plan) {
  if (plan.stages.empty()) throw DataError("plan has no stages");
  std::set<std::string> added;
  for (const auto& s : plan.stages) {
    if (!plan.corpora.count(s.corpus)) {
      throw DataError("stage '" + s.name + "' references undefined corpus '" + s.corpus + "'");
    }
    if (!s.heldout.empty() && !plan.corpora.count(s.heldout)) {
      throw DataError("stage '" + s.name + "' references undefined corpus '" + s.heldout + "'");
    }
    if (!s.extension) continue;
    for (const auto& sym : s.extension->new_symbols) {
      if (!added.insert(sym).second) {
        throw DataError("symbol '" + sym + "' is added by more than one stage");
      }
    }
  }
}

PlanResult run_plan(Model initial, const Provenance& initial_provenance, const AdaptationPlan& plan,
                    const CorpusSet& corpora, const std::optional<std::filesystem::path>& out_dir,
                    const TrainOptions& options, bool with_timing) {
  validate_plan(plan);
  PlanResult result{std::move(initial), {}, {}, {}};
  std::string parent = content_hash(checkpoint_to_string(result.model, initial_provenance));
  if (out_dir) std::filesystem::create_directories(*out_dir);
  for (std::size_t k = 0; k < plan.stages.size(); ++k) {
    const auto& stage = plan.stages[k];
    auto find = [&](const std::string& key) -> const std::vector<AnnotatedUtterance>& {
      auto it = corpora.find(key);
      if (it == corpora.end()) throw DataError("corpus '" + key + "' was not loaded");
      return it->second;
    };
    const auto& corpus = find(stage.corpus);
    const std::vector<AnnotatedUtterance>* heldout = stage.heldout.empty() ? nullptr : &find(stage.heldout);
    auto stage_result = run_stage(std::move(result.model), stage, corpus, heldout, options);
    result.model = std::move(stage_result.model);

    const Provenance prov{stage.name, stage.seed, parent};
    const std::string text = checkpoint_to_string(result.model, prov);
    parent = content_hash(text);
    if (out_dir) {
      char prefix[8];
      std::snprintf(prefix, sizeof prefix, "%02zu-", k + 1);
      const auto ckpt = *out_dir / (prefix + stage.name + ".ckpt");
      std::ofstream(ckpt, std::ios::binary) << text;
      std::ofstream(*out_dir / (prefix + stage.name + ".jsonl"), std::ios::binary)
          << stage_result.report.to_jsonl(with_timing);
      result.checkpoints.push_back(ckpt);
    }
    result.hashes.push_back(parent);
    result.reports.push_back(std::move(stage_result.report));
  }
  return result;
}

}  // namespace tslu
