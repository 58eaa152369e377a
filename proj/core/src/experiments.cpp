// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include "tslu/experiments.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "tslu/checkpoint.hpp"
#include "tslu/corpus_io.hpp"
#include "tslu/decode.hpp"
#include "tslu/error.hpp"
#include "tslu/grammar.hpp"
#include "tslu/rng.hpp"

namespace tslu {

namespace {

std::string style_text(const VoiceStyle& s) {
  std::ostringstream os;
  os << std::setprecision(17) << s.spread << ',' << s.offset_scale << ',' << s.noise_scale << ','
     << s.min_frames << ',' << s.max_frames;
  return os.str();
}

std::string lr_text(const LrSchedule& lr) {
  std::ostringstream os;
  os << std::setprecision(17) << lr.initial << ',' << lr.decay << ',' << lr.interval;
  return os.str();
}

// Changes whenever the generator's vocabulary or templates change.
std::uint64_t grammar_fingerprint(const GrammarConfig& g) {
  std::string text;
  for (const auto& [name, values] : g.lexicons) {
    text += name + '=';
    for (const auto& v : values) text += v + '|';
  }
  for (const auto& s : g.slots) text += s.label + ':' + s.lexicon + ';';
  for (const auto& t : g.templates) text += t.pattern + '>' + t.intent + ';';
  for (const auto& w : g.general_words) text += w + ' ';
  text += std::to_string(g.general_min_words) + '-' + std::to_string(g.general_max_words);
  for (const auto& [word, tag] : g.pos_lexicon) text += word + '/' + tag + ' ';
  for (const auto& [lex, tag] : g.lexicon_pos) text += lex + '/' + tag + ' ';
  return fnv1a64(text + g.default_pos);
}

}  // namespace

std::string ExperimentScale::describe() const {
  std::ostringstream os;
  os << std::setprecision(17) << "model=" << config_to_json(model) << ";pt=" << pretrain_small << ','
     << pretrain_large << ";slu=" << slu_train << ',' << slu_test << ',' << low_resource_slu_train
     << ";epochs=" << pretrain_epochs << ',' << asr_adapt_epochs << ',' << slu_epochs << ','
     << low_resource_slu_epochs << ";lr=" << lr_text(pretrain_lr) << '/' << lr_text(adapt_lr)
     << ";mom=" << momentum << ";batch=" << batch_size << ";spk=" << speakers.real_train << ','
     << speakers.real_test << ',' << speakers.tts << ',' << style_text(speakers.real_style) << '/'
     << style_text(speakers.tts_style) << ',' << speakers.tts_shift_scale << ";grammar=" << std::hex
     << grammar_fingerprint(default_grammar());
  return os.str();
}

ExperimentScale desk_scale() { return ExperimentScale{}; }

ExperimentScale smoke_scale() {
  ExperimentScale s;
  s.name = "smoke";
  s.pretrain_small = 6;
  s.pretrain_large = 12;
  s.slu_train = 6;
  s.slu_test = 4;
  s.low_resource_slu_train = 4;
  s.pretrain_epochs = 2;
  s.asr_adapt_epochs = 1;
  s.slu_epochs = 2;
  s.low_resource_slu_epochs = 2;
  return s;
}

ExperimentScale scale_by_name(const std::string& name) {
  if (name == "desk") return desk_scale();
  if (name == "smoke") return smoke_scale();
  throw DataError("unknown experiment scale '" + name + "' (expected desk or smoke)");
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"pretrain-vs-scratch", "spoken-vs-alpha", "ss-vs-ms",
                                                 "curriculum"};
  return names;
}

ScoreReport evaluate_model(const Model& m, const std::vector<AnnotatedUtterance>& corpus,
                           std::size_t threads) {
  std::vector<const Tensor*> feats;
  for (const auto& u : corpus) {
    if (!u.features) throw DataError("utterance '" + u.id + "' has no features");
    feats.push_back(&*u.features);
  }
  const auto hyps = decode_all(m, feats, threads);
  std::vector<ScoredHypothesis> scored;
  for (std::size_t i = 0; i < corpus.size(); ++i) scored.push_back({corpus[i].id, hyps[i].symbols});
  return score_corpus(scored, corpus, m.vocab());
}

std::vector<double> ExperimentResult::values(const std::string& system, const std::string& metric) const {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (r.system != system) continue;
    auto it = r.metrics.find(metric);
    if (it != r.metrics.end()) out.push_back(it->second);
  }
  return out;
}

double ExperimentResult::mean(const std::string& system, const std::string& metric) const {
  const auto v = values(system, metric);
  if (v.empty()) throw DataError("no " + metric + " values for system " + system);
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string ExperimentResult::table() const {
  std::size_t seeds = 0;
  for (const auto& r : rows) seeds = std::max(seeds, r.seed_index + 1);
  std::size_t width = 6;
  for (const auto& s : systems) width = std::max(width, s.size());
  std::ostringstream os;
  os << "experiment " << name << '\n';
  for (const auto& metric : metrics) {
    os << std::left << std::setw(static_cast<int>(width)) << metric;
    for (std::size_t k = 0; k < seeds; ++k) os << std::right << std::setw(9) << ("seed" + std::to_string(k));
    os << std::setw(9) << "mean" << '\n';
    for (const auto& s : systems) {
      const auto v = values(s, metric);
      if (v.empty()) continue;
      os << std::left << std::setw(static_cast<int>(width)) << s << std::right << std::fixed
         << std::setprecision(2);
      for (double x : v) os << std::setw(9) << x;
      os << std::setw(9) << mean(s, metric) << '\n';
    }
  }
  return os.str();
}

std::string ExperimentResult::to_tsv() const {
  std::ostringstream os;
  os << "system\tseed_index\tseed\tmetric\tvalue\n";
  for (const auto& r : rows) {
    for (const auto& [metric, v] : r.metrics) {
      os << r.system << '\t' << r.seed_index << '\t' << r.seed << '\t' << metric << '\t'
         << std::setprecision(17) << v << '\n';
    }
  }
  return os.str();
}

std::string ExperimentResult::to_json() const {
  nlohmann::ordered_json j;
  j["experiment"] = name;
  j["systems"] = systems;
  j["metrics"] = metrics;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    list.push_back({{"system", r.system}, {"seed_index", r.seed_index}, {"seed", r.seed}, {"metrics", r.metrics}});
  }
  j["rows"] = std::move(list);
  return j.dump(2) + "\n";
}

namespace {

struct World {
  std::uint64_t seed = 0;
  SpeakerPools pools;
  std::vector<AnnotatedUtterance> pretrain;  // large tier, with POS tags
  std::vector<AnnotatedUtterance> slu_train, slu_test;
};

World make_world(const ExperimentScale& scale, std::uint64_t seed) {
  World w;
  w.seed = seed;
  const auto space = make_synth_space(std::string(Vocab::kDeskCharset), scale.model.feature_dim, mix_seed(seed, 1));
  w.pools = make_speaker_pools(space, scale.speakers, mix_seed(seed, 2));
  const auto grammar = default_grammar();

  CorpusOptions pt{CorpusMode::kTaskIndependent, true, w.pools.real_train, "gen"};
  w.pretrain = generate_corpus(grammar, scale.pretrain_large, mix_seed(seed, 3), pt);
  CorpusOptions train{CorpusMode::kSlu, false, w.pools.real_train, "train"};
  w.slu_train = generate_corpus(grammar, scale.slu_train, mix_seed(seed, 4), train);
  CorpusOptions test{CorpusMode::kSlu, false, w.pools.real_test, "test"};
  w.slu_test = generate_corpus(grammar, scale.slu_test, mix_seed(seed, 5), test);
  synthesize_corpus(w.pretrain, w.pools.bank);
  synthesize_corpus(w.slu_train, w.pools.bank);
  synthesize_corpus(w.slu_test, w.pools.bank);
  return w;
}

std::vector<AnnotatedUtterance> revoice(std::vector<AnnotatedUtterance> corpus,
                                        const std::vector<std::string>& speakers, const SpeakerBank& bank) {
  assign_speakers(corpus, speakers);
  synthesize_corpus(corpus, bank);
  return corpus;
}

class Runner {
 public:
  Runner(std::string name, const ExperimentOptions& options) : options_(options) {
    result_.name = std::move(name);
    if (options_.seeds == 0) throw DataError("experiment needs at least one seed");
    if (options_.out_dir) std::filesystem::create_directories(*options_.out_dir);
    if (options_.cache_dir) std::filesystem::create_directories(*options_.cache_dir);
  }

  ExperimentResult& result() { return result_; }
  const ExperimentScale& scale() const { return options_.scale; }

  std::uint64_t seed_for(std::size_t k) const { return mix_seed(options_.seed, k); }

  void log(const std::string& msg) const {
    if (options_.log) options_.log(result_.name + ": " + msg);
  }

  Model init_model(const World& w) const { return make_model<float>(scale().model, mix_seed(w.seed, 6)); }

  // Task-independent pre-training on the first `size` utterances.
  Model pretrained(const World& w, const std::string& tier) {
    const std::size_t size = tier == "small" ? scale().pretrain_small : scale().pretrain_large;
    std::optional<std::filesystem::path> cached;
    if (options_.cache_dir) {
      char key[17];
      std::snprintf(key, sizeof key, "%016llx",
                    static_cast<unsigned long long>(fnv1a64(scale().describe() + ";tier=" + tier + ";seed=" +
                                                            std::to_string(w.seed))));
      cached = *options_.cache_dir / ("pt-" + tier + "-" + key + ".ckpt");
      if (std::filesystem::exists(*cached)) {
        log("reusing pre-trained " + tier + " model " + cached->filename().string());
        return load_checkpoint(*cached).model;
      }
    }
    std::vector<AnnotatedUtterance> corpus(w.pretrain.begin(),
                                           w.pretrain.begin() + static_cast<std::ptrdiff_t>(size));
    StageConfig stage;
    stage.name = "asr-pt-" + tier;
    stage.setting = SerializationSetting::kTranscript;
    stage.epochs = scale().pretrain_epochs;
    stage.lr = scale().pretrain_lr;
    stage.momentum = scale().momentum;
    stage.batch_size = scale().batch_size;
    stage.seed = mix_seed(w.seed, 8);
    log("pre-training " + tier + " tier (" + std::to_string(size) + " utterances)");
    auto model = run_stage(init_model(w), stage, corpus, nullptr, train_options()).model;
    if (cached) save_checkpoint(*cached, model, {stage.name, stage.seed, ""});
    return model;
  }

  Model adapt(Model m, std::size_t seed_index, const World& w, const std::string& system,
              const std::vector<AnnotatedUtterance>& corpus, SerializationSetting setting,
              std::vector<std::string> freeze, std::size_t epochs, std::uint64_t stream) {
    StageConfig stage;
    stage.name = system;
    stage.setting = setting;
    stage.extend_auto = true;
    stage.extend_seed = mix_seed(w.seed, 100 + stream);
    stage.freeze.prefixes = std::move(freeze);
    stage.epochs = epochs;
    stage.lr = scale().adapt_lr;
    stage.momentum = scale().momentum;
    stage.batch_size = scale().batch_size;
    stage.seed = mix_seed(w.seed, 200 + stream);
    log("seed " + std::to_string(seed_index) + ": " + system + " (" + std::string(setting_name(setting)) + ", " +
        std::to_string(epochs) + " epochs)");
    auto r = run_stage(std::move(m), stage, corpus, nullptr, train_options());
    if (options_.out_dir) {
      const std::string stem = "seed" + std::to_string(seed_index) + "-" + system;
      save_checkpoint(*options_.out_dir / (stem + ".ckpt"), r.model, {system, stage.seed, ""});
      std::ofstream(*options_.out_dir / (stem + ".jsonl"), std::ios::binary) << r.report.to_jsonl(options_.timing);
    }
    return std::move(r.model);
  }

  void record(std::size_t seed_index, const World& w, const std::string& system, const ScoreReport& s,
              bool f1, bool wer, bool intent) {
    ExperimentRow row{system, seed_index, w.seed, {}};
    if (f1) row.metrics["f1"] = 100.0 * s.slots.f1();
    if (wer && s.has_wer()) row.metrics["wer"] = s.wer();
    if (intent) row.metrics["intent_acc"] = s.intent_accuracy();
    result_.rows.push_back(std::move(row));
    if (std::find(result_.systems.begin(), result_.systems.end(), system) == result_.systems.end()) {
      result_.systems.push_back(system);
    }
  }

  ScoreReport evaluate(const Model& m, const World& w) const { return evaluate_model(m, w.slu_test, options_.threads); }

  World world(std::size_t k) const {
    World w = make_world(scale(), seed_for(k));
    if (options_.out_dir) write_corpus(*options_.out_dir / ("seed" + std::to_string(k) + "-test.jsonl"), w.slu_test);
    return w;
  }

  ExperimentResult finish() {
    if (options_.out_dir) {
      std::ofstream(*options_.out_dir / "results.tsv", std::ios::binary) << result_.to_tsv();
      std::ofstream(*options_.out_dir / "results.json", std::ios::binary) << result_.to_json();
      std::ofstream(*options_.out_dir / "table.txt", std::ios::binary) << result_.table();
    }
    return result_;
  }

 private:
  TrainOptions train_options() const { return TrainOptions{options_.threads, {}}; }

  ExperimentOptions options_;
  ExperimentResult result_;
};

const std::vector<std::string> kFreezeTranscription = {std::string(kTranscriptionPrefix)};

ExperimentResult pretrain_vs_scratch(const ExperimentOptions& options) {
  Runner run("pretrain-vs-scratch", options);
  run.result().metrics = {"f1", "wer"};
  for (std::size_t k = 0; k < options.seeds; ++k) {
    const World w = run.world(k);
    const auto epochs = run.scale().low_resource_slu_epochs;
    const auto n = std::min(run.scale().low_resource_slu_train, w.slu_train.size());
    const std::vector<AnnotatedUtterance> train(w.slu_train.begin(), w.slu_train.begin() + n);
    const auto setting = SerializationSetting::kTranscriptEntities;
    auto scratch = run.adapt(run.init_model(w), k, w, "scratch", train, setting, {}, epochs, 1);
    run.record(k, w, "scratch", run.evaluate(scratch, w), true, true, false);
    for (const std::string tier : {"small", "large"}) {
      auto m = run.adapt(run.pretrained(w, tier), k, w, "pt-" + tier, train, setting, {}, epochs, 1);
      run.record(k, w, "pt-" + tier, run.evaluate(m, w), true, true, false);
    }
  }
  return run.finish();
}

ExperimentResult spoken_vs_alpha(const ExperimentOptions& options) {
  Runner run("spoken-vs-alpha", options);
  run.result().metrics = {"f1"};
  for (std::size_t k = 0; k < options.seeds; ++k) {
    const World w = run.world(k);
    const Model base = run.pretrained(w, "large");
    const auto epochs = run.scale().slu_epochs;
    auto spoken = run.adapt(base, k, w, "spoken", w.slu_train, SerializationSetting::kEntitiesSpoken, {}, epochs, 2);
    run.record(k, w, "spoken", run.evaluate(spoken, w), true, false, false);
    auto alpha = run.adapt(base, k, w, "alpha", w.slu_train, SerializationSetting::kEntitiesAlpha, {}, epochs, 2);
    run.record(k, w, "alpha", run.evaluate(alpha, w), true, false, false);
  }
  return run.finish();
}

ExperimentResult ss_vs_ms(const ExperimentOptions& options) {
  Runner run("ss-vs-ms", options);
  run.result().metrics = {"intent_acc", "wer"};
  for (std::size_t k = 0; k < options.seeds; ++k) {
    const World w = run.world(k);
    const Model base = run.pretrained(w, "large");
    const auto epochs = run.scale().slu_epochs;
    const auto setting = SerializationSetting::kTranscriptIntent;
    const auto ss = revoice(w.slu_train, {w.pools.tts.front()}, w.pools.bank);
    const auto ms = revoice(w.slu_train, w.pools.tts, w.pools.bank);
    auto ss_pr = run.adapt(base, k, w, "ss-pr-joint", ss, setting, kFreezeTranscription, epochs, 3);
    run.record(k, w, "ss-pr-joint", run.evaluate(ss_pr, w), false, true, true);
    auto ss_all = run.adapt(base, k, w, "ss-all", ss, setting, {}, epochs, 3);
    run.record(k, w, "ss-all", run.evaluate(ss_all, w), false, true, true);
    auto ms_all = run.adapt(base, k, w, "ms-all", ms, setting, {}, epochs, 3);
    run.record(k, w, "ms-all", run.evaluate(ms_all, w), false, true, true);
    auto real = run.adapt(base, k, w, "real-all", w.slu_train, setting, {}, epochs, 3);
    run.record(k, w, "real-all", run.evaluate(real, w), false, true, true);
  }
  return run.finish();
}

ExperimentResult curriculum(const ExperimentOptions& options) {
  Runner run("curriculum", options);
  run.result().metrics = {"f1", "wer"};
  for (std::size_t k = 0; k < options.seeds; ++k) {
    const World w = run.world(k);
    const Model base = run.pretrained(w, "small");
    const auto& s = run.scale();
    const auto setting = SerializationSetting::kTranscriptEntities;
    auto two = run.adapt(base, k, w, "pt-slu", w.slu_train, setting, {}, s.slu_epochs, 4);
    run.record(k, w, "pt-slu", run.evaluate(two, w), true, true, false);

    auto asr = run.adapt(base, k, w, "pt-asr", w.slu_train, SerializationSetting::kTranscript, {},
                         s.asr_adapt_epochs, 5);
    auto three = run.adapt(std::move(asr), k, w, "pt-asr-slu", w.slu_train, setting, {}, s.slu_epochs, 4);
    run.record(k, w, "pt-asr-slu", run.evaluate(three, w), true, true, false);

    std::vector<AnnotatedUtterance> pos(w.pretrain.begin(),
                                        w.pretrain.begin() + static_cast<std::ptrdiff_t>(s.pretrain_small));
    auto tagged = run.adapt(base, k, w, "pt-pos", pos, SerializationSetting::kTranscriptPos, {},
                            s.asr_adapt_epochs, 6);
    auto pos_slu = run.adapt(std::move(tagged), k, w, "pt-pos-slu", w.slu_train, setting, {}, s.slu_epochs, 4);
    run.record(k, w, "pt-pos-slu", run.evaluate(pos_slu, w), true, true, false);
  }
  return run.finish();
}

}  // namespace

ExperimentResult run_experiment(const std::string& name, const ExperimentOptions& options) {
  if (name == "pretrain-vs-scratch") return pretrain_vs_scratch(options);
  if (name == "spoken-vs-alpha") return spoken_vs_alpha(options);
  if (name == "ss-vs-ms") return ss_vs_ms(options);
  if (name == "curriculum") return curriculum(options);
  std::string known;
  for (const auto& n : experiment_names()) known += (known.empty() ? "" : ", ") + n;
  throw DataError("unknown experiment '" + name + "' (known: " + known + ")");
}

}  // namespace tslu
