// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end acceptance run: one PASS/FAIL line per criterion.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "tslu/experiments.hpp"
#include "tslu/grammar.hpp"
#include "tslu/metrics.hpp"
#include "tslu/rng.hpp"
#include "tslu/slu_format.hpp"
#include "tslu/surgery.hpp"
#include "tslu/synth.hpp"
#include "tslu/training.hpp"
#include "tslu/verify.hpp"

namespace fs = std::filesystem;
using namespace tslu;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string sweep_line(const SweepResult& s) {
  return s.name + " " + std::to_string(s.instances) + " instances, worst " + fmt("%.2e", s.worst) + ", " +
         fmt("%.1fs", s.seconds) + (s.first_failure.empty() ? "" : ", first failure: " + s.first_failure);
}

Outcome lattice_oracle() {
  const auto s = lattice_oracle_sweep(200, 11);
  return {s.passed() && s.seconds < 10.0, sweep_line(s)};
}

Outcome gradient_suites() {
  const auto start = Clock::now();
  const auto logits = logit_gradient_sweep(100, 12);
  const auto model = model_gradient_sweep(20, 13);
  const double secs = since(start);
  return {logits.passed() && model.passed() && secs < 120.0,
          sweep_line(logits) + "; " + sweep_line(model) + "; total " + fmt("%.1fs", secs)};
}

std::vector<AnnotatedUtterance> voiced(CorpusMode mode, std::size_t n, std::uint64_t seed, const ModelConfig& c) {
  const auto space = make_synth_space(std::string(Vocab::kDeskCharset), c.feature_dim, mix_seed(seed, 1));
  const auto pools = make_speaker_pools(space, {}, mix_seed(seed, 2));
  auto corpus = generate_corpus(default_grammar(), n, mix_seed(seed, 3), {mode, false, pools.real_train, "acc"});
  synthesize_corpus(corpus, pools.bank);
  return corpus;
}

Outcome surgery() {
  const ModelConfig config;
  const Model before = make_model<float>(config, 21);
  VocabExtension ext;
  for (std::size_t k = 0; k < 151; ++k) ext.new_symbols.push_back("B-extra" + std::to_string(k));
  ext.init_seed = 22;
  const Model after = extend_vocab(before, ext);

  std::size_t differing = 0;
  for (const auto& [name, old] : before.params) {
    const auto& now = after.param(name);
    const std::size_t n = old.size();
    if (now.size() < n || !std::equal(old.data(), old.data() + n, now.data())) ++differing;
  }
  std::vector<Probe> probes;
  for (auto& u : voiced(CorpusMode::kTaskIndependent, 50, 23, config)) {
    probes.push_back({*u.features, serialize(u, SerializationSetting::kTranscript, before.vocab())});
  }
  const auto report = logit_preservation_check(before, after, probes);
  return {differing == 0 && report.passed() && report.probes == 50,
          "V " + std::to_string(before.vocab().size()) + " -> " + std::to_string(after.vocab().size()) + ", " +
              std::to_string(differing) + " old parameter tensors changed, " + std::to_string(report.probes) +
              " probes, max old-logit deviation " + fmt("%g", report.max_old_logit_deviation)};
}

Outcome freeze() {
  const ModelConfig config;
  const auto corpus = voiced(CorpusMode::kSlu, 8, 31, config);
  const Model m = make_model<float>(config, 32);
  StageConfig stage;
  stage.name = "pr-joint";
  stage.setting = SerializationSetting::kTranscriptIntent;
  stage.extend_auto = true;
  stage.extend_seed = 33;
  stage.freeze.prefixes = {std::string(kTranscriptionPrefix)};
  stage.epochs = 50;
  stage.lr = {0.01, 1.0, 0};
  stage.batch_size = 4;
  stage.seed = 34;
  const auto r = run_stage(m, stage, corpus, nullptr, {});
  std::size_t changed = 0, transcription = 0;
  for (const auto& [name, old] : m.params) {
    if (subnetwork_of(name) != kTranscriptionPrefix) continue;
    ++transcription;
    const auto& now = r.model.param(name);
    if (!std::equal(old.data(), old.data() + old.size(), now.data())) ++changed;
  }
  const bool others_moved = subnetwork_checksum(m, "joint") != subnetwork_checksum(r.model, "joint");
  return {changed == 0 && transcription > 0 && others_moved && r.report.epochs.size() == 50,
          std::to_string(transcription) + " transcription tensors, " + std::to_string(changed) +
              " changed over 50 epochs; joint " + (others_moved ? "updated" : "NOT updated")};
}

Outcome overfit() {
  const auto start = Clock::now();
  const ModelConfig config;
  const auto corpus = voiced(CorpusMode::kSlu, 32, 41, config);
  StageConfig stage;
  stage.name = "overfit";
  stage.setting = SerializationSetting::kTranscriptIntent;
  stage.extend_auto = true;
  stage.extend_seed = 42;
  stage.epochs = 200;
  stage.lr = {0.01, 1.0, 0};
  stage.batch_size = 4;
  stage.seed = 43;
  std::size_t reached = 0;
  double best = 0.0;
  TrainOptions options;
  options.threads = 1;
  options.on_epoch = [&](const Model& m, const EpochReport& e) {
    if (reached != 0 || (e.epoch + 1) % 10 != 0) return;
    best = std::max(best, evaluate_model(m, corpus, 1).intent_accuracy());
    if (best >= 95.0) reached = e.epoch + 1;
  };
  run_stage(make_model<float>(config, 44), stage, corpus, nullptr, options);
  const double secs = since(start);
  return {reached != 0 && secs < 300.0,
          "train intent accuracy " + fmt("%.1f%%", best) +
              (reached ? " reached at epoch " + std::to_string(reached) : std::string(" never reached 95%")) +
              ", " + fmt("%.0fs", secs)};
}

std::string per_seed(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : "/") + fmt("%.1f", x);
  return s;
}

bool all_greater(const std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] > b[i])) return false;
  }
  return !a.empty() && a.size() == b.size();
}

Outcome pretrain_trend(const ExperimentResult& r) {
  const auto scratch = r.values("scratch", "f1"), large = r.values("pt-large", "f1");
  return {all_greater(large, scratch), "f1 scratch " + per_seed(scratch) + ", pt-large " + per_seed(large)};
}

double mean(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

// Judged on seed means.
Outcome size_trend(const ExperimentResult& r) {
  const double scratch = mean(r.values("scratch", "f1")), small = mean(r.values("pt-small", "f1")),
               large = mean(r.values("pt-large", "f1"));
  const double gap = std::abs(small - large);
  return {gap <= 5.0 && small - scratch > gap && large - scratch > gap,
          "mean f1 scratch " + fmt("%.1f", scratch) + ", pt-small " + fmt("%.1f", small) + ", pt-large " +
              fmt("%.1f", large) + ", small/large gap " + fmt("%.1f", gap)};
}

Outcome order_trend(const ExperimentResult& r) {
  const auto spoken = r.values("spoken", "f1"), alpha = r.values("alpha", "f1");
  return {all_greater(spoken, alpha), "f1 spoken " + per_seed(spoken) + ", alpha " + per_seed(alpha)};
}

Outcome synthetic_trend(const ExperimentResult& r) {
  const auto pr = r.values("ss-pr-joint", "intent_acc"), ss = r.values("ss-all", "intent_acc"),
             ms = r.values("ms-all", "intent_acc");
  bool ok = all_greater(ms, ss);
  for (std::size_t i = 0; i < pr.size(); ++i) ok = ok && pr[i] >= ss[i] - 2.0;
  return {ok, "intent ss-pr-joint " + per_seed(pr) + ", ss-all " + per_seed(ss) + ", ms-all " + per_seed(ms)};
}

Outcome metrics_fixtures() {
  std::vector<std::string> problems;

  AnnotatedUtterance u;
  u.id = "example";
  u.words = split_words("i want a flight to dallas from reno that makes a stop in las vegas");
  u.entities = std::vector<EntitySpan>{
      {"toloc.city_name", {"dallas"}}, {"fromloc.city_name", {"reno"}}, {"stoploc.city_name", {"las", "vegas"}}};
  const auto symbols = serialize_symbols(u, SerializationSetting::kTranscriptEntities);
  Vocab vocab = Vocab::from_characters(Vocab::kDeskCharset);
  std::vector<std::string> labels;
  for (const auto& s : symbols) {
    if (!vocab.contains(s) && std::find(labels.begin(), labels.end(), s) == labels.end()) labels.push_back(s);
  }
  vocab = vocab.extended(labels);
  std::vector<SymbolId> ids;
  for (const auto& s : symbols) ids.push_back(vocab.id(s));
  const double wer = wer_filtered(ids, *u.words, vocab).wer();
  if (wer != 0.0) problems.push_back("filtered WER " + fmt("%g", wer));

  Rng rng(51);
  std::size_t unstable = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<EntitySpan> ref, hyp;
    const std::size_t n = rng.index(8), m = rng.index(8);
    auto draw = [&] { return EntitySpan{"l" + std::to_string(rng.index(3)), {"v" + std::to_string(rng.index(3))}}; };
    for (std::size_t k = 0; k < n; ++k) ref.push_back(draw());
    for (std::size_t k = 0; k < m; ++k) hyp.push_back(draw());
    const auto base = slot_f1(hyp, ref);
    rng.shuffle(std::span<EntitySpan>(hyp));
    rng.shuffle(std::span<EntitySpan>(ref));
    const auto again = slot_f1(hyp, ref);
    unstable += base.tp != again.tp || base.fp != again.fp || base.fn != again.fn;
  }
  if (unstable) problems.push_back(std::to_string(unstable) + " order-dependent slot scores");

  std::vector<std::vector<std::string>> all{{}};
  for (std::size_t len = 1; len <= 5; ++len) {
    const std::size_t prev = all.size();
    for (std::size_t i = 0; i < prev; ++i) {
      if (all[i].size() != len - 1) continue;
      for (const char* a : {"a", "b"}) {
        auto t = all[i];
        t.push_back(a);
        all.push_back(std::move(t));
      }
    }
  }
  std::function<std::size_t(std::span<const std::string>, std::span<const std::string>)> brute =
      [&](std::span<const std::string> a, std::span<const std::string> b) -> std::size_t {
    if (a.empty()) return b.size();
    if (b.empty()) return a.size();
    return std::min({brute(a.subspan(1), b.subspan(1)) + (a[0] == b[0] ? 0 : 1), brute(a, b.subspan(1)) + 1,
                     brute(a.subspan(1), b) + 1});
  };
  std::size_t mismatches = 0, cases = 0;
  for (const auto& ref : all) {
    for (const auto& hyp : all) {
      mismatches += align_words(hyp, ref).errors() != brute(hyp, ref);
      ++cases;
    }
  }
  if (mismatches) problems.push_back(std::to_string(mismatches) + " edit-distance mismatches");

  std::string detail = "filtered WER " + fmt("%g", wer) + ", 1000 multisets, " + std::to_string(cases) +
                       " Levenshtein cases";
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism(const ExperimentOptions& base, const fs::path& work) {
  std::vector<fs::path> dirs = {work / "determinism-a", work / "determinism-b"};
  for (const auto& d : dirs) {
    fs::remove_all(d);
    ExperimentOptions o = base;
    o.seeds = 1;
    o.threads = 1;
    o.cache_dir.reset();
    o.out_dir = d;
    run_experiment("spoken-vs-alpha", o);
  }
  std::size_t files = 0, differing = 0;
  for (const auto& e : fs::directory_iterator(dirs[0])) {
    ++files;
    const auto other = dirs[1] / e.path().filename();
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) ++differing;
  }
  const auto count_b = std::distance(fs::directory_iterator(dirs[1]), fs::directory_iterator{});
  return {files > 0 && differing == 0 && static_cast<std::size_t>(count_b) == files,
          std::to_string(files) + " files compared, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tslu acceptance run"};
  fs::path work = "acceptance-work";
  std::size_t seeds = 3;
  std::string scale = "desk";
  std::vector<int> only;
  app.add_option("--work", work, "Scratch directory for experiment outputs");
  app.add_option("--seeds", seeds, "Seeds for the trend experiments");
  app.add_option("--scale", scale, "Experiment scale")->check(CLI::IsMember({"desk", "smoke"}));
  app.add_option("--only", only, "Run just these criteria")->delimiter(',')->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  ExperimentOptions options;
  options.seeds = seeds;
  options.scale = scale_by_name(scale);
  options.cache_dir = work / "cache";
  const auto start = Clock::now();
  options.log = [&](const std::string& msg) { std::fprintf(stderr, "[%7.1fs] %s\n", since(start), msg.c_str()); };

  int failures = 0;
  auto report = [&](int id, const std::string& title, const std::function<Outcome()>& check) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) return;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " (" << o.detail << ")"
              << std::endl;
  };

  auto experiment = [&](const std::string& name) {
    ExperimentOptions o = options;
    o.out_dir = work / name;
    return run_experiment(name, o);
  };

  report(1, "lattice oracle equivalence", lattice_oracle);
  report(2, "gradient suites", gradient_suites);
  report(3, "surgery preservation", surgery);
  report(4, "freeze correctness", freeze);
  report(5, "overfit fixture", overfit);
  ExperimentResult pvs;
  bool have_pvs = false;
  report(6, "pre-training beats scratch", [&] {
    pvs = experiment("pretrain-vs-scratch");
    have_pvs = true;
    return pretrain_trend(pvs);
  });
  report(7, "pre-training size insensitivity", [&] {
    if (!have_pvs) {
      pvs = experiment("pretrain-vs-scratch");
      have_pvs = true;
    }
    return size_trend(pvs);
  });
  report(8, "spoken order beats alphabetic", [&] { return order_trend(experiment("spoken-vs-alpha")); });
  report(9, "synthetic speech adaptation", [&] { return synthetic_trend(experiment("ss-vs-ms")); });
  report(10, "metrics fixtures", metrics_fixtures);
  report(11, "determinism", [&] { return determinism(options, work); });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
