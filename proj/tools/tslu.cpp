// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Exit codes: 0 success, 1 usage, 2 data or
// configuration error, 3 verification failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "tslu/checkpoint.hpp"
#include "tslu/corpus_io.hpp"
#include "tslu/decode.hpp"
#include "tslu/error.hpp"
#include "tslu/experiments.hpp"
#include "tslu/grammar.hpp"
#include "tslu/metrics.hpp"
#include "tslu/plan_io.hpp"
#include "tslu/rng.hpp"
#include "tslu/slu_format.hpp"
#include "tslu/synth.hpp"
#include "tslu/training.hpp"
#include "tslu/verify.hpp"

namespace {

using namespace tslu;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitVerification = 3;

struct Globals {
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  bool quiet = false;
};

void note(const Globals& g, const std::string& msg) {
  if (!g.quiet) std::cerr << msg << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

// ---- gen-corpus -------------------------------------------------------------

struct GenArgs {
  std::string mode = "slu";
  std::size_t count = 100;
  std::string pool = "real-train";
  std::uint64_t world_seed = 1;
  std::size_t feature_dim = 16;
  bool pos = false;
  bool no_features = false;
  std::string id_prefix;
  fs::path out;
};

int cmd_gen_corpus(const Globals& g, const GenArgs& a) {
  const auto grammar = default_grammar();
  const auto space = make_synth_space(std::string(Vocab::kDeskCharset), a.feature_dim, mix_seed(a.world_seed, 1));
  const auto pools = make_speaker_pools(space, SpeakerPoolOptions{}, mix_seed(a.world_seed, 2));
  std::vector<std::string> speakers;
  if (a.pool == "real-train") {
    speakers = pools.real_train;
  } else if (a.pool == "real-test") {
    speakers = pools.real_test;
  } else if (a.pool == "tts") {
    speakers = pools.tts;
  } else if (a.pool == "tts-single") {
    speakers = {pools.tts.front()};
  } else {
    throw DataError("unknown speaker pool '" + a.pool + "'");
  }
  CorpusOptions options;
  options.mode = a.mode == "general" ? CorpusMode::kTaskIndependent : CorpusMode::kSlu;
  if (a.mode != "general" && a.mode != "slu") throw DataError("unknown corpus mode '" + a.mode + "'");
  options.pos_tags = a.pos;
  options.speakers = speakers;
  options.id_prefix = a.id_prefix.empty() ? a.mode : a.id_prefix;
  auto corpus = generate_corpus(grammar, a.count, g.seed, options);
  if (!a.no_features) synthesize_corpus(corpus, pools.bank);
  if (a.out.has_parent_path()) fs::create_directories(a.out.parent_path());
  write_corpus(a.out, corpus);
  note(g, "wrote " + std::to_string(corpus.size()) + " utterances to " + a.out.string());
  return kExitOk;
}

// ---- pretrain / adapt ---------------------------------------------------------

struct PlanArgs {
  fs::path plan;
  fs::path out;
  std::string init_checkpoint;
  bool timing = false;
};

int cmd_run_plan(const Globals& g, const PlanArgs& a) {
  auto plan = load_plan(a.plan);
  if (!a.init_checkpoint.empty()) plan.init_checkpoint = fs::path(a.init_checkpoint);
  Model model;
  Provenance prov;
  if (plan.init_checkpoint) {
    auto ck = load_checkpoint(*plan.init_checkpoint);
    model = std::move(ck.model);
    prov = ck.provenance;
  } else {
    const std::uint64_t seed = plan.init_seed ? plan.init_seed : g.seed;
    model = make_model<float>(plan.init_config, seed);
    prov = {"init", seed, ""};
  }
  CorpusSet corpora;
  for (const auto& [name, path] : plan.corpora) corpora[name] = read_corpus(path);
  TrainOptions options;
  options.threads = g.threads;
  if (!g.quiet) {
    options.on_epoch = [](const Model&, const EpochReport& r) {
      std::cerr << "epoch " << r.epoch << " loss " << r.train_loss << '\n';
    };
  }
  const auto result = run_plan(std::move(model), prov, plan, corpora, a.out, options, a.timing);
  for (std::size_t k = 0; k < result.checkpoints.size(); ++k) {
    std::cout << result.checkpoints[k].string() << ' ' << result.hashes[k] << '\n';
  }
  return kExitOk;
}

// ---- decode ---------------------------------------------------------------------

struct DecodeArgs {
  fs::path model;
  fs::path corpus;
  fs::path out;
  std::size_t max_symbols = kDefaultMaxSymbolsPerFrame;
};

int cmd_decode(const Globals& g, const DecodeArgs& a) {
  const auto ck = load_checkpoint(a.model);
  const auto corpus = read_corpus(a.corpus);
  std::vector<const Tensor*> feats;
  for (const auto& u : corpus) {
    if (!u.features) throw DataError("utterance '" + u.id + "' has no features");
    feats.push_back(&*u.features);
  }
  const auto hyps = decode_all(ck.model, feats, g.threads, a.max_symbols);
  std::string out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& vocab = ck.model.vocab();
    std::vector<std::string> symbols;
    for (auto id : hyps[i].symbols) symbols.push_back(vocab.symbol(id));
    const auto parsed = parse_hypothesis(hyps[i].symbols, vocab);
    nlohmann::ordered_json j;
    j["id"] = corpus[i].id;
    j["symbols"] = symbols;
    j["frames"] = hyps[i].frames;
    j["text"] = join_words(parsed.words);
    nlohmann::ordered_json ents = nlohmann::ordered_json::array();
    for (const auto& e : parsed.entities) ents.push_back({{"label", e.label}, {"value", join_words(e.value)}});
    j["entities"] = std::move(ents);
    if (parsed.intent) j["intent"] = *parsed.intent;
    if (!parsed.recoveries.empty()) j["recoveries"] = parsed.recoveries;
    out += j.dump() + "\n";
  }
  write_text(a.out, out);
  note(g, "decoded " + std::to_string(corpus.size()) + " utterances");
  return kExitOk;
}

// ---- score ------------------------------------------------------------------------

struct ScoreArgs {
  fs::path hyp;
  fs::path ref;
  std::string out;
  std::string tsv;
};

// Hypotheses may also be written as annotated utterances; they are scored as
// if decoded in the transcript-entities layout followed by the intent.
std::vector<std::string> annotation_symbols(const AnnotatedUtterance& u) {
  std::vector<std::string> out;
  if (u.words && u.entities) {
    out = serialize_symbols(u, SerializationSetting::kTranscriptEntities);
  } else if (u.words) {
    out = serialize_symbols(u, SerializationSetting::kTranscript);
  } else if (u.entities) {
    out = serialize_symbols(u, SerializationSetting::kEntitiesSpoken);
  }
  if (u.intent) out.push_back(intent_symbol(*u.intent));
  return out;
}

int cmd_score(const Globals&, const ScoreArgs& a) {
  std::ifstream in(a.hyp, std::ios::binary);
  if (!in) throw DataError("cannot read " + a.hyp.string());
  std::vector<std::pair<std::string, std::vector<std::string>>> raw;
  std::set<std::string> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      auto symbols = j.contains("symbols") ? j.at("symbols").get<std::vector<std::string>>()
                                           : annotation_symbols(utterance_from_json_line(line));
      for (const auto& s : symbols) {
        if (classify_symbol(s) != SymbolKind::kCharacter) labels.insert(s);
      }
      raw.emplace_back(j.at("id").get<std::string>(), std::move(symbols));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(a.hyp.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  // Characters first, then every label the hypotheses use.
  std::set<std::string> chars;
  for (const auto& [id, symbols] : raw) {
    for (const auto& s : symbols) {
      if (classify_symbol(s) == SymbolKind::kCharacter) chars.insert(s);
    }
  }
  std::vector<std::string> table{std::string(Vocab::kBlank)};
  table.insert(table.end(), chars.begin(), chars.end());
  labels.erase(std::string(Vocab::kBlank));
  table.insert(table.end(), labels.begin(), labels.end());
  const auto vocab = Vocab::from_symbols(table);
  std::vector<ScoredHypothesis> hyps;
  for (const auto& [id, symbols] : raw) {
    ScoredHypothesis h{id, {}};
    for (const auto& s : symbols) h.symbols.push_back(vocab.id(s));
    hyps.push_back(std::move(h));
  }
  const auto refs = read_corpus(a.ref);
  const auto report = score_corpus(hyps, refs, vocab);
  const std::string json = report.to_json() + "\n";
  if (a.out.empty()) {
    std::cout << json;
  } else {
    write_text(a.out, json);
  }
  if (!a.tsv.empty()) write_text(a.tsv, report.per_utterance_tsv());
  return kExitOk;
}

// ---- gradcheck ----------------------------------------------------------------------

int cmd_gradcheck(const Globals& g) {
  bool ok = true;
  for (const auto& r : run_gradcheck_suite(g.seed)) {
    std::printf("%-22s %s  instances=%zu checks=%zu worst=%.3e tol=%.0e %.2fs\n", r.name.c_str(),
                r.passed() ? "PASS" : "FAIL", r.instances, r.checks, r.worst, r.tolerance, r.seconds);
    if (!r.passed()) {
      ok = false;
      std::fprintf(stderr, "%s: %s\n", r.name.c_str(), r.first_failure.c_str());
    }
  }
  return ok ? kExitOk : kExitVerification;
}

// ---- experiment ------------------------------------------------------------------------

struct ExperimentArgs {
  std::string name;
  std::string scale = "desk";
  std::size_t seeds = 3;
  fs::path out;
  std::string cache;
  bool timing = false;
};

int cmd_experiment(const Globals& g, const ExperimentArgs& a) {
  ExperimentOptions options;
  options.seed = g.seed;
  options.seeds = a.seeds;
  options.threads = g.threads;
  options.scale = scale_by_name(a.scale);
  options.out_dir = a.out;
  if (!a.cache.empty()) options.cache_dir = fs::path(a.cache);
  options.timing = a.timing;
  if (!g.quiet) options.log = [](const std::string& m) { std::cerr << m << '\n'; };
  const auto result = run_experiment(a.name, options);
  std::cout << result.table();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Desk-scale transducer SLU toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Base random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores; 1 = bit-reproducible)")
      ->capture_default_str();
  app.add_flag("-q,--quiet", g.quiet, "No progress output");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-corpus", "Generate a synthetic corpus with features");
  gen_cmd->add_option("--mode", gen.mode, "slu or general")->capture_default_str();
  gen_cmd->add_option("-n,--count", gen.count, "Utterances")->capture_default_str();
  gen_cmd->add_option("--pool", gen.pool, "real-train, real-test, tts or tts-single")->capture_default_str();
  gen_cmd->add_option("--world-seed", gen.world_seed, "Seed of the acoustic space and voices")
      ->capture_default_str();
  gen_cmd->add_option("--feature-dim", gen.feature_dim)->capture_default_str();
  gen_cmd->add_option("--id-prefix", gen.id_prefix);
  gen_cmd->add_flag("--pos", gen.pos, "Add POS tags");
  gen_cmd->add_flag("--no-features", gen.no_features, "Text and labels only");
  gen_cmd->add_option("-o,--out", gen.out, "Output JSONL")->required();

  PlanArgs pre, adapt;
  auto* pre_cmd = app.add_subcommand("pretrain", "Run a pre-training plan");
  auto* adapt_cmd = app.add_subcommand("adapt", "Run an adaptation plan");
  for (auto [cmd, args] : {std::pair{pre_cmd, &pre}, std::pair{adapt_cmd, &adapt}}) {
    cmd->add_option("--plan", args->plan, "Plan JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("-o,--out", args->out, "Output directory")->required();
    cmd->add_option("--init-checkpoint", args->init_checkpoint, "Overrides the plan's starting model");
    cmd->add_flag("--timing", args->timing, "Write wall-clock into epoch reports");
  }

  DecodeArgs dec;
  auto* dec_cmd = app.add_subcommand("decode", "Greedy-decode a corpus");
  dec_cmd->add_option("--model", dec.model)->required()->check(CLI::ExistingFile);
  dec_cmd->add_option("--corpus", dec.corpus)->required()->check(CLI::ExistingFile);
  dec_cmd->add_option("-o,--out", dec.out, "Hypothesis JSONL")->required();
  dec_cmd->add_option("--max-symbols-per-frame", dec.max_symbols)->capture_default_str();

  ScoreArgs sc;
  auto* score_cmd = app.add_subcommand(
      "score", "Score hypotheses (decode output or annotated JSONL) against a reference corpus");
  score_cmd->add_option("--hyp", sc.hyp)->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--ref", sc.ref)->required()->check(CLI::ExistingFile);
  score_cmd->add_option("-o,--out", sc.out, "Report JSON (default: stdout)");
  score_cmd->add_option("--tsv", sc.tsv, "Per-utterance breakdown");

  auto* grad_cmd = app.add_subcommand("gradcheck", "Run the lattice and gradient verification suites");

  ExperimentArgs ex;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a named trend experiment");
  exp_cmd->add_option("name", ex.name)->required()->check(CLI::IsMember(experiment_names()));
  exp_cmd->add_option("--scale", ex.scale, "desk or smoke")->capture_default_str();
  exp_cmd->add_option("--seeds", ex.seeds)->capture_default_str();
  exp_cmd->add_option("-o,--out", ex.out, "Output directory")->required();
  exp_cmd->add_option("--cache", ex.cache, "Directory for reusable pre-trained models");
  exp_cmd->add_flag("--timing", ex.timing, "Write wall-clock into epoch reports");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen_corpus(g, gen);
    if (pre_cmd->parsed()) return cmd_run_plan(g, pre);
    if (adapt_cmd->parsed()) return cmd_run_plan(g, adapt);
    if (dec_cmd->parsed()) return cmd_decode(g, dec);
    if (score_cmd->parsed()) return cmd_score(g, sc);
    if (grad_cmd->parsed()) return cmd_gradcheck(g);
    if (exp_cmd->parsed()) return cmd_experiment(g, ex);
  } catch (const VerificationError& e) {
    std::cerr << "verification failed: " << e.what() << '\n';
    return kExitVerification;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
