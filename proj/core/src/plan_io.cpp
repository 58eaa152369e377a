// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include "tslu/plan_io.hpp"

#include <fstream>
#include <iterator>

#include <json.hpp>

#include "tslu/error.hpp"

namespace tslu {

using nlohmann::json;

namespace {

ModelConfig config_from(const json& j) {
  ModelConfig c;
  c.feature_dim = j.value("feature_dim", c.feature_dim);
  c.enc_layers = j.value("enc_layers", c.enc_layers);
  c.enc_cells_per_dir = j.value("enc_cells_per_dir", c.enc_cells_per_dir);
  c.pred_embed_dim = j.value("pred_embed_dim", c.pred_embed_dim);
  c.pred_cells = j.value("pred_cells", c.pred_cells);
  c.joint_dim = j.value("joint_dim", c.joint_dim);
  const std::string charset = j.value("charset", std::string("desk"));
  if (charset == "desk") {
    c.vocab = Vocab::from_characters(Vocab::kDeskCharset);
  } else if (charset == "full") {
    c.vocab = Vocab::from_characters(Vocab::kFullCharset);
  } else {
    c.vocab = Vocab::from_characters(charset);
  }
  c.validate();
  return c;
}

StageConfig stage_from(const json& j, std::size_t index) {
  StageConfig s;
  s.name = j.value("name", "stage" + std::to_string(index + 1));
  s.corpus = j.at("corpus").get<std::string>();
  s.heldout = j.value("heldout", std::string());
  s.setting = parse_setting(j.at("setting").get<std::string>());
  if (j.contains("extend_vocab")) {
    const auto& e = j["extend_vocab"];
    const auto seed = e.value("seed", std::uint64_t{0});
    if (e.at("symbols").is_string()) {
      if (e["symbols"].get<std::string>() != "auto") {
        throw DataError("stage '" + s.name + "': extend_vocab.symbols must be a list or \"auto\"");
      }
      s.extend_auto = true;
      s.extend_seed = seed;
    } else {
      s.extension = VocabExtension{e["symbols"].get<std::vector<std::string>>(), seed};
    }
  }
  if (j.contains("freeze")) s.freeze.prefixes = j["freeze"].get<std::vector<std::string>>();
  s.epochs = j.at("epochs").get<std::size_t>();
  if (j.contains("lr")) {
    const auto& lr = j["lr"];
    s.lr.initial = lr.value("initial", s.lr.initial);
    s.lr.decay = lr.value("decay", s.lr.decay);
    s.lr.interval = lr.value("interval", s.lr.interval);
  }
  s.momentum = j.value("momentum", s.momentum);
  s.batch_size = j.value("batch_size", s.batch_size);
  s.seed = j.value("seed", s.seed);
  return s;
}

}  // namespace

ModelConfig parse_model_config(std::string_view json_text) {
  try {
    return config_from(json::parse(json_text));
  } catch (const json::exception& e) {
    throw DataError(std::string("bad model config: ") + e.what());
  }
}

AdaptationPlan parse_plan(std::string_view json_text, const std::filesystem::path& base_dir) {
  AdaptationPlan plan;
  try {
    const json j = json::parse(json_text);
    auto resolve = [&](const std::string& p) {
      std::filesystem::path path(p);
      return path.is_absolute() ? path : base_dir / path;
    };
    const auto& model = j.at("model");
    if (model.contains("init_checkpoint")) {
      plan.init_checkpoint = resolve(model["init_checkpoint"].get<std::string>());
    } else {
      plan.init_config = config_from(model.value("config", json::object()));
      plan.init_seed = model.value("init_seed", std::uint64_t{0});
    }
    for (const auto& [name, path] : j.at("corpora").items()) plan.corpora[name] = resolve(path.get<std::string>());
    const auto& stages = j.at("stages");
    for (std::size_t k = 0; k < stages.size(); ++k) plan.stages.push_back(stage_from(stages[k], k));
  } catch (const json::exception& e) {
    throw DataError(std::string("bad plan: ") + e.what());
  }
  validate_plan(plan);
  return plan;
}

AdaptationPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read plan " + path.string());
  const std::string text(std::istreambuf_iterator<char>(in), {});
  try {
    return parse_plan(text, path.parent_path());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace tslu
