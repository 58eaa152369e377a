// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include "tslu/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <openssl/evp.h>

#include <json.hpp>

#include "tslu/error.hpp"

namespace tslu {

using nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

std::string base64_encode(std::span<const unsigned char> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<unsigned char> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw DataError("base64 length is not a multiple of 4");
  std::vector<unsigned char> out(3 * text.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw DataError("invalid base64 data");
  std::size_t pad = 0;
  if (!text.empty() && text.back() == '=') ++pad;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

std::string content_hash(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 15];
  }
  return hex;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

ordered_json config_json(const ModelConfig& c) {
  return ordered_json{{"feature_dim", c.feature_dim},       {"enc_layers", c.enc_layers},
                      {"enc_cells_per_dir", c.enc_cells_per_dir}, {"pred_embed_dim", c.pred_embed_dim},
                      {"pred_cells", c.pred_cells},         {"joint_dim", c.joint_dim}};
}

ModelConfig config_from(const ordered_json& j, const ordered_json& vocab) {
  ModelConfig c;
  c.feature_dim = j.at("feature_dim").get<std::size_t>();
  c.enc_layers = j.at("enc_layers").get<std::size_t>();
  c.enc_cells_per_dir = j.at("enc_cells_per_dir").get<std::size_t>();
  c.pred_embed_dim = j.at("pred_embed_dim").get<std::size_t>();
  c.pred_cells = j.at("pred_cells").get<std::size_t>();
  c.joint_dim = j.at("joint_dim").get<std::size_t>();
  if (!vocab.is_null()) {
    const auto symbols = vocab.get<std::vector<std::string>>();
    c.vocab = Vocab::from_symbols(symbols);
  }
  c.validate();
  return c;
}

}  // namespace

std::string config_to_json(const ModelConfig& c) {
  auto j = config_json(c);
  j["vocab"] = c.vocab.symbols();
  return j.dump();
}

ModelConfig config_from_json(std::string_view text) {
  try {
    const auto j = ordered_json::parse(text);
    return config_from(j, j.contains("vocab") ? j["vocab"] : ordered_json());
  } catch (const ordered_json::exception& e) {
    throw DataError(std::string("bad model config: ") + e.what());
  }
}

std::string checkpoint_to_string(const Model& m, const Provenance& p) {
  validate_model(m);
  ordered_json j;
  j["format_version"] = kCheckpointFormatVersion;
  j["config"] = config_json(m.config);
  j["vocab"] = m.config.vocab.symbols();
  ordered_json params = ordered_json::object();
  for (const auto& [name, t] : m.params) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(t.data());
    params[name] = {{"dims", t.dims()},
                    {"data", base64_encode({bytes, t.size() * sizeof(float)})}};
  }
  j["params"] = std::move(params);
  j["provenance"] = {{"stage", p.stage}, {"seed", p.seed}, {"parent_hash", p.parent_hash}};
  return j.dump() + "\n";
}

Checkpoint checkpoint_from_string(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::exception& e) {
    throw DataError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw DataError("unsupported checkpoint format version " + std::to_string(version));
    }
    Checkpoint ck;
    ck.model.config = config_from(j.at("config"), j.at("vocab"));
    for (const auto& [name, entry] : j.at("params").items()) {
      const auto dims = entry.at("dims").get<Shape>();
      const auto bytes = base64_decode(entry.at("data").get<std::string>());
      if (bytes.size() % sizeof(float) != 0) throw DataError("parameter '" + name + "' has a partial float");
      std::vector<float> data(bytes.size() / sizeof(float));
      std::memcpy(data.data(), bytes.data(), bytes.size());
      ck.model.params.emplace(name, Tensor(dims, std::move(data)));
    }
    const auto& p = j.at("provenance");
    ck.provenance = {p.at("stage").get<std::string>(), p.at("seed").get<std::uint64_t>(),
                     p.at("parent_hash").get<std::string>()};
    validate_model(ck.model);
    return ck;
  } catch (const ordered_json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

std::string save_checkpoint(const std::filesystem::path& path, const Model& m, const Provenance& p) {
  const auto text = checkpoint_to_string(m, p);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out << text;
  if (!out) throw DataError("failed writing checkpoint " + path.string());
  return content_hash(text);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  try {
    return checkpoint_from_string(read_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string file_hash(const std::filesystem::path& path) { return content_hash(read_file(path)); }

}  // namespace tslu
