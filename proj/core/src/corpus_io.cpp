// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include "tslu/corpus_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "tslu/error.hpp"

namespace tslu {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'T', 'S', 'L', 'U', 'F', 'E', 'A', 'T'};

static_assert(std::endian::native == std::endian::little, "feature sidecar I/O assumes little-endian");

void write_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

std::uint64_t read_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw DataError("feature sidecar truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

}  // namespace

std::filesystem::path features_sidecar(const std::filesystem::path& jsonl) {
  auto p = jsonl;
  p.replace_extension(".feats");
  return p;
}

std::string utterance_to_json_line(const AnnotatedUtterance& u, bool with_features_ref) {
  json j;
  j["id"] = u.id;
  j["speaker"] = u.speaker;
  if (u.words) j["text"] = join_words(*u.words);
  if (u.entities) {
    json list = json::array();
    for (const auto& e : *u.entities) list.push_back({{"label", e.label}, {"value", join_words(e.value)}});
    j["entities"] = std::move(list);
  }
  if (u.intent) j["intent"] = *u.intent;
  if (u.pos_tags) j["pos"] = *u.pos_tags;
  if (with_features_ref && u.features) j["features_ref"] = u.id;
  return j.dump();
}

AnnotatedUtterance utterance_from_json_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("corpus line is not a JSON object");
  AnnotatedUtterance u;
  try {
    u.id = j.at("id").get<std::string>();
    u.speaker = j.value("speaker", std::string());
    if (j.contains("text")) u.words = split_words(j["text"].get<std::string>());
    if (j.contains("entities")) {
      std::vector<EntitySpan> entities;
      for (const auto& e : j["entities"]) {
        entities.push_back({e.at("label").get<std::string>(), split_words(e.at("value").get<std::string>())});
      }
      u.entities = std::move(entities);
    }
    if (j.contains("intent")) u.intent = j["intent"].get<std::string>();
    if (j.contains("pos")) u.pos_tags = j["pos"].get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw DataError(std::string("bad corpus field: ") + e.what());
  }
  validate_utterance(u);
  return u;
}

void write_corpus(const std::filesystem::path& jsonl, const std::vector<AnnotatedUtterance>& corpus) {
  bool any_features = false;
  for (const auto& u : corpus) any_features = any_features || u.features.has_value();

  std::ofstream out(jsonl, std::ios::binary);
  if (!out) throw DataError("cannot write " + jsonl.string());
  for (const auto& u : corpus) out << utterance_to_json_line(u, any_features) << '\n';
  if (!out) throw DataError("failed writing " + jsonl.string());

  const auto sidecar = features_sidecar(jsonl);
  if (!any_features) {
    std::filesystem::remove(sidecar);
    return;
  }
  json header = json::array();
  std::uint64_t offset = 0;
  for (const auto& u : corpus) {
    if (!u.features) continue;
    if (u.features->rank() != 2) throw ShapeError("utterance '" + u.id + "' features must be [T, F]");
    header.push_back({{"id", u.id}, {"offset", offset}, {"T", u.features->dim(0)}, {"F", u.features->dim(1)}});
    offset += u.features->size();
  }
  const std::string hdr = header.dump();
  std::ofstream feats(sidecar, std::ios::binary);
  if (!feats) throw DataError("cannot write " + sidecar.string());
  feats.write(kMagic, sizeof kMagic);
  write_u64(feats, hdr.size());
  feats.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));
  for (const auto& u : corpus) {
    if (!u.features) continue;
    feats.write(reinterpret_cast<const char*>(u.features->data()),
                static_cast<std::streamsize>(u.features->size() * sizeof(float)));
  }
  if (!feats) throw DataError("failed writing " + sidecar.string());
}

std::vector<AnnotatedUtterance> read_corpus(const std::filesystem::path& jsonl) {
  std::ifstream in(jsonl, std::ios::binary);
  if (!in) throw DataError("cannot read corpus " + jsonl.string());
  std::vector<AnnotatedUtterance> corpus;
  std::vector<bool> wants_features;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      corpus.push_back(utterance_from_json_line(line));
      wants_features.push_back(json::parse(line).contains("features_ref"));
    } catch (const DataError& e) {
      throw DataError(jsonl.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }

  bool any = false;
  for (bool w : wants_features) any = any || w;
  if (!any) return corpus;

  const auto sidecar = features_sidecar(jsonl);
  std::ifstream feats(sidecar, std::ios::binary);
  if (!feats) throw DataError("corpus references features but " + sidecar.string() + " is missing");
  char magic[8];
  feats.read(magic, 8);
  if (!feats || std::memcmp(magic, kMagic, 8) != 0) throw DataError(sidecar.string() + ": bad magic");
  const std::uint64_t hlen = read_u64(feats);
  std::string hdr(hlen, '\0');
  feats.read(hdr.data(), static_cast<std::streamsize>(hlen));
  if (!feats) throw DataError(sidecar.string() + ": truncated header");
  const auto data_start = feats.tellg();

  struct Entry {
    std::uint64_t offset, t, f;
  };
  std::map<std::string, Entry> index;
  try {
    for (const auto& e : json::parse(hdr)) {
      index[e.at("id").get<std::string>()] = {e.at("offset").get<std::uint64_t>(),
                                              e.at("T").get<std::uint64_t>(), e.at("F").get<std::uint64_t>()};
    }
  } catch (const json::exception& e) {
    throw DataError(sidecar.string() + ": bad header: " + e.what());
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!wants_features[i]) continue;
    auto it = index.find(corpus[i].id);
    if (it == index.end()) throw DataError(sidecar.string() + ": no features for '" + corpus[i].id + "'");
    const auto& e = it->second;
    std::vector<float> data(e.t * e.f);
    feats.seekg(data_start + static_cast<std::streamoff>(e.offset * sizeof(float)));
    feats.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(float)));
    if (!feats) throw DataError(sidecar.string() + ": truncated data for '" + corpus[i].id + "'");
    corpus[i].features = Tensor({e.t, e.f}, std::move(data));
  }
  return corpus;
}

}  // namespace tslu
