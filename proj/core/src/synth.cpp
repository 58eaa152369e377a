// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include "tslu/synth.hpp"

#include "tslu/error.hpp"
#include "tslu/rng.hpp"

namespace tslu {

SynthSpace make_synth_space(std::string charset, std::size_t feature_dim, std::uint64_t seed) {
  if (charset.empty()) throw DataError("synth space needs a non-empty charset");
  if (feature_dim == 0) throw DataError("synth space needs a positive feature dimension");
  Tensor bases({charset.size(), feature_dim});
  Rng rng(mix_seed(seed, 0x5eed));
  for (auto& v : bases.values()) v = static_cast<float>(rng.normal());
  return SynthSpace{std::move(charset), std::move(bases)};
}

SpeakerTemplate make_speaker(const std::string& id, const SynthSpace& space, const VoiceStyle& style,
                             std::uint64_t seed) {
  if (style.min_frames == 0 || style.min_frames > style.max_frames) {
    throw DataError("speaker '" + id + "': invalid frames-per-character range");
  }
  SpeakerTemplate t;
  t.speaker = id;
  t.charset = space.charset;
  t.bases = space.bases;
  t.offset = Tensor({space.feature_dim()});
  t.noise_scale = style.noise_scale;
  t.min_frames = style.min_frames;
  t.max_frames = style.max_frames;
  t.seed = seed;
  Rng rng(seed);
  for (auto& v : t.bases.values()) v += static_cast<float>(style.spread * rng.normal());
  for (auto& v : t.offset.values()) v = static_cast<float>(style.offset_scale * rng.normal());
  return t;
}

Tensor synthesize_features(const AnnotatedUtterance& u, const SpeakerTemplate& speaker) {
  if (!u.words || u.words->empty()) {
    throw DataError("utterance '" + u.id + "': synthesis requires a transcript");
  }
  const std::string text = join_words(*u.words);
  std::vector<std::size_t> chars;
  for (char c : text) {
    const auto pos = speaker.charset.find(c);
    if (pos == std::string::npos) {
      throw DataError("utterance '" + u.id + "': speaker '" + speaker.speaker +
                      "' cannot voice character '" + std::string(1, c) + "'");
    }
    chars.push_back(pos);
  }
  Rng durations(mix_seed(speaker.seed, fnv1a64(text)));
  std::vector<std::size_t> repeat(chars.size());
  std::size_t frames = 0;
  for (auto& r : repeat) {
    r = durations.between(speaker.min_frames, speaker.max_frames);
    frames += r;
  }
  const std::size_t f = speaker.bases.dim(1);
  Tensor out({frames, f});
  Rng noise(mix_seed(speaker.seed, fnv1a64(u.id + "\n" + text)));
  std::size_t t = 0;
  for (std::size_t k = 0; k < chars.size(); ++k) {
    const auto base = speaker.bases.row(chars[k]);
    for (std::size_t r = 0; r < repeat[k]; ++r, ++t) {
      auto frame = out.row(t);
      for (std::size_t d = 0; d < f; ++d) {
        double v = base[d] + speaker.offset[d];
        if (speaker.noise_scale != 0.0) v += speaker.noise_scale * noise.normal();
        frame[d] = static_cast<float>(v);
      }
    }
  }
  return out;
}

void SpeakerBank::add(SpeakerTemplate t) {
  const std::string id = t.speaker;
  if (!speakers_.emplace(id, std::move(t)).second) throw DataError("duplicate speaker '" + id + "'");
}

const SpeakerTemplate& SpeakerBank::get(const std::string& id) const {
  auto it = speakers_.find(id);
  if (it == speakers_.end()) throw DataError("unknown speaker '" + id + "'");
  return it->second;
}

std::vector<std::string> SpeakerBank::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, t] : speakers_) out.push_back(id);
  return out;
}

SpeakerPools make_speaker_pools(const SynthSpace& space, const SpeakerPoolOptions& options,
                                std::uint64_t seed) {
  SpeakerPools pools;
  auto add_pool = [&](const std::string& prefix, std::size_t n, const VoiceStyle& style,
                      std::uint64_t stream, std::vector<std::string>& ids) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::string id = prefix + "-" + std::to_string(k);
      pools.bank.add(make_speaker(id, space, style, mix_seed(mix_seed(seed, stream), k)));
      ids.push_back(id);
    }
  };
  add_pool("real-train", options.real_train, options.real_style, 1, pools.real_train);
  add_pool("real-test", options.real_test, options.real_style, 2, pools.real_test);

  Rng shift_rng(mix_seed(seed, 3));
  std::vector<float> shift(space.feature_dim());
  for (auto& v : shift) v = static_cast<float>(options.tts_shift_scale * shift_rng.normal());
  for (std::size_t k = 0; k < options.tts; ++k) {
    const std::string id = "tts-" + std::to_string(k);
    auto t = make_speaker(id, space, options.tts_style, mix_seed(mix_seed(seed, 4), k));
    for (std::size_t d = 0; d < shift.size(); ++d) t.offset[d] += shift[d];
    pools.bank.add(std::move(t));
    pools.tts.push_back(id);
  }
  return pools;
}

void synthesize_corpus(std::vector<AnnotatedUtterance>& corpus, const SpeakerBank& bank) {
  for (auto& u : corpus) u.features = synthesize_features(u, bank.get(u.speaker));
}

void assign_speakers(std::vector<AnnotatedUtterance>& corpus, const std::vector<std::string>& speakers) {
  if (speakers.empty()) throw DataError("no speakers to assign");
  for (std::size_t i = 0; i < corpus.size(); ++i) corpus[i].speaker = speakers[i % speakers.size()];
}

}  // namespace tslu
