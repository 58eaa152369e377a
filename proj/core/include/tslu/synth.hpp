// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tslu/tensor.hpp"
#include "tslu/utterance.hpp"

namespace tslu {

// Shared acoustic space: one base vector per character.
struct SynthSpace {
  std::string charset;
  Tensor bases;  // [charset.size(), F]

  std::size_t feature_dim() const { return bases.dim(1); }
};

SynthSpace make_synth_space(std::string charset, std::size_t feature_dim, std::uint64_t seed);

struct VoiceStyle {
  double spread = 0.35;        // per-speaker perturbation of the character bases
  double offset_scale = 0.5;   // per-speaker constant offset
  double noise_scale = 0.3;    // per-frame Gaussian noise
  std::size_t min_frames = 1;  // frames per character
  std::size_t max_frames = 2;
};

struct SpeakerTemplate {
  std::string speaker;
  std::string charset;
  Tensor bases;   // [C, F], already perturbed for this speaker
  Tensor offset;  // [F]
  double noise_scale = 0.0;
  std::size_t min_frames = 1;
  std::size_t max_frames = 1;
  std::uint64_t seed = 0;
};

SpeakerTemplate make_speaker(const std::string& id, const SynthSpace& space, const VoiceStyle& style,
                             std::uint64_t seed);

// Per-character frames plus offset plus noise. Durations depend on the
// speaker seed and the text; the noise also on the utterance id. Throws
// DataError when the transcript is missing or empty or uses a character the
// template cannot voice.
Tensor synthesize_features(const AnnotatedUtterance& u, const SpeakerTemplate& speaker);

// Speakers by id.
class SpeakerBank {
 public:
  void add(SpeakerTemplate t);
  const SpeakerTemplate& get(const std::string& id) const;
  bool contains(const std::string& id) const { return speakers_.count(id) != 0; }
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, SpeakerTemplate> speakers_;
};

struct SpeakerPoolOptions {
  std::size_t real_train = 8;
  std::size_t real_test = 4;
  std::size_t tts = 8;
  VoiceStyle real_style{0.15, 0.3, 0.6, 1, 2};
  // Synthetic voices are cleaner than real ones and differ more from each
  // other. A nonzero shift scale adds a channel shift shared by all of them.
  VoiceStyle tts_style{0.35, 0.6, 0.1, 1, 2};
  double tts_shift_scale = 0.0;
};

// "real-train-k", "real-test-k" and "tts-k" speakers over one space.
// The test speakers never appear in the other two pools.
struct SpeakerPools {
  SpeakerBank bank;
  std::vector<std::string> real_train, real_test, tts;
};

SpeakerPools make_speaker_pools(const SynthSpace& space, const SpeakerPoolOptions& options,
                                std::uint64_t seed);

// Fills `features` of every utterance from the bank entry named by its speaker.
void synthesize_corpus(std::vector<AnnotatedUtterance>& corpus, const SpeakerBank& bank);

// Reassigns speakers round-robin from `speakers`.
void assign_speakers(std::vector<AnnotatedUtterance>& corpus, const std::vector<std::string>& speakers);

}  // namespace tslu
