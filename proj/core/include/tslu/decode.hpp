// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "tslu/network.hpp"

namespace tslu {

struct Hypothesis {
  std::vector<SymbolId> symbols;  // never BLANK
  std::vector<std::size_t> frames;  // emission frame of each symbol
  double log_score = 0.0;           // sum of chosen log-probabilities, blanks included
};

inline constexpr std::size_t kDefaultMaxSymbolsPerFrame = 5;

// Log-probabilities over the vocabulary at frame t given the symbols
// emitted so far.
using StepScorer = std::function<std::vector<float>(std::size_t t, std::span<const SymbolId> history)>;

// The greedy transducer walk: argmax at each node (lowest id wins ties); a
// BLANK advances t, anything else is emitted and the walk stays on t. After
// `max_symbols_per_frame` emissions on one frame the walk advances anyway.
Hypothesis greedy_walk(std::size_t frames, const StepScorer& scorer,
                       std::size_t max_symbols_per_frame = kDefaultMaxSymbolsPerFrame);

Hypothesis greedy_decode(const Model& m, const Tensor& feats,
                         std::size_t max_symbols_per_frame = kDefaultMaxSymbolsPerFrame);

// One hypothesis per feature sequence, in input order for any thread count.
std::vector<Hypothesis> decode_all(const Model& m, std::span<const Tensor* const> feats,
                                   std::size_t threads,
                                   std::size_t max_symbols_per_frame = kDefaultMaxSymbolsPerFrame);

}  // namespace tslu
