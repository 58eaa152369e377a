// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tslu/network.hpp"

namespace tslu {

// New output symbols to graft onto a trained model.
struct VocabExtension {
  std::vector<std::string> new_symbols;
  std::uint64_t init_seed = 0;
};

// Appends rows for the new symbols to joint.output.{weight,bias} and to
// prediction.embedding. New rows are drawn uniform +-1/sqrt(fan_in) from the
// extension seed; every other parameter value is copied bit for bit.
// Throws DataError naming the first duplicate symbol.
template <typename Real>
BasicModel<Real> extend_vocab(const BasicModel<Real>& m, const VocabExtension& ext);

struct PreservationReport {
  std::size_t probes = 0;
  std::size_t old_symbols = 0;
  std::size_t new_symbols = 0;
  // Largest |logit_new - logit_old| over old symbols; zero after a faithful
  // extension.
  double max_old_logit_deviation = 0.0;
  // Largest change of old-symbol log-probabilities. Non-zero is expected:
  // the softmax now normalizes over more outputs.
  double max_old_logprob_change = 0.0;
  bool logits_bit_identical = true;

  bool passed() const { return logits_bit_identical && max_old_logit_deviation == 0.0; }
};

struct Probe {
  Tensor features;
  std::vector<SymbolId> target;  // ids valid in the old vocabulary
};

// Compares pre-softmax logits of the original symbols between `before` and
// `after` on probes whose targets use only original symbols. Throws
// DataError when `after` is not a vocabulary extension of `before`.
PreservationReport logit_preservation_check(const Model& before, const Model& after,
                                            const std::vector<Probe>& probes);

}  // namespace tslu
