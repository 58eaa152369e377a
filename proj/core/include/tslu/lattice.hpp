// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "tslu/tensor.hpp"
#include "tslu/vocab.hpp"

namespace tslu {

// Joint-network output for one utterance: log-probabilities over the
// vocabulary (BLANK = 0) at every lattice node (t, u).
template <typename Real>
struct JointLogProbs {
  BasicTensor<Real> logp;         // [T, U+1, V]
  std::vector<SymbolId> target;  // y_1..y_U, none BLANK

  std::size_t frames() const { return logp.dim(0); }
  std::size_t target_length() const { return target.size(); }
  std::size_t vocab_size() const { return logp.dim(2); }
};

// Forward/backward variables over the (T, U+1) emission lattice, 0-based:
// alpha(0,0) = 0 and the terminal emission is the blank at (T-1, U).
template <typename Real>
struct Lattice {
  BasicTensor<Real> alpha;  // [T, U+1]
  BasicTensor<Real> beta;   // [T, U+1]
  Real loss = 0;            // -log P(y | x), nats
};

// Throws DataError / ShapeError on malformed input (BLANK or out-of-range
// target ids, shape disagreeing with the target length).
template <typename Real>
void validate_joint(const JointLogProbs<Real>& j);

template <typename Real>
Lattice<Real> forward_loss(const JointLogProbs<Real>& j);

// d loss / d logits, where logp = log_softmax(logits) along the last axis.
template <typename Real>
BasicTensor<Real> logit_gradients(const JointLogProbs<Real>& j, const Lattice<Real>& lat);

// Same gradient with respect to the log-probabilities themselves (the
// negated edge occupancies); exposed for the cut-identity tests.
template <typename Real>
BasicTensor<Real> logprob_gradients(const JointLogProbs<Real>& j, const Lattice<Real>& lat);

// Exhaustive sum over every monotone alignment, accumulated in long double.
// Limited to T <= 6 and U <= 5.
template <typename Real>
long double oracle_loss(const JointLogProbs<Real>& j);

inline constexpr std::size_t kOracleMaxFrames = 6;
inline constexpr std::size_t kOracleMaxTarget = 5;

}  // namespace tslu
