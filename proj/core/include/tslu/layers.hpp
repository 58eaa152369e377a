// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tslu/tensor.hpp"

namespace tslu {

// Layer primitives with hand-written backward passes. Every forward returns
// its output together with a tape holding what the backward pass needs; a
// tape can be consumed exactly once.

class TapeState {
 public:
  bool consumed() const { return consumed_; }
  // Marks the tape used; throws TapeError on the second call.
  void consume(const char* layer);

 private:
  bool consumed_ = false;
};

// ---- affine: y = x W^T + b ------------------------------------------------

template <typename Real>
struct AffineTape {
  BasicTensor<Real> x;  // [n, in]
  BasicTensor<Real> weight;  // [out, in]
  TapeState state;
};

template <typename Real>
struct AffineForward {
  BasicTensor<Real> y;  // [n, out]
  AffineTape<Real> tape;
};

template <typename Real>
struct AffineGrads {
  BasicTensor<Real> dx, dweight, dbias;
};

template <typename Real>
AffineForward<Real> affine_forward(const BasicTensor<Real>& x, const BasicTensor<Real>& weight,
                                   const BasicTensor<Real>& bias);

template <typename Real>
AffineGrads<Real> affine_backward(AffineTape<Real>& tape, const BasicTensor<Real>& dy);

// ---- embedding lookup -----------------------------------------------------

template <typename Real>
struct EmbeddingTape {
  std::vector<std::size_t> ids;
  Shape table_dims;
  TapeState state;
};

template <typename Real>
struct EmbeddingForward {
  BasicTensor<Real> rows;  // [n, dim]
  EmbeddingTape<Real> tape;
};

template <typename Real>
EmbeddingForward<Real> embedding_forward(const BasicTensor<Real>& table,
                                         std::span<const std::size_t> ids);

// Returns the dense gradient of the table.
template <typename Real>
BasicTensor<Real> embedding_backward(EmbeddingTape<Real>& tape, const BasicTensor<Real>& drows);

// ---- LSTM -----------------------------------------------------------------
//
// Gate rows are stacked as [input, forget, candidate, output], each `hidden`
// wide, so w_input is [4H, in], w_recurrent is [4H, H] and bias is [4H].

template <typename Real>
struct LstmWeights {
  const BasicTensor<Real>& w_input;
  const BasicTensor<Real>& w_recurrent;
  const BasicTensor<Real>& bias;

  std::size_t hidden() const { return w_recurrent.dim(1); }
  std::size_t input() const { return w_input.dim(1); }
};

template <typename Real>
struct LstmGrads {
  BasicTensor<Real> dw_input, dw_recurrent, dbias;
};

template <typename Real>
struct LstmCellTape {
  BasicTensor<Real> w_input, w_recurrent;
  std::vector<Real> x, h_prev, c_prev;
  std::vector<Real> gates;  // post-activation, 4H
  std::vector<Real> c, tanh_c;
  TapeState state;
};

template <typename Real>
struct LstmCellForward {
  std::vector<Real> h, c;
  LstmCellTape<Real> tape;
};

template <typename Real>
struct LstmCellGrads {
  std::vector<Real> dx, dh_prev, dc_prev;
  LstmGrads<Real> params;
};

template <typename Real>
LstmCellForward<Real> lstm_cell_forward(std::span<const Real> x, std::span<const Real> h_prev,
                                        std::span<const Real> c_prev,
                                        const LstmWeights<Real>& weights);

// Tape-free single step for inference; updates h and c in place.
template <typename Real>
void lstm_cell_step(std::span<const Real> x, std::span<Real> h, std::span<Real> c,
                    const LstmWeights<Real>& weights);

template <typename Real>
LstmCellGrads<Real> lstm_cell_backward(LstmCellTape<Real>& tape, std::span<const Real> dh,
                                       std::span<const Real> dc);

// Whole-sequence LSTM from a zero initial state. With `reverse` the sequence
// is consumed last frame first and outputs stay aligned with input frames.
template <typename Real>
struct LstmSequenceTape {
  BasicTensor<Real> w_input, w_recurrent;
  BasicTensor<Real> x;       // [T, in]
  BasicTensor<Real> gates;   // [T, 4H] post-activation
  BasicTensor<Real> cells;   // [T, H]
  BasicTensor<Real> tanh_c;  // [T, H]
  BasicTensor<Real> hidden;  // [T, H]
  bool reverse = false;
  TapeState state;
};

template <typename Real>
struct LstmSequenceForward {
  BasicTensor<Real> hidden;  // [T, H]
  LstmSequenceTape<Real> tape;
};

template <typename Real>
struct LstmSequenceGrads {
  BasicTensor<Real> dx;
  LstmGrads<Real> params;
};

template <typename Real>
LstmSequenceForward<Real> lstm_sequence_forward(const BasicTensor<Real>& x,
                                                const LstmWeights<Real>& weights, bool reverse);

template <typename Real>
LstmSequenceGrads<Real> lstm_sequence_backward(LstmSequenceTape<Real>& tape,
                                               const BasicTensor<Real>& dhidden);

// ---- elementwise tanh -----------------------------------------------------

template <typename Real>
struct TanhTape {
  BasicTensor<Real> y;
  TapeState state;
};

template <typename Real>
struct TanhForward {
  BasicTensor<Real> y;
  TanhTape<Real> tape;
};

template <typename Real>
TanhForward<Real> tanh_forward(const BasicTensor<Real>& x);

template <typename Real>
BasicTensor<Real> tanh_backward(TanhTape<Real>& tape, const BasicTensor<Real>& dy);

// ---- log-softmax over the trailing axis -----------------------------------

template <typename Real>
BasicTensor<Real> log_softmax(const BasicTensor<Real>& z);

template <typename Real>
struct LogSoftmaxTape {
  BasicTensor<Real> out;
  TapeState state;
};

template <typename Real>
struct LogSoftmaxForward {
  BasicTensor<Real> out;
  LogSoftmaxTape<Real> tape;
};

template <typename Real>
LogSoftmaxForward<Real> log_softmax_forward(const BasicTensor<Real>& z);

template <typename Real>
BasicTensor<Real> log_softmax_backward(LogSoftmaxTape<Real>& tape, const BasicTensor<Real>& dy);

// Stable log(exp(a) + exp(b)); -inf inputs are absorbed.
template <typename Real>
Real log_add(Real a, Real b);

// Uniform [-1/sqrt(fan_in), +1/sqrt(fan_in)] fill.
class Rng;
template <typename Real>
void init_uniform_fan_in(BasicTensor<Real>& t, std::size_t fan_in, Rng& rng);

}  // namespace tslu
