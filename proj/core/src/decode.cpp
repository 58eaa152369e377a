// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include "tslu/decode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kernels.hpp"
#include "tslu/error.hpp"
#include "tslu/parallel.hpp"

namespace tslu {

Hypothesis greedy_walk(std::size_t frames, const StepScorer& scorer,
                       std::size_t max_symbols_per_frame) {
  if (max_symbols_per_frame == 0) throw DataError("max_symbols_per_frame must be at least 1");
  Hypothesis hyp;
  for (std::size_t t = 0; t < frames; ++t) {
    std::size_t emitted = 0;
    while (true) {
      const std::vector<float> logp = scorer(t, hyp.symbols);
      std::size_t best = 0;
      for (std::size_t k = 1; k < logp.size(); ++k) {
        if (logp[k] > logp[best]) best = k;
      }
      hyp.log_score += logp[best];
      if (best == 0) break;
      hyp.symbols.push_back(best);
      hyp.frames.push_back(t);
      if (++emitted == max_symbols_per_frame) break;
    }
  }
  return hyp;
}

namespace {

// Incremental joint evaluation: encoder projections are computed once; the
// prediction state advances one symbol at a time.
class ModelScorer {
 public:
  ModelScorer(const Model& m, const Tensor& feats) : m_(m) {
    const auto& c = m.config;
    J_ = c.joint_dim;
    V_ = c.vocab.size();
    const auto enc = encode(m, feats).enc;
    const std::size_t T = enc.dim(0);
    enc_proj_ = Tensor({T, J_});
    const auto& bias = m.param("joint.bias");
    for (std::size_t t = 0; t < T; ++t) std::copy(bias.data(), bias.data() + J_, enc_proj_.row(t).data());
    kernels::matmul_nt(enc.data(), m.param("joint.enc_proj.weight").data(), enc_proj_.data(), T,
                       c.encoder_width(), J_, true);
    h_.assign(c.pred_cells, 0.0f);
    c_.assign(c.pred_cells, 0.0f);
    advance(0);
  }

  std::size_t frames() const { return enc_proj_.dim(0); }

  std::vector<float> operator()(std::size_t t, std::span<const SymbolId> history) {
    while (consumed_ < history.size()) advance(history[consumed_++]);
    std::vector<float> hidden(J_);
    const float* a = enc_proj_.row(t).data();
    for (std::size_t j = 0; j < J_; ++j) hidden[j] = std::tanh(a[j] + pred_proj_[j]);
    std::vector<float> logits(m_.param("joint.output.bias").values().begin(),
                              m_.param("joint.output.bias").values().end());
    kernels::matmul_nt_fixed(hidden.data(), m_.param("joint.output.weight").data(), logits.data(),
                             std::size_t{1}, J_, V_, true);
    const float mx = *std::max_element(logits.begin(), logits.end());
    float sum = 0.0f;
    for (float v : logits) sum += std::exp(v - mx);
    const float lse = mx + std::log(sum);
    for (float& v : logits) v -= lse;
    return logits;
  }

 private:
  void advance(SymbolId symbol) {
    const auto& emb = m_.param("prediction.embedding");
    const LstmWeights<float> w{m_.param("prediction.lstm.w_input"),
                               m_.param("prediction.lstm.w_recurrent"),
                               m_.param("prediction.lstm.bias")};
    lstm_cell_step<float>(emb.row(symbol), h_, c_, w);
    pred_proj_.assign(J_, 0.0f);
    kernels::matmul_nt(m_.param("joint.pred_proj.weight").data(), h_.data(), pred_proj_.data(), J_,
                       m_.config.pred_cells, std::size_t{1}, false);
  }

  const Model& m_;
  std::size_t J_ = 0, V_ = 0;
  Tensor enc_proj_;
  std::vector<float> h_, c_, pred_proj_;
  std::size_t consumed_ = 0;
};

}  // namespace

Hypothesis greedy_decode(const Model& m, const Tensor& feats, std::size_t max_symbols_per_frame) {
  ModelScorer scorer(m, feats);
  return greedy_walk(
      scorer.frames(),
      [&scorer](std::size_t t, std::span<const SymbolId> history) { return scorer(t, history); },
      max_symbols_per_frame);
}

std::vector<Hypothesis> decode_all(const Model& m, std::span<const Tensor* const> feats,
                                   std::size_t threads, std::size_t max_symbols_per_frame) {
  std::vector<Hypothesis> out(feats.size());
  parallel_for(feats.size(), threads,
               [&](std::size_t i) { out[i] = greedy_decode(m, *feats[i], max_symbols_per_frame); });
  return out;
}

}  // namespace tslu
