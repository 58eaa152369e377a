// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tslu/lattice.hpp"
#include "tslu/layers.hpp"
#include "tslu/tensor.hpp"
#include "tslu/vocab.hpp"

namespace tslu {

// Transducer topology. The defaults are a desk-scale version of a
// 6x640 BLSTM / 768-cell prediction net / 256-dim joint model.
struct ModelConfig {
  std::size_t feature_dim = 16;
  std::size_t enc_layers = 2;
  std::size_t enc_cells_per_dir = 32;
  std::size_t pred_embed_dim = 16;
  std::size_t pred_cells = 48;
  std::size_t joint_dim = 32;
  Vocab vocab = Vocab::from_characters(Vocab::kDeskCharset);

  std::size_t encoder_width() const { return 2 * enc_cells_per_dir; }
  // Throws DataError when any dimension is zero.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

inline constexpr std::string_view kTranscriptionPrefix = "transcription";
inline constexpr std::string_view kPredictionPrefix = "prediction";
inline constexpr std::string_view kJointPrefix = "joint";

template <typename Real>
using ParamTree = std::map<std::string, BasicTensor<Real>>;

struct ParamSpec {
  std::string name;
  Shape dims;
  std::size_t fan_in;
};

// Every parameter of a model with this config, in a stable order.
std::vector<ParamSpec> parameter_specs(const ModelConfig& config);

// Returns "transcription", "prediction" or "joint" for a parameter name.
std::string_view subnetwork_of(std::string_view param_name);

template <typename Real>
struct BasicModel {
  ModelConfig config;
  ParamTree<Real> params;

  const BasicTensor<Real>& param(const std::string& name) const;
  BasicTensor<Real>& param(const std::string& name);
  const Vocab& vocab() const { return config.vocab; }
  std::size_t parameter_count() const;

  template <typename To>
  BasicModel<To> cast() const {
    BasicModel<To> out{config, {}};
    for (const auto& [name, t] : params) out.params.emplace(name, t.template cast<To>());
    return out;
  }
};

using Model = BasicModel<float>;
using Model64 = BasicModel<double>;

// Random init, uniform +-1/sqrt(fan_in) per tensor, seeded.
template <typename Real>
BasicModel<Real> make_model(const ModelConfig& config, std::uint64_t seed);

template <typename Real>
BasicModel<Real> make_zero_model(const ModelConfig& config);

// Throws ShapeError unless the model's parameter names and shapes match its
// config exactly.
template <typename Real>
void validate_model(const BasicModel<Real>& m);

template <typename Real>
ParamTree<Real> zero_grads(const BasicModel<Real>& m);

// ---- forward passes -------------------------------------------------------

template <typename Real>
struct EncodeTape {
  std::vector<LstmSequenceTape<Real>> forward_layers, backward_layers;
};

template <typename Real>
struct EncodeResult {
  BasicTensor<Real> enc;  // [T, 2 * enc_cells_per_dir]
  EncodeTape<Real> tape;
};

template <typename Real>
EncodeResult<Real> encode(const BasicModel<Real>& m, const BasicTensor<Real>& feats);

template <typename Real>
struct PredictTape {
  EmbeddingTape<Real> embedding;
  LstmSequenceTape<Real> lstm;
};

template <typename Real>
struct PredictResult {
  BasicTensor<Real> states;  // [U+1, pred_cells]; row 0 is the start state
  PredictTape<Real> tape;
};

// The start-of-sequence input is the embedding row of BLANK, which never
// occurs as a target symbol.
template <typename Real>
PredictResult<Real> predict(const BasicModel<Real>& m, std::span<const SymbolId> target);

template <typename Real>
struct JointTape {
  BasicTensor<Real> enc, pred;  // inputs
  BasicTensor<Real> hidden;     // [T*(U+1), joint_dim], post-tanh
  TapeState state;
};

template <typename Real>
struct JointResult {
  JointLogProbs<Real> log_probs;
  BasicTensor<Real> logits;  // [T, U+1, V], pre-softmax
  JointTape<Real> tape;
};

// logp[t,u,:] = log_softmax(W_out tanh(A enc[t] + B pred[u] + b) + b_out)
template <typename Real>
JointResult<Real> joint(const BasicModel<Real>& m, const BasicTensor<Real>& enc,
                        const BasicTensor<Real>& pred, std::span<const SymbolId> target);

// ---- backward passes ------------------------------------------------------

template <typename Real>
struct JointInputGrads {
  BasicTensor<Real> denc, dpred;
};

// `dlogits` is [T, U+1, V]; parameter gradients are accumulated into `grads`.
template <typename Real>
JointInputGrads<Real> joint_backward(const BasicModel<Real>& m, JointTape<Real>& tape,
                                     const BasicTensor<Real>& dlogits, ParamTree<Real>& grads);

template <typename Real>
void predict_backward(const BasicModel<Real>& m, PredictTape<Real>& tape,
                      const BasicTensor<Real>& dstates, ParamTree<Real>& grads);

template <typename Real>
void encode_backward(const BasicModel<Real>& m, EncodeTape<Real>& tape,
                     const BasicTensor<Real>& denc, ParamTree<Real>& grads);

template <typename Real>
struct LossAndGrads {
  Real loss = 0;
  ParamTree<Real> grads;
};

template <typename Real>
LossAndGrads<Real> utterance_loss_and_grads(const BasicModel<Real>& m,
                                            const BasicTensor<Real>& feats,
                                            std::span<const SymbolId> target);

// Forward only.
template <typename Real>
Real utterance_loss(const BasicModel<Real>& m, const BasicTensor<Real>& feats,
                    std::span<const SymbolId> target);

}  // namespace tslu
