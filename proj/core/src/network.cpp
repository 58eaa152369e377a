// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include "tslu/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kernels.hpp"
#include "tslu/error.hpp"
#include "tslu/rng.hpp"

namespace tslu {

namespace {

std::string layer_prefix(std::size_t layer, bool backward) {
  return "transcription.layer" + std::to_string(layer) + (backward ? ".bwd" : ".fwd");
}

template <typename Real>
LstmWeights<Real> lstm_weights(const BasicModel<Real>& m, const std::string& prefix) {
  return {m.param(prefix + ".w_input"), m.param(prefix + ".w_recurrent"), m.param(prefix + ".bias")};
}

template <typename Real>
void add_lstm_grads(ParamTree<Real>& grads, const std::string& prefix, const LstmGrads<Real>& g) {
  grads.at(prefix + ".w_input") += g.dw_input;
  grads.at(prefix + ".w_recurrent") += g.dw_recurrent;
  grads.at(prefix + ".bias") += g.dbias;
}

}  // namespace

void ModelConfig::validate() const {
  if (feature_dim == 0 || enc_layers == 0 || enc_cells_per_dir == 0 || pred_embed_dim == 0 ||
      pred_cells == 0 || joint_dim == 0) {
    throw DataError("model config dimensions must all be positive");
  }
  if (vocab.size() < 2) throw DataError("model vocabulary needs BLANK plus at least one symbol");
}

std::vector<ParamSpec> parameter_specs(const ModelConfig& c) {
  c.validate();
  std::vector<ParamSpec> specs;
  const std::size_t H = c.enc_cells_per_dir;
  for (std::size_t l = 0; l < c.enc_layers; ++l) {
    const std::size_t in = l == 0 ? c.feature_dim : 2 * H;
    for (bool bwd : {false, true}) {
      const std::string p = layer_prefix(l, bwd);
      specs.push_back({p + ".w_input", {4 * H, in}, in});
      specs.push_back({p + ".w_recurrent", {4 * H, H}, H});
      specs.push_back({p + ".bias", {4 * H}, H});
    }
  }
  const std::size_t V = c.vocab.size(), E = c.pred_embed_dim, P = c.pred_cells, J = c.joint_dim;
  specs.push_back({"prediction.embedding", {V, E}, E});
  specs.push_back({"prediction.lstm.w_input", {4 * P, E}, E});
  specs.push_back({"prediction.lstm.w_recurrent", {4 * P, P}, P});
  specs.push_back({"prediction.lstm.bias", {4 * P}, P});
  specs.push_back({"joint.enc_proj.weight", {J, 2 * H}, 2 * H});
  specs.push_back({"joint.pred_proj.weight", {J, P}, P});
  specs.push_back({"joint.bias", {J}, 2 * H + P});
  specs.push_back({"joint.output.weight", {V, J}, J});
  specs.push_back({"joint.output.bias", {V}, J});
  return specs;
}

std::string_view subnetwork_of(std::string_view name) {
  for (std::string_view p : {kTranscriptionPrefix, kPredictionPrefix, kJointPrefix}) {
    if (name.starts_with(p) && name.size() > p.size() && name[p.size()] == '.') return p;
  }
  throw DataError("parameter '" + std::string(name) + "' belongs to no sub-network");
}

template <typename Real>
const BasicTensor<Real>& BasicModel<Real>::param(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end()) throw DataError("model has no parameter '" + name + "'");
  return it->second;
}

template <typename Real>
BasicTensor<Real>& BasicModel<Real>::param(const std::string& name) {
  auto it = params.find(name);
  if (it == params.end()) throw DataError("model has no parameter '" + name + "'");
  return it->second;
}

template <typename Real>
std::size_t BasicModel<Real>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : params) n += t.size();
  return n;
}

template <typename Real>
BasicModel<Real> make_model(const ModelConfig& config, std::uint64_t seed) {
  BasicModel<Real> m{config, {}};
  for (const auto& spec : parameter_specs(config)) {
    BasicTensor<Real> t(spec.dims);
    Rng rng(mix_seed(seed, fnv1a64(spec.name)));
    init_uniform_fan_in(t, spec.fan_in, rng);
    m.params.emplace(spec.name, std::move(t));
  }
  return m;
}

template <typename Real>
BasicModel<Real> make_zero_model(const ModelConfig& config) {
  BasicModel<Real> m{config, {}};
  for (const auto& spec : parameter_specs(config)) {
    m.params.emplace(spec.name, BasicTensor<Real>(spec.dims));
  }
  return m;
}

template <typename Real>
void validate_model(const BasicModel<Real>& m) {
  const auto specs = parameter_specs(m.config);
  if (specs.size() != m.params.size()) {
    throw ShapeError("model has " + std::to_string(m.params.size()) + " parameters, config implies " +
                     std::to_string(specs.size()));
  }
  for (const auto& spec : specs) {
    const auto& t = m.param(spec.name);
    if (t.dims() != spec.dims) {
      throw ShapeError("parameter " + spec.name + " has shape " + shape_string(t.dims()) +
                       ", config implies " + shape_string(spec.dims));
    }
  }
}

template <typename Real>
ParamTree<Real> zero_grads(const BasicModel<Real>& m) {
  ParamTree<Real> g;
  for (const auto& [name, t] : m.params) g.emplace(name, BasicTensor<Real>(t.dims()));
  return g;
}

// ---- encode ---------------------------------------------------------------

template <typename Real>
EncodeResult<Real> encode(const BasicModel<Real>& m, const BasicTensor<Real>& feats) {
  const auto& c = m.config;
  if (feats.rank() != 2 || feats.dim(1) != c.feature_dim) {
    throw ShapeError("encode: features " + shape_string(feats.dims()) + " but model expects [T," +
                     std::to_string(c.feature_dim) + "]");
  }
  const std::size_t T = feats.dim(0), H = c.enc_cells_per_dir;
  EncodeResult<Real> out;
  BasicTensor<Real> input = feats;
  for (std::size_t l = 0; l < c.enc_layers; ++l) {
    auto fwd = lstm_sequence_forward(input, lstm_weights(m, layer_prefix(l, false)), false);
    auto bwd = lstm_sequence_forward(input, lstm_weights(m, layer_prefix(l, true)), true);
    BasicTensor<Real> stacked({T, 2 * H});
    for (std::size_t t = 0; t < T; ++t) {
      auto dst = stacked.row(t);
      auto f = fwd.hidden.row(t);
      auto b = bwd.hidden.row(t);
      std::copy(f.begin(), f.end(), dst.begin());
      std::copy(b.begin(), b.end(), dst.begin() + static_cast<std::ptrdiff_t>(H));
    }
    out.tape.forward_layers.push_back(std::move(fwd.tape));
    out.tape.backward_layers.push_back(std::move(bwd.tape));
    input = std::move(stacked);
  }
  out.enc = std::move(input);
  return out;
}

template <typename Real>
void encode_backward(const BasicModel<Real>& m, EncodeTape<Real>& tape,
                     const BasicTensor<Real>& denc, ParamTree<Real>& grads) {
  const auto& c = m.config;
  const std::size_t H = c.enc_cells_per_dir;
  BasicTensor<Real> upstream = denc;
  for (std::size_t l = c.enc_layers; l-- > 0;) {
    const std::size_t T = upstream.dim(0);
    BasicTensor<Real> df({T, H}), db({T, H});
    for (std::size_t t = 0; t < T; ++t) {
      auto src = upstream.row(t);
      std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(H), df.row(t).begin());
      std::copy(src.begin() + static_cast<std::ptrdiff_t>(H), src.end(), db.row(t).begin());
    }
    auto gf = lstm_sequence_backward(tape.forward_layers[l], df);
    auto gb = lstm_sequence_backward(tape.backward_layers[l], db);
    add_lstm_grads(grads, layer_prefix(l, false), gf.params);
    add_lstm_grads(grads, layer_prefix(l, true), gb.params);
    gf.dx += gb.dx;
    upstream = std::move(gf.dx);
  }
}

// ---- predict --------------------------------------------------------------

template <typename Real>
PredictResult<Real> predict(const BasicModel<Real>& m, std::span<const SymbolId> target) {
  std::vector<SymbolId> inputs;
  inputs.reserve(target.size() + 1);
  inputs.push_back(0);
  for (SymbolId y : target) {
    if (y == 0) throw DataError("predict: target contains BLANK");
    if (y >= m.config.vocab.size()) {
      throw DataError("predict: target id " + std::to_string(y) + " outside vocabulary");
    }
    inputs.push_back(y);
  }
  auto emb = embedding_forward(m.param("prediction.embedding"), std::span<const SymbolId>(inputs));
  auto seq = lstm_sequence_forward(emb.rows, lstm_weights(m, "prediction.lstm"), false);
  return {std::move(seq.hidden), PredictTape<Real>{std::move(emb.tape), std::move(seq.tape)}};
}

template <typename Real>
void predict_backward(const BasicModel<Real>&, PredictTape<Real>& tape,
                      const BasicTensor<Real>& dstates, ParamTree<Real>& grads) {
  auto g = lstm_sequence_backward(tape.lstm, dstates);
  add_lstm_grads(grads, "prediction.lstm", g.params);
  grads.at("prediction.embedding") += embedding_backward(tape.embedding, g.dx);
}

// ---- joint ----------------------------------------------------------------

template <typename Real>
JointResult<Real> joint(const BasicModel<Real>& m, const BasicTensor<Real>& enc,
                        const BasicTensor<Real>& pred, std::span<const SymbolId> target) {
  const auto& c = m.config;
  const std::size_t E = c.encoder_width(), P = c.pred_cells, J = c.joint_dim;
  const std::size_t V = c.vocab.size();
  if (enc.rank() != 2 || enc.dim(1) != E || pred.rank() != 2 || pred.dim(1) != P) {
    throw ShapeError("joint: encoder " + shape_string(enc.dims()) + " / prediction " +
                     shape_string(pred.dims()) + " widths do not match config (" +
                     std::to_string(E) + ", " + std::to_string(P) + ")");
  }
  if (pred.dim(0) != target.size() + 1) {
    throw ShapeError("joint: prediction rows " + std::to_string(pred.dim(0)) +
                     " != target length + 1");
  }
  const std::size_t T = enc.dim(0), U1 = pred.dim(0);
  const auto& bias = m.param("joint.bias");

  BasicTensor<Real> enc_proj({T, J});
  for (std::size_t t = 0; t < T; ++t) std::copy(bias.data(), bias.data() + J, enc_proj.row(t).data());
  kernels::matmul_nt(enc.data(), m.param("joint.enc_proj.weight").data(), enc_proj.data(), T, E, J,
                     true);
  BasicTensor<Real> pred_proj({U1, J});
  kernels::matmul_nt(pred.data(), m.param("joint.pred_proj.weight").data(), pred_proj.data(), U1, P,
                     J, false);

  BasicTensor<Real> hidden({T * U1, J});
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t u = 0; u < U1; ++u) {
      Real* h = hidden.row(t * U1 + u).data();
      const Real* a = enc_proj.row(t).data();
      const Real* b = pred_proj.row(u).data();
      for (std::size_t j = 0; j < J; ++j) h[j] = std::tanh(a[j] + b[j]);
    }
  }
  const auto& out_b = m.param("joint.output.bias");
  BasicTensor<Real> logits({T, U1, V});
  for (std::size_t r = 0; r < T * U1; ++r) {
    std::copy(out_b.data(), out_b.data() + V, logits.data() + r * V);
  }
  kernels::matmul_nt_fixed(hidden.data(), m.param("joint.output.weight").data(), logits.data(), T * U1,
                           J, V, true);
  BasicTensor<Real> logp = log_softmax(logits);

  JointResult<Real> out;
  out.log_probs = JointLogProbs<Real>{std::move(logp), std::vector<SymbolId>(target.begin(), target.end())};
  out.logits = std::move(logits);
  out.tape.enc = enc;
  out.tape.pred = pred;
  out.tape.hidden = std::move(hidden);
  return out;
}

template <typename Real>
JointInputGrads<Real> joint_backward(const BasicModel<Real>& m, JointTape<Real>& tape,
                                     const BasicTensor<Real>& dlogits, ParamTree<Real>& grads) {
  tape.state.consume("joint");
  const auto& c = m.config;
  const std::size_t E = c.encoder_width(), P = c.pred_cells, J = c.joint_dim;
  const std::size_t V = c.vocab.size();
  const std::size_t T = tape.enc.dim(0), U1 = tape.pred.dim(0);
  if (dlogits.size() != T * U1 * V) {
    throw ShapeError("joint backward: upstream " + shape_string(dlogits.dims()));
  }
  // Output projection.
  kernels::matmul_tn(dlogits.data(), tape.hidden.data(), grads.at("joint.output.weight").data(),
                     T * U1, V, J, true);
  auto& dout_b = grads.at("joint.output.bias");
  for (std::size_t r = 0; r < T * U1; ++r) {
    const Real* g = dlogits.data() + r * V;
    for (std::size_t k = 0; k < V; ++k) dout_b[k] += g[k];
  }
  BasicTensor<Real> dpre({T * U1, J});
  kernels::matmul_nn(dlogits.data(), m.param("joint.output.weight").data(), dpre.data(), T * U1, V,
                     J, false);
  for (std::size_t i = 0; i < dpre.size(); ++i) {
    dpre[i] *= Real(1) - tape.hidden[i] * tape.hidden[i];
  }
  BasicTensor<Real> denc_proj({T, J}), dpred_proj({U1, J});
  for (std::size_t t = 0; t < T; ++t) {
    Real* de = denc_proj.row(t).data();
    for (std::size_t u = 0; u < U1; ++u) {
      const Real* d = dpre.row(t * U1 + u).data();
      Real* dp = dpred_proj.row(u).data();
      for (std::size_t j = 0; j < J; ++j) {
        de[j] += d[j];
        dp[j] += d[j];
      }
    }
  }
  auto& dbias = grads.at("joint.bias");
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < J; ++j) dbias[j] += denc_proj.at(t, j);
  }
  kernels::matmul_tn(denc_proj.data(), tape.enc.data(), grads.at("joint.enc_proj.weight").data(), T,
                     J, E, true);
  kernels::matmul_tn(dpred_proj.data(), tape.pred.data(), grads.at("joint.pred_proj.weight").data(),
                     U1, J, P, true);
  JointInputGrads<Real> out{BasicTensor<Real>({T, E}), BasicTensor<Real>({U1, P})};
  kernels::matmul_nn(denc_proj.data(), m.param("joint.enc_proj.weight").data(), out.denc.data(), T,
                     J, E, false);
  kernels::matmul_nn(dpred_proj.data(), m.param("joint.pred_proj.weight").data(), out.dpred.data(),
                     U1, J, P, false);
  return out;
}

// ---- composition ----------------------------------------------------------

template <typename Real>
LossAndGrads<Real> utterance_loss_and_grads(const BasicModel<Real>& m,
                                            const BasicTensor<Real>& feats,
                                            std::span<const SymbolId> target) {
  auto enc = encode(m, feats);
  auto pred = predict(m, target);
  auto jr = joint(m, enc.enc, pred.states, target);
  const auto lat = forward_loss(jr.log_probs);
  const auto dlogits = logit_gradients(jr.log_probs, lat);

  LossAndGrads<Real> out{lat.loss, zero_grads(m)};
  auto dinputs = joint_backward(m, jr.tape, dlogits, out.grads);
  predict_backward(m, pred.tape, dinputs.dpred, out.grads);
  encode_backward(m, enc.tape, dinputs.denc, out.grads);
  return out;
}

template <typename Real>
Real utterance_loss(const BasicModel<Real>& m, const BasicTensor<Real>& feats,
                    std::span<const SymbolId> target) {
  auto enc = encode(m, feats);
  auto pred = predict(m, target);
  auto jr = joint(m, enc.enc, pred.states, target);
  return forward_loss(jr.log_probs).loss;
}

#define TSLU_INSTANTIATE_NETWORK(Real)                                                          \
  template struct BasicModel<Real>;                                                             \
  template BasicModel<Real> make_model(const ModelConfig&, std::uint64_t);                      \
  template BasicModel<Real> make_zero_model(const ModelConfig&);                                \
  template void validate_model(const BasicModel<Real>&);                                        \
  template ParamTree<Real> zero_grads(const BasicModel<Real>&);                                 \
  template EncodeResult<Real> encode(const BasicModel<Real>&, const BasicTensor<Real>&);        \
  template void encode_backward(const BasicModel<Real>&, EncodeTape<Real>&,                     \
                                const BasicTensor<Real>&, ParamTree<Real>&);                    \
  template PredictResult<Real> predict(const BasicModel<Real>&, std::span<const SymbolId>);     \
  template void predict_backward(const BasicModel<Real>&, PredictTape<Real>&,                   \
                                 const BasicTensor<Real>&, ParamTree<Real>&);                   \
  template JointResult<Real> joint(const BasicModel<Real>&, const BasicTensor<Real>&,           \
                                   const BasicTensor<Real>&, std::span<const SymbolId>);        \
  template JointInputGrads<Real> joint_backward(const BasicModel<Real>&, JointTape<Real>&,      \
                                                const BasicTensor<Real>&, ParamTree<Real>&);    \
  template LossAndGrads<Real> utterance_loss_and_grads(                                         \
      const BasicModel<Real>&, const BasicTensor<Real>&, std::span<const SymbolId>);            \
  template Real utterance_loss(const BasicModel<Real>&, const BasicTensor<Real>&,               \
                               std::span<const SymbolId>);

TSLU_INSTANTIATE_NETWORK(float)
TSLU_INSTANTIATE_NETWORK(double)

}  // namespace tslu
