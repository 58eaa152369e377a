// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include "tslu/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kernels.hpp"
#include "tslu/rng.hpp"

namespace tslu {

void TapeState::consume(const char* layer) {
  if (consumed_) throw TapeError(std::string(layer) + ": tape already consumed");
  consumed_ = true;
}

namespace {

template <typename Real>
void require_rank(const BasicTensor<Real>& t, std::size_t rank, const char* what) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_string(t.dims()));
  }
}

template <typename Real>
void check_lstm_weights(const LstmWeights<Real>& w) {
  require_rank(w.w_input, 2, "lstm w_input");
  require_rank(w.w_recurrent, 2, "lstm w_recurrent");
  require_rank(w.bias, 1, "lstm bias");
  const std::size_t h = w.w_recurrent.dim(1);
  if (w.w_recurrent.dim(0) != 4 * h || w.w_input.dim(0) != 4 * h || w.bias.dim(0) != 4 * h) {
    throw ShapeError("lstm weights inconsistent: w_input " + shape_string(w.w_input.dims()) +
                     ", w_recurrent " + shape_string(w.w_recurrent.dims()) + ", bias " +
                     shape_string(w.bias.dims()));
  }
}

template <typename Real>
bool finite_span(std::span<const Real> v) {
  return std::all_of(v.begin(), v.end(), [](Real x) { return std::isfinite(x); });
}

// Applies the gate nonlinearities in place to pre-activations `g` (4H) and
// returns the new cell state in `c` and tanh(c) in `tc`.
template <typename Real>
void lstm_pointwise(Real* g, const Real* c_prev, Real* c, Real* tc, Real* h, std::size_t hidden) {
  Real* gi = g;
  Real* gf = g + hidden;
  Real* gg = g + 2 * hidden;
  Real* go = g + 3 * hidden;
  for (std::size_t j = 0; j < hidden; ++j) {
    gi[j] = kernels::sigmoid(gi[j]);
    gf[j] = kernels::sigmoid(gf[j]);
    gg[j] = std::tanh(gg[j]);
    go[j] = kernels::sigmoid(go[j]);
    c[j] = gf[j] * c_prev[j] + gi[j] * gg[j];
    tc[j] = std::tanh(c[j]);
    h[j] = go[j] * tc[j];
  }
}

// Given post-activation gates, turns (dh, dc) into gate pre-activation
// gradients `dpre` and the gradient flowing into the previous cell state.
template <typename Real>
void lstm_pointwise_backward(const Real* g, const Real* c_prev, const Real* tc, const Real* dh,
                             const Real* dc, Real* dpre, Real* dc_prev, std::size_t hidden) {
  const Real* gi = g;
  const Real* gf = g + hidden;
  const Real* gg = g + 2 * hidden;
  const Real* go = g + 3 * hidden;
  for (std::size_t j = 0; j < hidden; ++j) {
    const Real d_o = dh[j] * tc[j];
    const Real dct = dc[j] + dh[j] * go[j] * (Real(1) - tc[j] * tc[j]);
    const Real d_i = dct * gg[j];
    const Real d_g = dct * gi[j];
    const Real d_f = dct * c_prev[j];
    dc_prev[j] = dct * gf[j];
    dpre[j] = d_i * gi[j] * (Real(1) - gi[j]);
    dpre[hidden + j] = d_f * gf[j] * (Real(1) - gf[j]);
    dpre[2 * hidden + j] = d_g * (Real(1) - gg[j] * gg[j]);
    dpre[3 * hidden + j] = d_o * go[j] * (Real(1) - go[j]);
  }
}

}  // namespace

// ---- affine ---------------------------------------------------------------

template <typename Real>
AffineForward<Real> affine_forward(const BasicTensor<Real>& x, const BasicTensor<Real>& weight,
                                   const BasicTensor<Real>& bias) {
  require_rank(x, 2, "affine input");
  require_rank(weight, 2, "affine weight");
  require_rank(bias, 1, "affine bias");
  if (x.dim(1) != weight.dim(1) || bias.dim(0) != weight.dim(0)) {
    throw ShapeError("affine: input " + shape_string(x.dims()) + " incompatible with weight " +
                     shape_string(weight.dims()) + " and bias " + shape_string(bias.dims()));
  }
  const std::size_t n = x.dim(0), in = x.dim(1), out = weight.dim(0);
  BasicTensor<Real> y({n, out});
  for (std::size_t r = 0; r < n; ++r) {
    std::copy(bias.data(), bias.data() + out, y.data() + r * out);
  }
  kernels::matmul_nt(x.data(), weight.data(), y.data(), n, in, out, true);
  return {std::move(y), AffineTape<Real>{x, weight, {}}};
}

template <typename Real>
AffineGrads<Real> affine_backward(AffineTape<Real>& tape, const BasicTensor<Real>& dy) {
  tape.state.consume("affine");
  const std::size_t n = tape.x.dim(0), in = tape.x.dim(1), out = tape.weight.dim(0);
  if (dy.dims() != Shape{n, out}) {
    throw ShapeError("affine backward: upstream " + shape_string(dy.dims()) + " vs output [" +
                     std::to_string(n) + "," + std::to_string(out) + "]");
  }
  AffineGrads<Real> g{BasicTensor<Real>({n, in}), BasicTensor<Real>({out, in}),
                      BasicTensor<Real>({out})};
  kernels::matmul_nn(dy.data(), tape.weight.data(), g.dx.data(), n, out, in, false);
  kernels::matmul_tn(dy.data(), tape.x.data(), g.dweight.data(), n, out, in, false);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t o = 0; o < out; ++o) g.dbias[o] += dy.at(r, o);
  }
  return g;
}

// ---- embedding ------------------------------------------------------------

template <typename Real>
EmbeddingForward<Real> embedding_forward(const BasicTensor<Real>& table,
                                         std::span<const std::size_t> ids) {
  require_rank(table, 2, "embedding table");
  if (ids.empty()) throw ShapeError("embedding: empty id list");
  const std::size_t dim = table.dim(1);
  BasicTensor<Real> rows({ids.size(), dim});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] >= table.dim(0)) {
      throw ShapeError("embedding: id " + std::to_string(ids[r]) + " outside table " +
                       shape_string(table.dims()));
    }
    auto src = table.row(ids[r]);
    std::copy(src.begin(), src.end(), rows.row(r).begin());
  }
  return {std::move(rows),
          EmbeddingTape<Real>{std::vector<std::size_t>(ids.begin(), ids.end()), table.dims(), {}}};
}

template <typename Real>
BasicTensor<Real> embedding_backward(EmbeddingTape<Real>& tape, const BasicTensor<Real>& drows) {
  tape.state.consume("embedding");
  if (drows.dims() != Shape{tape.ids.size(), tape.table_dims[1]}) {
    throw ShapeError("embedding backward: upstream " + shape_string(drows.dims()));
  }
  BasicTensor<Real> dtable(tape.table_dims);
  for (std::size_t r = 0; r < tape.ids.size(); ++r) {
    auto dst = dtable.row(tape.ids[r]);
    auto src = drows.row(r);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
  }
  return dtable;
}

// ---- LSTM cell ------------------------------------------------------------

template <typename Real>
LstmCellForward<Real> lstm_cell_forward(std::span<const Real> x, std::span<const Real> h_prev,
                                        std::span<const Real> c_prev,
                                        const LstmWeights<Real>& weights) {
  check_lstm_weights(weights);
  const std::size_t hidden = weights.hidden(), in = weights.input();
  if (x.size() != in || h_prev.size() != hidden || c_prev.size() != hidden) {
    throw ShapeError("lstm cell: x/h/c sizes " + std::to_string(x.size()) + "/" +
                     std::to_string(h_prev.size()) + "/" + std::to_string(c_prev.size()) +
                     " do not match input " + std::to_string(in) + ", hidden " +
                     std::to_string(hidden));
  }
  if (!finite_span(x) || !finite_span(h_prev) || !finite_span(c_prev)) {
    throw NumericError("lstm cell: non-finite input");
  }
  LstmCellForward<Real> out;
  auto& tape = out.tape;
  tape.w_input = weights.w_input;
  tape.w_recurrent = weights.w_recurrent;
  tape.x.assign(x.begin(), x.end());
  tape.h_prev.assign(h_prev.begin(), h_prev.end());
  tape.c_prev.assign(c_prev.begin(), c_prev.end());
  tape.gates.assign(weights.bias.data(), weights.bias.data() + 4 * hidden);
  kernels::matmul_nt(weights.w_input.data(), x.data(), tape.gates.data(), 4 * hidden, in,
                     std::size_t{1}, true);
  kernels::matmul_nt(weights.w_recurrent.data(), h_prev.data(), tape.gates.data(), 4 * hidden,
                     hidden, std::size_t{1}, true);
  tape.c.resize(hidden);
  tape.tanh_c.resize(hidden);
  out.h.resize(hidden);
  lstm_pointwise(tape.gates.data(), c_prev.data(), tape.c.data(), tape.tanh_c.data(),
                 out.h.data(), hidden);
  out.c = tape.c;
  return out;
}

template <typename Real>
void lstm_cell_step(std::span<const Real> x, std::span<Real> h, std::span<Real> c,
                    const LstmWeights<Real>& weights) {
  const std::size_t hidden = weights.hidden(), in = weights.input();
  if (x.size() != in || h.size() != hidden || c.size() != hidden) {
    throw ShapeError("lstm step: size mismatch");
  }
  std::vector<Real> gates(weights.bias.data(), weights.bias.data() + 4 * hidden);
  kernels::matmul_nt(weights.w_input.data(), x.data(), gates.data(), 4 * hidden, in,
                     std::size_t{1}, true);
  kernels::matmul_nt(weights.w_recurrent.data(), h.data(), gates.data(), 4 * hidden, hidden,
                     std::size_t{1}, true);
  std::vector<Real> c_prev(c.begin(), c.end());
  std::vector<Real> tc(hidden);
  lstm_pointwise(gates.data(), c_prev.data(), c.data(), tc.data(), h.data(), hidden);
}

template <typename Real>
LstmCellGrads<Real> lstm_cell_backward(LstmCellTape<Real>& tape, std::span<const Real> dh,
                                       std::span<const Real> dc) {
  tape.state.consume("lstm cell");
  const std::size_t hidden = tape.w_recurrent.dim(1), in = tape.w_input.dim(1);
  if (dh.size() != hidden || dc.size() != hidden) {
    throw ShapeError("lstm cell backward: upstream size mismatch");
  }
  LstmCellGrads<Real> g;
  std::vector<Real> dpre(4 * hidden);
  g.dc_prev.resize(hidden);
  lstm_pointwise_backward(tape.gates.data(), tape.c_prev.data(), tape.tanh_c.data(), dh.data(),
                          dc.data(), dpre.data(), g.dc_prev.data(), hidden);
  g.dx.assign(in, Real(0));
  g.dh_prev.assign(hidden, Real(0));
  // dx = W_ih^T dpre, dh_prev = W_hh^T dpre
  kernels::matmul_nn(dpre.data(), tape.w_input.data(), g.dx.data(), 1, 4 * hidden, in, false);
  kernels::matmul_nn(dpre.data(), tape.w_recurrent.data(), g.dh_prev.data(), 1, 4 * hidden,
                     hidden, false);
  g.params.dw_input = BasicTensor<Real>({4 * hidden, in});
  g.params.dw_recurrent = BasicTensor<Real>({4 * hidden, hidden});
  g.params.dbias = BasicTensor<Real>({4 * hidden}, dpre);
  kernels::matmul_tn(dpre.data(), tape.x.data(), g.params.dw_input.data(), 1, 4 * hidden, in,
                     false);
  kernels::matmul_tn(dpre.data(), tape.h_prev.data(), g.params.dw_recurrent.data(), 1,
                     4 * hidden, hidden, false);
  return g;
}

// ---- LSTM sequence --------------------------------------------------------

template <typename Real>
LstmSequenceForward<Real> lstm_sequence_forward(const BasicTensor<Real>& x,
                                                const LstmWeights<Real>& weights, bool reverse) {
  check_lstm_weights(weights);
  require_rank(x, 2, "lstm sequence input");
  const std::size_t steps = x.dim(0), in = x.dim(1), hidden = weights.hidden();
  if (in != weights.input()) {
    throw ShapeError("lstm sequence: input " + shape_string(x.dims()) + " vs w_input " +
                     shape_string(weights.w_input.dims()));
  }
  require_finite(x, "lstm sequence input");

  LstmSequenceForward<Real> out;
  auto& tape = out.tape;
  tape.w_input = weights.w_input;
  tape.w_recurrent = weights.w_recurrent;
  tape.x = x;
  tape.reverse = reverse;
  tape.gates = BasicTensor<Real>({steps, 4 * hidden});
  tape.cells = BasicTensor<Real>({steps, hidden});
  tape.tanh_c = BasicTensor<Real>({steps, hidden});
  tape.hidden = BasicTensor<Real>({steps, hidden});

  for (std::size_t t = 0; t < steps; ++t) {
    std::copy(weights.bias.data(), weights.bias.data() + 4 * hidden, tape.gates.row(t).data());
  }
  kernels::matmul_nt(x.data(), weights.w_input.data(), tape.gates.data(), steps, in,
                     4 * hidden, true);

  const std::vector<Real> zeros(hidden, Real(0));
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t t = reverse ? steps - 1 - s : s;
    const Real* h_prev = zeros.data();
    const Real* c_prev = zeros.data();
    if (s > 0) {
      const std::size_t p = reverse ? t + 1 : t - 1;
      h_prev = tape.hidden.row(p).data();
      c_prev = tape.cells.row(p).data();
    }
    Real* g = tape.gates.row(t).data();
    kernels::matmul_nt(weights.w_recurrent.data(), h_prev, g, 4 * hidden, hidden, std::size_t{1},
                       true);
    lstm_pointwise(g, c_prev, tape.cells.row(t).data(), tape.tanh_c.row(t).data(),
                   tape.hidden.row(t).data(), hidden);
  }
  out.hidden = tape.hidden;
  return out;
}

template <typename Real>
LstmSequenceGrads<Real> lstm_sequence_backward(LstmSequenceTape<Real>& tape,
                                               const BasicTensor<Real>& dhidden) {
  tape.state.consume("lstm sequence");
  const std::size_t steps = tape.x.dim(0), in = tape.x.dim(1);
  const std::size_t hidden = tape.w_recurrent.dim(1);
  if (dhidden.dims() != Shape{steps, hidden}) {
    throw ShapeError("lstm sequence backward: upstream " + shape_string(dhidden.dims()));
  }
  BasicTensor<Real> dpre({steps, 4 * hidden});
  // Hidden state fed into each step; zero for the first processed frame.
  BasicTensor<Real> h_in({steps, hidden});
  std::vector<Real> dh(hidden), dc(hidden, Real(0)), dc_prev(hidden), dh_rec(hidden, Real(0));
  const std::vector<Real> zeros(hidden, Real(0));

  for (std::size_t s = steps; s-- > 0;) {
    const std::size_t t = tape.reverse ? steps - 1 - s : s;
    const Real* c_prev = zeros.data();
    if (s > 0) {
      const std::size_t p = tape.reverse ? t + 1 : t - 1;
      c_prev = tape.cells.row(p).data();
      auto hp = tape.hidden.row(p);
      std::copy(hp.begin(), hp.end(), h_in.row(t).begin());
    }
    for (std::size_t j = 0; j < hidden; ++j) dh[j] = dhidden.at(t, j) + dh_rec[j];
    Real* dp = dpre.row(t).data();
    lstm_pointwise_backward(tape.gates.row(t).data(), c_prev, tape.tanh_c.row(t).data(),
                            dh.data(), dc.data(), dp, dc_prev.data(), hidden);
    dc = dc_prev;
    kernels::matmul_nn(dp, tape.w_recurrent.data(), dh_rec.data(), 1, 4 * hidden, hidden, false);
  }

  LstmSequenceGrads<Real> g;
  g.dx = BasicTensor<Real>({steps, in});
  kernels::matmul_nn(dpre.data(), tape.w_input.data(), g.dx.data(), steps, 4 * hidden, in,
                     false);
  g.params.dw_input = BasicTensor<Real>({4 * hidden, in});
  kernels::matmul_tn(dpre.data(), tape.x.data(), g.params.dw_input.data(), steps, 4 * hidden,
                     in, false);
  g.params.dw_recurrent = BasicTensor<Real>({4 * hidden, hidden});
  kernels::matmul_tn(dpre.data(), h_in.data(), g.params.dw_recurrent.data(), steps, 4 * hidden,
                     hidden, false);
  g.params.dbias = BasicTensor<Real>({4 * hidden});
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t j = 0; j < 4 * hidden; ++j) g.params.dbias[j] += dpre.at(t, j);
  }
  return g;
}

// ---- tanh -----------------------------------------------------------------

template <typename Real>
TanhForward<Real> tanh_forward(const BasicTensor<Real>& x) {
  BasicTensor<Real> y = x;
  for (Real& v : y.values()) v = std::tanh(v);
  TanhForward<Real> out{y, TanhTape<Real>{y, {}}};
  return out;
}

template <typename Real>
BasicTensor<Real> tanh_backward(TanhTape<Real>& tape, const BasicTensor<Real>& dy) {
  tape.state.consume("tanh");
  tape.y.require_same_shape(dy, "tanh backward");
  BasicTensor<Real> dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= Real(1) - tape.y[i] * tape.y[i];
  return dx;
}

// ---- log-softmax ----------------------------------------------------------

template <typename Real>
BasicTensor<Real> log_softmax(const BasicTensor<Real>& z) {
  const std::size_t width = z.dims().back();
  BasicTensor<Real> out = z;
  const std::size_t rows = z.size() / width;
  for (std::size_t r = 0; r < rows; ++r) {
    Real* v = out.data() + r * width;
    const Real mx = *std::max_element(v, v + width);
    Real sum = 0;
    for (std::size_t k = 0; k < width; ++k) sum += std::exp(v[k] - mx);
    const Real lse = mx + std::log(sum);
    for (std::size_t k = 0; k < width; ++k) v[k] -= lse;
  }
  return out;
}

template <typename Real>
LogSoftmaxForward<Real> log_softmax_forward(const BasicTensor<Real>& z) {
  BasicTensor<Real> out = log_softmax(z);
  return {out, LogSoftmaxTape<Real>{out, {}}};
}

template <typename Real>
BasicTensor<Real> log_softmax_backward(LogSoftmaxTape<Real>& tape, const BasicTensor<Real>& dy) {
  tape.state.consume("log_softmax");
  tape.out.require_same_shape(dy, "log_softmax backward");
  const std::size_t width = dy.dims().back();
  const std::size_t rows = dy.size() / width;
  BasicTensor<Real> dz = dy;
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* g = dy.data() + r * width;
    const Real* lp = tape.out.data() + r * width;
    Real total = 0;
    for (std::size_t k = 0; k < width; ++k) total += g[k];
    Real* d = dz.data() + r * width;
    for (std::size_t k = 0; k < width; ++k) d[k] = g[k] - std::exp(lp[k]) * total;
  }
  return dz;
}

template <typename Real>
Real log_add(Real a, Real b) {
  constexpr Real kNegInf = -std::numeric_limits<Real>::infinity();
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

template <typename Real>
void init_uniform_fan_in(BasicTensor<Real>& t, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  for (Real& v : t.values()) v = static_cast<Real>(rng.uniform(-bound, bound));
}

#define TSLU_INSTANTIATE_LAYERS(Real)                                                           \
  template AffineForward<Real> affine_forward(const BasicTensor<Real>&,                         \
                                              const BasicTensor<Real>&,                         \
                                              const BasicTensor<Real>&);                        \
  template AffineGrads<Real> affine_backward(AffineTape<Real>&, const BasicTensor<Real>&);      \
  template EmbeddingForward<Real> embedding_forward(const BasicTensor<Real>&,                   \
                                                    std::span<const std::size_t>);              \
  template BasicTensor<Real> embedding_backward(EmbeddingTape<Real>&, const BasicTensor<Real>&); \
  template LstmCellForward<Real> lstm_cell_forward(std::span<const Real>, std::span<const Real>, \
                                                   std::span<const Real>,                       \
                                                   const LstmWeights<Real>&);                   \
  template void lstm_cell_step(std::span<const Real>, std::span<Real>, std::span<Real>,         \
                               const LstmWeights<Real>&);                                       \
  template LstmCellGrads<Real> lstm_cell_backward(LstmCellTape<Real>&, std::span<const Real>,   \
                                                  std::span<const Real>);                       \
  template LstmSequenceForward<Real> lstm_sequence_forward(const BasicTensor<Real>&,            \
                                                           const LstmWeights<Real>&, bool);     \
  template LstmSequenceGrads<Real> lstm_sequence_backward(LstmSequenceTape<Real>&,              \
                                                          const BasicTensor<Real>&);            \
  template TanhForward<Real> tanh_forward(const BasicTensor<Real>&);                            \
  template BasicTensor<Real> tanh_backward(TanhTape<Real>&, const BasicTensor<Real>&);          \
  template BasicTensor<Real> log_softmax(const BasicTensor<Real>&);                             \
  template LogSoftmaxForward<Real> log_softmax_forward(const BasicTensor<Real>&);               \
  template BasicTensor<Real> log_softmax_backward(LogSoftmaxTape<Real>&,                        \
                                                  const BasicTensor<Real>&);                    \
  template Real log_add(Real, Real);                                                            \
  template void init_uniform_fan_in(BasicTensor<Real>&, std::size_t, Rng&);

TSLU_INSTANTIATE_LAYERS(float)
TSLU_INSTANTIATE_LAYERS(double)

}  // namespace tslu
