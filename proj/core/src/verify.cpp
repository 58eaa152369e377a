// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include "tslu/verify.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

#include "tslu/lattice.hpp"
#include "tslu/layers.hpp"
#include "tslu/rng.hpp"

namespace tslu {

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

namespace {

using Clock = std::chrono::steady_clock;

class Sweep {
 public:
  Sweep(std::string name, double tolerance) : start_(Clock::now()) {
    r_.name = std::move(name);
    r_.tolerance = tolerance;
  }

  void compare(double error, const std::string& where) {
    ++r_.checks;
    if (!(error <= r_.tolerance)) {
      if (r_.failures++ == 0) r_.first_failure = where + ": error " + std::to_string(error);
    }
    if (std::isnan(error) || error > r_.worst) r_.worst = error;
  }
  void instance() { ++r_.instances; }

  SweepResult finish() {
    r_.seconds = std::chrono::duration<double>(Clock::now() - start_).count();
    return r_;
  }

 private:
  SweepResult r_;
  Clock::time_point start_;
};

BasicTensor<double> random_tensor(Shape dims, Rng& rng, double scale = 1.0) {
  BasicTensor<double> t(std::move(dims));
  for (auto& v : t.values()) v = scale * rng.normal();
  return t;
}

JointLogProbs<double> random_joint(Rng& rng, BasicTensor<double>* logits_out = nullptr) {
  const std::size_t T = rng.between(1, 4), U = rng.between(0, 3), V = rng.between(2, 4);
  auto logits = random_tensor({T, U + 1, V}, rng, 1.5);
  JointLogProbs<double> j{log_softmax(logits), {}};
  for (std::size_t u = 0; u < U; ++u) j.target.push_back(rng.between(1, V - 1));
  if (logits_out) *logits_out = std::move(logits);
  return j;
}

double weighted_sum(const BasicTensor<double>& y, const BasicTensor<double>& r) {
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * r[i];
  return s;
}

double weighted_sum(std::span<const double> y, std::span<const double> r) {
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * r[i];
  return s;
}

// Central difference of f with respect to *x.
double central_difference(double& x, const std::function<double()>& f) {
  const double keep = x;
  x = keep + kFiniteDifferenceStep;
  const double up = f();
  x = keep - kFiniteDifferenceStep;
  const double down = f();
  x = keep;
  return (up - down) / (2 * kFiniteDifferenceStep);
}

void check_all(Sweep& sweep, const std::string& label, std::span<double> values,
               std::span<const double> analytic, const std::function<double()>& f) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double numeric = central_difference(values[i], f);
    sweep.compare(relative_error(analytic[i], numeric), label + "[" + std::to_string(i) + "]");
  }
}

}  // namespace

SweepResult lattice_oracle_sweep(std::size_t instances, std::uint64_t seed, double tolerance) {
  Sweep sweep("lattice-oracle", tolerance);
  Rng rng(mix_seed(seed, 101));
  for (std::size_t n = 0; n < instances; ++n) {
    const auto j = random_joint(rng);
    const double dp = forward_loss(j).loss;
    const long double oracle = oracle_loss(j);
    sweep.compare(static_cast<double>(std::abs((dp - oracle) / oracle)), "instance " + std::to_string(n));
    sweep.instance();
  }
  return sweep.finish();
}

SweepResult lattice_cut_sweep(std::size_t instances, std::uint64_t seed, double tolerance) {
  Sweep sweep("lattice-cut-identity", tolerance);
  Rng rng(mix_seed(seed, 102));
  for (std::size_t n = 0; n < instances; ++n) {
    const auto j = random_joint(rng);
    const auto lat = forward_loss(j);
    const std::size_t T = j.frames(), U = j.target_length();
    const std::string where = "instance " + std::to_string(n);
    sweep.compare(std::abs(lat.alpha.at(0, 0) + lat.beta.at(0, 0) + lat.loss), where + " alpha+beta");
    for (std::size_t t = 0; t + 1 < T; ++t) {
      double acc = -INFINITY;
      for (std::size_t u = 0; u <= U; ++u) {
        acc = log_add(acc, lat.alpha.at(t, u) + j.logp.at(t, u, 0) + lat.beta.at(t + 1, u));
      }
      sweep.compare(std::abs(acc + lat.loss), where + " cut t=" + std::to_string(t));
    }
    sweep.instance();
  }
  return sweep.finish();
}

SweepResult logit_gradient_sweep(std::size_t instances, std::uint64_t seed, double tolerance) {
  Sweep sweep("logit-gradients", tolerance);
  Rng rng(mix_seed(seed, 103));
  for (std::size_t n = 0; n < instances; ++n) {
    BasicTensor<double> logits;
    auto j = random_joint(rng, &logits);
    const auto grad = logit_gradients(j, forward_loss(j));
    auto f = [&] {
      j.logp = log_softmax(logits);
      return forward_loss(j).loss;
    };
    check_all(sweep, "instance " + std::to_string(n) + " dlogits", logits.values(), grad.values(), f);
    sweep.instance();
  }
  return sweep.finish();
}

SweepResult layer_gradient_sweep(std::size_t trials, std::uint64_t seed, double tolerance) {
  Sweep sweep("layer-gradients", tolerance);
  Rng rng(mix_seed(seed, 104));
  auto dim = [&] { return rng.between(1, 6); };
  for (std::size_t n = 0; n < trials; ++n) {
    const std::string tag = "trial " + std::to_string(n);
    switch (n % 6) {
      case 0: {
        const std::size_t rows = dim(), in = dim(), out = dim();
        auto x = random_tensor({rows, in}, rng), w = random_tensor({out, in}, rng), b = random_tensor({out}, rng);
        const auto r = random_tensor({rows, out}, rng);
        auto fwd = affine_forward(x, w, b);
        const auto g = affine_backward(fwd.tape, r);
        auto f = [&] { return weighted_sum(affine_forward(x, w, b).y, r); };
        check_all(sweep, tag + " affine dx", x.values(), g.dx.values(), f);
        check_all(sweep, tag + " affine dW", w.values(), g.dweight.values(), f);
        check_all(sweep, tag + " affine db", b.values(), g.dbias.values(), f);
        break;
      }
      case 1: {
        const std::size_t in = dim(), H = dim();
        auto wi = random_tensor({4 * H, in}, rng, 0.7), wr = random_tensor({4 * H, H}, rng, 0.7);
        auto b = random_tensor({4 * H}, rng, 0.5);
        auto x = random_tensor({in}, rng), h = random_tensor({H}, rng), c = random_tensor({H}, rng);
        const auto r1 = random_tensor({H}, rng), r2 = random_tensor({H}, rng);
        LstmWeights<double> W{wi, wr, b};
        auto fwd = lstm_cell_forward<double>(x.values(), h.values(), c.values(), W);
        const auto g = lstm_cell_backward<double>(fwd.tape, r1.values(), r2.values());
        auto f = [&] {
          auto o = lstm_cell_forward<double>(x.values(), h.values(), c.values(), W);
          return weighted_sum(o.h, r1.values()) + weighted_sum(o.c, r2.values());
        };
        check_all(sweep, tag + " lstm dx", x.values(), g.dx, f);
        check_all(sweep, tag + " lstm dh", h.values(), g.dh_prev, f);
        check_all(sweep, tag + " lstm dc", c.values(), g.dc_prev, f);
        check_all(sweep, tag + " lstm dWi", wi.values(), g.params.dw_input.values(), f);
        check_all(sweep, tag + " lstm dWr", wr.values(), g.params.dw_recurrent.values(), f);
        check_all(sweep, tag + " lstm db", b.values(), g.params.dbias.values(), f);
        break;
      }
      case 2: {
        const std::size_t T = dim(), in = dim(), H = dim();
        const bool reverse = rng.index(2) == 1;
        auto wi = random_tensor({4 * H, in}, rng, 0.7), wr = random_tensor({4 * H, H}, rng, 0.7);
        auto b = random_tensor({4 * H}, rng, 0.5);
        auto x = random_tensor({T, in}, rng);
        const auto r = random_tensor({T, H}, rng);
        LstmWeights<double> W{wi, wr, b};
        auto fwd = lstm_sequence_forward(x, W, reverse);
        const auto g = lstm_sequence_backward(fwd.tape, r);
        auto f = [&] { return weighted_sum(lstm_sequence_forward(x, W, reverse).hidden, r); };
        check_all(sweep, tag + " lstm-seq dx", x.values(), g.dx.values(), f);
        check_all(sweep, tag + " lstm-seq dWi", wi.values(), g.params.dw_input.values(), f);
        check_all(sweep, tag + " lstm-seq dWr", wr.values(), g.params.dw_recurrent.values(), f);
        check_all(sweep, tag + " lstm-seq db", b.values(), g.params.dbias.values(), f);
        break;
      }
      case 3: {
        const std::size_t V = dim(), E = dim(), n_ids = dim();
        auto table = random_tensor({V, E}, rng);
        std::vector<std::size_t> ids(n_ids);
        for (auto& id : ids) id = rng.index(V);
        const auto r = random_tensor({n_ids, E}, rng);
        auto fwd = embedding_forward<double>(table, ids);
        const auto g = embedding_backward(fwd.tape, r);
        auto f = [&] { return weighted_sum(embedding_forward<double>(table, ids).rows, r); };
        check_all(sweep, tag + " embedding", table.values(), g.values(), f);
        break;
      }
      case 4: {
        auto x = random_tensor({dim(), dim()}, rng);
        const auto r = random_tensor(x.dims(), rng);
        auto fwd = tanh_forward(x);
        const auto g = tanh_backward(fwd.tape, r);
        auto f = [&] { return weighted_sum(tanh_forward(x).y, r); };
        check_all(sweep, tag + " tanh", x.values(), g.values(), f);
        break;
      }
      default: {
        auto x = random_tensor({dim(), dim()}, rng, 2.0);
        const auto r = random_tensor(x.dims(), rng);
        auto fwd = log_softmax_forward(x);
        const auto g = log_softmax_backward(fwd.tape, r);
        auto f = [&] { return weighted_sum(log_softmax(x), r); };
        check_all(sweep, tag + " log_softmax", x.values(), g.values(), f);
        break;
      }
    }
    sweep.instance();
  }
  return sweep.finish();
}

ModelConfig tiny_config() {
  ModelConfig c;
  c.feature_dim = 3;
  c.enc_layers = 2;
  c.enc_cells_per_dir = 2;
  c.pred_embed_dim = 3;
  c.pred_cells = 3;
  c.joint_dim = 4;
  c.vocab = Vocab::from_characters("ab ");
  return c;
}

SweepResult model_gradient_sweep(std::size_t seeds, std::uint64_t seed, double tolerance) {
  Sweep sweep("model-gradients", tolerance);
  const auto config = tiny_config();
  for (std::size_t n = 0; n < seeds; ++n) {
    Rng rng(mix_seed(seed, 200 + n));
    auto m = make_model<double>(config, mix_seed(seed, 300 + n));
    // Larger-than-default weights exercise the nonlinearities.
    for (auto& [name, t] : m.params) t *= 2.0;
    const std::size_t T = rng.between(1, 4), U = rng.between(0, 3);
    const auto feats = random_tensor({T, config.feature_dim}, rng);
    std::vector<SymbolId> target(U);
    for (auto& y : target) y = rng.between(1, config.vocab.size() - 1);
    const auto lg = utterance_loss_and_grads(m, feats, std::span<const SymbolId>(target));
    auto f = [&] { return utterance_loss(m, feats, std::span<const SymbolId>(target)); };
    for (auto& [name, t] : m.params) {
      check_all(sweep, "seed " + std::to_string(n) + " " + name, t.values(), lg.grads.at(name).values(), f);
    }
    sweep.instance();
  }
  return sweep.finish();
}

std::vector<SweepResult> run_gradcheck_suite(std::uint64_t seed) {
  return {lattice_oracle_sweep(200, seed), lattice_cut_sweep(200, seed), logit_gradient_sweep(100, seed),
          layer_gradient_sweep(100, seed), model_gradient_sweep(20, seed)};
}

}  // namespace tslu
