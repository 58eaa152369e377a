// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include "tslu/surgery.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

#include "tslu/error.hpp"
#include "tslu/rng.hpp"

namespace tslu {

namespace {

// Appends `extra` rows drawn from `rng` to a [rows, cols] or [rows] tensor.
template <typename Real>
BasicTensor<Real> append_rows(const BasicTensor<Real>& t, std::size_t extra, std::size_t fan_in,
                              Rng& rng) {
  Shape dims = t.dims();
  const std::size_t stride = t.size() / dims[0];
  dims[0] += extra;
  std::vector<Real> data(t.values().begin(), t.values().end());
  BasicTensor<Real> fresh(Shape{extra * stride});
  init_uniform_fan_in(fresh, fan_in, rng);
  data.insert(data.end(), fresh.values().begin(), fresh.values().end());
  return BasicTensor<Real>(std::move(dims), std::move(data));
}

}  // namespace

template <typename Real>
BasicModel<Real> extend_vocab(const BasicModel<Real>& m, const VocabExtension& ext) {
  std::set<std::string> seen;
  for (const auto& s : ext.new_symbols) {
    if (!seen.insert(s).second) throw DataError("duplicate symbol '" + s + "' in vocabulary extension");
    if (m.vocab().contains(s)) throw DataError("symbol '" + s + "' already in vocabulary");
  }
  BasicModel<Real> out = m;
  if (ext.new_symbols.empty()) return out;

  out.config.vocab = m.vocab().extended(ext.new_symbols);
  const std::size_t extra = ext.new_symbols.size();
  const std::size_t J = m.config.joint_dim, E = m.config.pred_embed_dim;
  Rng rng_out(mix_seed(ext.init_seed, 1));
  Rng rng_bias(mix_seed(ext.init_seed, 2));
  Rng rng_emb(mix_seed(ext.init_seed, 3));
  out.param("joint.output.weight") = append_rows(m.param("joint.output.weight"), extra, J, rng_out);
  out.param("joint.output.bias") = append_rows(m.param("joint.output.bias"), extra, J, rng_bias);
  out.param("prediction.embedding") =
      append_rows(m.param("prediction.embedding"), extra, E, rng_emb);
  validate_model(out);
  return out;
}

PreservationReport logit_preservation_check(const Model& before, const Model& after,
                                            const std::vector<Probe>& probes) {
  if (!before.vocab().is_prefix_of(after.vocab())) {
    throw DataError("models are not related by vocabulary extension (symbol tables diverge)");
  }
  for (const auto& [name, t] : before.params) {
    auto it = after.params.find(name);
    if (it == after.params.end()) throw DataError("extended model lacks parameter " + name);
    const auto& d0 = t.dims();
    const auto& d1 = it->second.dims();
    const bool grows = name == "joint.output.weight" || name == "joint.output.bias" ||
                       name == "prediction.embedding";
    const bool ok = grows ? (d0.size() == d1.size() &&
                             std::equal(d0.begin() + 1, d0.end(), d1.begin() + 1))
                          : d0 == d1;
    if (!ok) {
      throw DataError("parameter " + name + " shape " + shape_string(d0) + " -> " +
                      shape_string(d1) + " is not a vocabulary extension");
    }
  }

  PreservationReport report;
  report.old_symbols = before.vocab().size();
  report.new_symbols = after.vocab().size() - before.vocab().size();
  const std::size_t V0 = report.old_symbols, V1 = after.vocab().size();
  for (const auto& probe : probes) {
    for (SymbolId y : probe.target) {
      if (y >= V0) throw DataError("probe target uses a symbol added by the extension");
    }
    auto e0 = encode(before, probe.features);
    auto e1 = encode(after, probe.features);
    auto p0 = predict(before, probe.target);
    auto p1 = predict(after, probe.target);
    auto j0 = joint(before, e0.enc, p0.states, probe.target);
    auto j1 = joint(after, e1.enc, p1.states, probe.target);
    const std::size_t rows = j0.logits.size() / V0;
    for (std::size_t r = 0; r < rows; ++r) {
      const float* l0 = j0.logits.data() + r * V0;
      const float* l1 = j1.logits.data() + r * V1;
      const float* q0 = j0.log_probs.logp.data() + r * V0;
      const float* q1 = j1.log_probs.logp.data() + r * V1;
      if (std::memcmp(l0, l1, V0 * sizeof(float)) != 0) report.logits_bit_identical = false;
      for (std::size_t k = 0; k < V0; ++k) {
        report.max_old_logit_deviation =
            std::max(report.max_old_logit_deviation, std::fabs(double(l0[k]) - double(l1[k])));
        report.max_old_logprob_change =
            std::max(report.max_old_logprob_change, std::fabs(double(q0[k]) - double(q1[k])));
      }
    }
    ++report.probes;
  }
  return report;
}

template BasicModel<float> extend_vocab(const BasicModel<float>&, const VocabExtension&);
template BasicModel<double> extend_vocab(const BasicModel<double>&, const VocabExtension&);

}  // namespace tslu
