// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include "tslu/lattice.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "tslu/error.hpp"
#include "tslu/layers.hpp"

namespace tslu {

template <typename Real>
void validate_joint(const JointLogProbs<Real>& j) {
  if (j.logp.rank() != 3) {
    throw ShapeError("joint log-probs must be [T, U+1, V], got " + shape_string(j.logp.dims()));
  }
  if (j.logp.dim(1) != j.target.size() + 1) {
    throw ShapeError("joint log-probs " + shape_string(j.logp.dims()) + " disagree with target length " +
                     std::to_string(j.target.size()));
  }
  for (SymbolId y : j.target) {
    if (y == 0) throw DataError("target contains BLANK");
    if (y >= j.vocab_size()) {
      throw DataError("target id " + std::to_string(y) + " outside vocabulary of size " +
                      std::to_string(j.vocab_size()));
    }
  }
}

template <typename Real>
Lattice<Real> forward_loss(const JointLogProbs<Real>& j) {
  validate_joint(j);
  const std::size_t T = j.frames(), U = j.target_length();
  constexpr Real kNegInf = -std::numeric_limits<Real>::infinity();
  auto blank = [&](std::size_t t, std::size_t u) { return j.logp.at(t, u, 0); };
  auto label = [&](std::size_t t, std::size_t u) { return j.logp.at(t, u, j.target[u]); };

  Lattice<Real> lat{BasicTensor<Real>({T, U + 1}, kNegInf), BasicTensor<Real>({T, U + 1}, kNegInf),
                    Real(0)};
  auto& alpha = lat.alpha;
  auto& beta = lat.beta;

  alpha.at(0, 0) = 0;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t u = 0; u <= U; ++u) {
      if (t == 0 && u == 0) continue;
      Real a = kNegInf;
      if (t > 0) a = alpha.at(t - 1, u) + blank(t - 1, u);
      if (u > 0) a = log_add(a, alpha.at(t, u - 1) + label(t, u - 1));
      alpha.at(t, u) = a;
    }
  }

  beta.at(T - 1, U) = blank(T - 1, U);
  for (std::size_t t = T; t-- > 0;) {
    for (std::size_t u = U + 1; u-- > 0;) {
      if (t == T - 1 && u == U) continue;
      Real b = kNegInf;
      if (t + 1 < T) b = blank(t, u) + beta.at(t + 1, u);
      if (u < U) b = log_add(b, label(t, u) + beta.at(t, u + 1));
      beta.at(t, u) = b;
    }
  }

  lat.loss = -(alpha.at(T - 1, U) + blank(T - 1, U));
  if (!std::isfinite(lat.loss)) throw NumericError("transducer loss is not finite");
  return lat;
}

template <typename Real>
BasicTensor<Real> logprob_gradients(const JointLogProbs<Real>& j, const Lattice<Real>& lat) {
  validate_joint(j);
  const std::size_t T = j.frames(), U = j.target_length(), V = j.vocab_size();
  if (lat.alpha.dims() != Shape{T, U + 1} || lat.beta.dims() != Shape{T, U + 1}) {
    throw ShapeError("lattice " + shape_string(lat.alpha.dims()) +
                     " does not belong to joint log-probs " + shape_string(j.logp.dims()));
  }
  const Real log_like = -lat.loss;
  BasicTensor<Real> g({T, U + 1, V});
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t u = 0; u <= U; ++u) {
      const Real a = lat.alpha.at(t, u);
      if (!std::isfinite(a)) continue;
      // Blank edge to (t+1, u), or the terminal emission at (T-1, U).
      Real next = Real(0);
      bool has_blank = true;
      if (t + 1 < T) {
        next = lat.beta.at(t + 1, u);
      } else if (u != U) {
        has_blank = false;
      }
      if (has_blank) {
        g.at(t, u, 0) = -std::exp(a + j.logp.at(t, u, 0) + next - log_like);
      }
      if (u < U) {
        const SymbolId y = j.target[u];
        g.at(t, u, y) = -std::exp(a + j.logp.at(t, u, y) + lat.beta.at(t, u + 1) - log_like);
      }
    }
  }
  return g;
}

template <typename Real>
BasicTensor<Real> logit_gradients(const JointLogProbs<Real>& j, const Lattice<Real>& lat) {
  BasicTensor<Real> g = logprob_gradients(j, lat);
  const std::size_t V = j.vocab_size();
  const std::size_t rows = g.size() / V;
  for (std::size_t r = 0; r < rows; ++r) {
    Real* gr = g.data() + r * V;
    const Real* lp = j.logp.data() + r * V;
    Real total = 0;
    for (std::size_t k = 0; k < V; ++k) total += gr[k];
    for (std::size_t k = 0; k < V; ++k) gr[k] -= std::exp(lp[k]) * total;
  }
  return g;
}

template <typename Real>
long double oracle_loss(const JointLogProbs<Real>& j) {
  validate_joint(j);
  const std::size_t T = j.frames(), U = j.target_length();
  if (T > kOracleMaxFrames || U > kOracleMaxTarget) {
    throw DataError("oracle_loss: instance T=" + std::to_string(T) + ", U=" + std::to_string(U) +
                    " too large to enumerate (limit T<=6, U<=5)");
  }
  // Walk every path explicitly; each is a product of edge probabilities.
  long double total = 0.0L;
  std::function<void(std::size_t, std::size_t, long double)> walk =
      [&](std::size_t t, std::size_t u, long double logw) {
        if (t == T - 1 && u == U) {
          total += std::exp(logw + static_cast<long double>(j.logp.at(t, u, 0)));
          return;
        }
        if (t + 1 < T) walk(t + 1, u, logw + static_cast<long double>(j.logp.at(t, u, 0)));
        if (u < U) {
          walk(t, u + 1, logw + static_cast<long double>(j.logp.at(t, u, j.target[u])));
        }
      };
  walk(0, 0, 0.0L);
  return -std::log(total);
}

#define TSLU_INSTANTIATE_LATTICE(Real)                                                        \
  template void validate_joint(const JointLogProbs<Real>&);                                   \
  template Lattice<Real> forward_loss(const JointLogProbs<Real>&);                            \
  template BasicTensor<Real> logit_gradients(const JointLogProbs<Real>&, const Lattice<Real>&); \
  template BasicTensor<Real> logprob_gradients(const JointLogProbs<Real>&,                    \
                                               const Lattice<Real>&);                         \
  template long double oracle_loss(const JointLogProbs<Real>&);

TSLU_INSTANTIATE_LATTICE(float)
TSLU_INSTANTIATE_LATTICE(double)

}  // namespace tslu
