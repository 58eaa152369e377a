// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "tslu/error.hpp"
#include "tslu/lattice.hpp"
#include "tslu/layers.hpp"
#include "tslu/verify.hpp"

using namespace tslu;

namespace {

JointLogProbs<double> random_joint(std::size_t T, std::size_t U, std::size_t V, Rng& r) {
  auto logits = test::random_tensor<double>({T, U + 1, V}, r);
  JointLogProbs<double> j{log_softmax(logits), {}};
  for (std::size_t u = 0; u < U; ++u) j.target.push_back(1 + r.index(V - 1));
  return j;
}

}  // namespace

TEST_CASE("single forced blank") {
  JointLogProbs<double> j{Tensor64({1, 1, 3}, -std::log(3.0)), {}};
  CHECK(forward_loss(j).loss == doctest::Approx(std::log(3.0)).epsilon(1e-15));
  j.logp.at(0, 0, 0) = 0.0;
  CHECK(forward_loss(j).loss == 0.0);
}

TEST_CASE("two alignment paths for T=2, U=1") {
  Rng r(3);
  auto j = random_joint(2, 1, 3, r);
  const auto b = [&](std::size_t t, std::size_t u) { return j.logp.at(t, u, 0); };
  const auto y = [&](std::size_t t, std::size_t u) { return j.logp.at(t, u, j.target[u]); };
  const double expect = -std::log(std::exp(b(0, 0) + y(1, 0) + b(1, 1)) + std::exp(y(0, 0) + b(0, 1) + b(1, 1)));
  CHECK(forward_loss(j).loss == doctest::Approx(expect).epsilon(1e-14));
  CHECK(static_cast<double>(oracle_loss(j)) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("oracle on T=1, U=0 is the blank") {
  JointLogProbs<double> j{Tensor64({1, 1, 2}, std::vector<double>{std::log(0.25), std::log(0.75)}), {}};
  CHECK(static_cast<double>(oracle_loss(j)) == doctest::Approx(-std::log(0.25)));
}

TEST_CASE("alpha/beta consistency and gradient laws") {
  Rng r(17);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t T = 1 + r.index(5), U = r.index(4), V = 2 + r.index(4);
    auto j = random_joint(T, U, V, r);
    const auto lat = forward_loss(j);
    CHECK(lat.beta.at(0, 0) == doctest::Approx(-lat.loss).epsilon(1e-12));
    const auto g = logit_gradients(j, lat);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t u = 0; u <= U; ++u) {
        double s = 0;
        for (std::size_t v = 0; v < V; ++v) s += g.at(t, u, v);
        CHECK(std::abs(s) < 1e-12);
      }
    }
  }
}

TEST_CASE("single-frame gradient is softmax minus one-hot blank") {
  Tensor64 z({1, 1, 3}, std::vector<double>{0.2, -1.0, 0.7});
  JointLogProbs<double> j{log_softmax(z), {}};
  const auto g = logit_gradients(j, forward_loss(j));
  for (std::size_t v = 0; v < 3; ++v) {
    const double p = std::exp(j.logp.at(0, 0, v));
    CHECK(g.at(0, 0, v) == doctest::Approx(p - (v == 0 ? 1.0 : 0.0)).epsilon(1e-14));
  }
}

TEST_CASE("U=0 is a first-class case") {
  Rng r(2);
  auto j = random_joint(4, 0, 3, r);
  double expect = 0;
  for (std::size_t t = 0; t < 4; ++t) expect -= j.logp.at(t, 0, 0);
  CHECK(forward_loss(j).loss == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("malformed input") {
  JointLogProbs<double> j{Tensor64({2, 2, 3}), {0}};
  CHECK_THROWS_AS(forward_loss(j), DataError);
  j.target = {3};
  CHECK_THROWS_AS(forward_loss(j), DataError);
  j.target = {1, 2};
  CHECK_THROWS_AS(forward_loss(j), ShapeError);
  Rng r(1);
  auto big = random_joint(7, 1, 3, r);
  CHECK_THROWS_AS(oracle_loss(big), DataError);
}

TEST_CASE("float instantiation agrees with double") {
  Rng r(8);
  auto j = random_joint(5, 3, 4, r);
  JointLogProbs<float> f{j.logp.cast<float>(), j.target};
  CHECK(forward_loss(f).loss == doctest::Approx(forward_loss(j).loss).epsilon(1e-5));
}

TEST_CASE("sweeps") {
  auto a = lattice_oracle_sweep(50, 1);
  CHECK_MESSAGE(a.passed(), a.first_failure);
  auto b = lattice_cut_sweep(50, 2);
  CHECK_MESSAGE(b.passed(), b.first_failure);
  auto c = logit_gradient_sweep(20, 3);
  CHECK_MESSAGE(c.passed(), c.first_failure);
}
