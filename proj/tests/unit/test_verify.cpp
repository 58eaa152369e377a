// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "tslu/verify.hpp"

using namespace tslu;

TEST_CASE("relative error") {
  CHECK(relative_error(1.0, 1.0) == 0.0);
  CHECK(relative_error(2.0, 1.0) == doctest::Approx(0.5));
  CHECK(relative_error(1e-9, 0.0) == doctest::Approx(1e-6));
  CHECK(relative_error(1e-9, 0.0, 1e-9) == doctest::Approx(1.0));
}

TEST_CASE("tiny config is tiny") {
  const auto c = tiny_config();
  c.validate();
  CHECK(c.feature_dim <= 4);
  CHECK(c.enc_cells_per_dir <= 4);
  CHECK(c.pred_cells <= 4);
  CHECK(c.pred_embed_dim <= 4);
  CHECK(c.joint_dim <= 4);
  CHECK(c.vocab.size() <= 4);
}

TEST_CASE("sweeps report what they did") {
  const auto r = lattice_oracle_sweep(10, 3);
  CHECK(r.passed());
  CHECK(r.instances == 10);
  CHECK(r.checks == 10);
  CHECK(r.tolerance == 1e-10);
  CHECK(r.worst <= 1e-10);
}

TEST_CASE("an impossible tolerance fails") {
  const auto r = logit_gradient_sweep(3, 1, 0.0);
  CHECK_FALSE(r.passed());
  CHECK(r.failures > 0);
  CHECK_FALSE(r.first_failure.empty());
}

TEST_CASE("sweeps are seeded") {
  const auto a = layer_gradient_sweep(6, 2), b = layer_gradient_sweep(6, 2);
  CHECK(a.worst == b.worst);
  CHECK(a.checks == b.checks);
}
