// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <limits>

#include "tslu/error.hpp"
#include "tslu/tensor.hpp"

using namespace tslu;

TEST_CASE("construction and indexing") {
  Tensor t({2, 3}, 1.5f);
  CHECK(t.size() == 6);
  CHECK(t.rank() == 2);
  t.at(1, 2) = 4.0f;
  CHECK(t[5] == 4.0f);
  CHECK(t.row(1).size() == 3);
  CHECK(t.row(1)[2] == 4.0f);
  Tensor u({2, 2, 2});
  u.at(1, 0, 1) = 3.0f;
  CHECK(u[5] == 3.0f);
}

TEST_CASE("bad shapes throw") {
  CHECK_THROWS_AS(Tensor(Shape{}), ShapeError);
  CHECK_THROWS_AS(Tensor({2, 0}), ShapeError);
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<float>{1, 2, 3}), ShapeError);
  Tensor a({2}), b({3});
  CHECK_THROWS_AS(a += b, ShapeError);
}

TEST_CASE("arithmetic, cast and bit identity") {
  Tensor a({3}, std::vector<float>{1, 2, 3});
  Tensor b = a;
  b += a;
  b *= 0.5f;
  CHECK(bit_identical(a, b));
  auto d = a.cast<double>();
  CHECK(d[2] == 3.0);
  b[0] = -0.0f;
  a[0] = 0.0f;
  CHECK_FALSE(bit_identical(a, b));
}

TEST_CASE("finiteness") {
  Tensor a({2}, 1.0f);
  CHECK(a.all_finite());
  a[1] = std::numeric_limits<float>::quiet_NaN();
  CHECK_FALSE(a.all_finite());
  CHECK_THROWS_AS(require_finite(a, "a"), NumericError);
  CHECK(shape_string({2, 3}) == "[2,3]");
}
