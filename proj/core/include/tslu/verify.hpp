// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tslu/network.hpp"

namespace tslu {

// |a - n| / max(|a|, |n|, floor). The floor keeps near-zero gradients from
// turning round-off into huge ratios.
inline constexpr double kRelativeErrorFloor = 1e-3;
inline constexpr double kFiniteDifferenceStep = 1e-4;
double relative_error(double analytic, double numeric, double floor = kRelativeErrorFloor);

struct SweepResult {
  std::string name;
  std::size_t instances = 0;
  std::size_t checks = 0;    // individual scalar comparisons
  std::size_t failures = 0;
  double worst = 0.0;        // largest error seen
  double tolerance = 0.0;
  double seconds = 0.0;
  std::string first_failure;

  bool passed() const { return failures == 0 && instances > 0; }
};

// forward_loss against exhaustive enumeration, T<=4, U<=3, V<=4, 64-bit.
SweepResult lattice_oracle_sweep(std::size_t instances, std::uint64_t seed, double tolerance = 1e-10);

// Cut identity at every frame boundary and alpha(0,0)+beta(0,0) = -loss.
SweepResult lattice_cut_sweep(std::size_t instances, std::uint64_t seed, double tolerance = 1e-8);

// logit_gradients against central differences of forward_loss.
SweepResult logit_gradient_sweep(std::size_t instances, std::uint64_t seed, double tolerance = 1e-4);

// Every layer kind's input and parameter gradients on random shapes (dims <= 6).
SweepResult layer_gradient_sweep(std::size_t trials, std::uint64_t seed, double tolerance = 1e-4);

// Model whose dimensions are all <= 4, used by the end-to-end gradient check.
ModelConfig tiny_config();

// Every parameter of a tiny model against central differences of the
// utterance loss, one random utterance per seed.
SweepResult model_gradient_sweep(std::size_t seeds, std::uint64_t seed, double tolerance = 1e-3);

// All of the above at their acceptance sizes.
std::vector<SweepResult> run_gradcheck_suite(std::uint64_t seed);

}  // namespace tslu
