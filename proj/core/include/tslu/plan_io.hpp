// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string_view>

#include "tslu/training.hpp"

namespace tslu {

// Plan file layout:
//   {"model": {"init_checkpoint": "path"} | {"config": {...}, "init_seed": n},
//    "corpora": {"name": "path.jsonl", ...},
//    "stages": [{"name", "corpus", "heldout"?, "setting",
//                "extend_vocab"?: {"symbols": [...] | "auto", "seed"},
//                "freeze"?: [prefixes], "epochs",
//                "lr"?: {"initial", "decay", "interval"},
//                "momentum"?, "batch_size"?, "seed"?}]}
// Relative paths resolve against `base_dir`. Model config keys are those of
// ModelConfig plus "charset" ("desk", "full" or the literal characters).
AdaptationPlan parse_plan(std::string_view json_text, const std::filesystem::path& base_dir);
AdaptationPlan load_plan(const std::filesystem::path& path);

ModelConfig parse_model_config(std::string_view json_text);

}  // namespace tslu
