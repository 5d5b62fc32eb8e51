/*
 * Copyright 2026 The saliex Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "saliex/corrrise.hpp"
#include "saliex/evaluation.hpp"

namespace saliex {

/// Model-randomization check. Each trial explains every matching pair of the
/// suite twice, once under the structured reference embedder (block_avg) and
/// once under a freshly seeded random projection, and compares the deletion
/// AUC of the resulting similarity maps with that of uniformly random maps.
///
///   gap = auc(random maps) - auc(method maps)
///
/// A trial passes when the structured gap exceeds `margin` and the randomized
/// gap stays within +-`epsilon`.
struct SanityConfig {
    ExplainConfig explain;
    EvalOptions eval;
    int trials = 10;
    int grid = 8;
    int proj_dim = 128;
    double margin = 0.05;
    double epsilon = 0.02;
    std::uint64_t seed = 0;
    /// By default both map sets are scored by the structured embedder. When
    /// set, each map set is scored by the embedder that produced it.
    bool self_evaluate = false;

    void validate() const;
};

struct SanityTrial {
    int trial = 0;
    std::uint64_t random_model_seed = 0;
    double auc_random_maps = 0.0;       ///< under the structured evaluator
    double auc_structured = 0.0;
    double auc_random_maps_rand = 0.0;  ///< equals auc_random_maps unless self_evaluate
    double auc_randomized = 0.0;
    double gap_structured = 0.0;
    double gap_randomized = 0.0;
    bool pass = false;
};

struct SanityReport {
    std::vector<SanityTrial> trials;
    bool pass = false;
};

SanityReport sanity_check(std::span<const VerificationSample> suite, const SanityConfig& config);

}  // namespace saliex
