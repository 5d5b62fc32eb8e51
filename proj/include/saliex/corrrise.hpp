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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "saliex/embedder.hpp"
#include "saliex/types.hpp"

namespace saliex {

struct ExplainConfig {
    MaskGenConfig mask_config;
    std::uint64_t seed = 0;
    bool regularization = false;
    /// Masks scored per embedder call. Also bounds peak memory.
    int batch_size = 64;
    /// When set, pairs whose unperturbed score reaches this value are treated
    /// as matching and left unregularized even if `regularization` is on.
    std::optional<double> regularization_threshold;

    void validate(int height, int width) const;
};

struct PairExplanation {
    SaliencyMap signed_a;
    SaliencyMap signed_b;
    SplitSaliency a;
    SplitSaliency b;
    double score = 0.0;  ///< cosine of the unmodified pair
    ScoreList scores_a;
    ScoreList scores_b;
    double lambda = 0.0;
    bool regularization_applied = false;
    std::vector<std::string> warnings;
};

/// Weight of the blended-image term: (s - 1) / (s + 1) with s clamped to
/// [0, 1]. Sets *clamped when clamping changed s.
double regularization_weight(double base_score, bool* clamped = nullptr);

/// Regularized score of image A under mask M against reference embedding
/// x_ref: cos(f(A * M), x_ref) + lambda * cos(f(A * (1 - M) + B * M), x_ref).
/// Reference implementation for a single mask; explain_pair batches the same
/// computation.
double regularized_score(const Image& image_a, const Image& image_b, const Mask& mask,
                         const Embedder& embedder, const Embedding& reference, double base_score);

/// Correlation saliency for both images of a pair. One mask set, keyed by
/// cfg.seed, is shared by both sides. Masked images whose embedding
/// degenerates (all-zero features) score 0 and add a warning.
PairExplanation explain_pair(const Image& image_a, const Image& image_b, const Embedder& embedder,
                             const ExplainConfig& cfg);

struct RankedMatch {
    std::size_t gallery_index = 0;
    double score = 0.0;
    /// Side a is the probe, side b the gallery image.
    PairExplanation explanation;
};

/// Cosine scores of the probe against every gallery image, in gallery order.
std::vector<double> gallery_scores(const Image& probe, std::span<const Image> gallery,
                                   const Embedder& embedder, int batch_size = 64);

/// Gallery indices sorted by score descending, ties to the lower index.
std::vector<std::size_t> rank_gallery(std::span<const double> scores);

/// Explains the probe against its top-k gallery matches.
std::vector<RankedMatch> explain_identification(const Image& probe, std::span<const Image> gallery,
                                                int k, const Embedder& embedder,
                                                const ExplainConfig& cfg);

}  // namespace saliex
