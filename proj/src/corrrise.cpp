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

#include "saliex/corrrise.hpp"

#include <algorithm>
#include <numeric>

#include "saliex/errors.hpp"
#include "saliex/kernels.hpp"
#include "saliex/maskgen.hpp"
#include "saliex/pearson.hpp"

namespace saliex {

namespace {

// Scores of each image in `images` against `reference`; degenerate ones count as 0.
void score_batch(const Embedder& embedder, std::span<const Image> images, const Embedding& reference,
                 std::span<double> out, std::size_t& degenerate) {
    const auto embeddings = embed_lenient(embedder, images);
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        if (embeddings[i]) {
            out[i] = cosine_similarity(*embeddings[i], reference);
        } else {
            out[i] = 0.0;
            ++degenerate;
        }
    }
}

}  // namespace

void ExplainConfig::validate(int height, int width) const {
    mask_config.validate(height, width);
    if (batch_size < 1) throw ConfigError("batch_size", "must be >= 1");
}

double regularization_weight(double base_score, bool* clamped) {
    const double s = std::clamp(base_score, 0.0, 1.0);
    if (clamped != nullptr) *clamped = s != base_score;
    return (s - 1.0) / (s + 1.0);
}

double regularized_score(const Image& image_a, const Image& image_b, const Mask& mask,
                         const Embedder& embedder, const Embedding& reference, double base_score) {
    if (!image_a.same_shape(image_b)) throw DimensionError("pair images differ in shape");
    const double lambda = regularization_weight(base_score);
    Image batch[2] = {Image(image_a.height(), image_a.width(), image_a.channels()),
                      Image(image_a.height(), image_a.width(), image_a.channels())};
    kernels::serial::mask_batch(image_a, std::span(&mask, 1), std::span(batch, 1));
    kernels::serial::blend_batch(image_a, image_b, std::span(&mask, 1), std::span(batch + 1, 1));
    double scores[2];
    std::size_t degenerate = 0;
    score_batch(embedder, batch, reference, scores, degenerate);
    return scores[0] + lambda * scores[1];
}

PairExplanation explain_pair(const Image& image_a, const Image& image_b, const Embedder& embedder,
                             const ExplainConfig& cfg) {
    if (!image_a.same_shape(image_b)) throw DimensionError("pair images differ in shape");
    const int h = image_a.height();
    const int w = image_a.width();
    cfg.validate(h, w);
    if (cfg.mask_config.num_masks < 2) {
        throw InsufficientSamples("insufficient samples: need at least 2 masks");
    }

    const Image pair[2] = {image_a, image_b};
    const auto base = embed(embedder, pair);
    const Embedding& x_a = base[0];
    const Embedding& x_b = base[1];

    PairExplanation result;
    result.score = cosine_similarity(x_a, x_b);

    bool regularize = cfg.regularization;
    if (regularize && cfg.regularization_threshold && result.score >= *cfg.regularization_threshold) {
        regularize = false;
        result.warnings.push_back("regularization skipped: pair score reaches the matching threshold");
    }
    if (regularize) {
        bool clamped = false;
        result.lambda = regularization_weight(result.score, &clamped);
        if (clamped) {
            result.warnings.push_back("pair score " + std::to_string(result.score) +
                                      " clamped to [0,1] for the regularization weight");
        }
    }
    result.regularization_applied = regularize;

    const auto n = static_cast<std::size_t>(cfg.mask_config.num_masks);
    result.scores_a.resize(n);
    result.scores_b.resize(n);
    PearsonAccumulator acc(h, w, 2);
    std::size_t degenerate = 0;

    const int c = image_a.channels();
    std::vector<Image> batch_a;
    std::vector<Image> batch_b;
    for (std::size_t first = 0; first < n; first += static_cast<std::size_t>(cfg.batch_size)) {
        const std::size_t count = std::min<std::size_t>(cfg.batch_size, n - first);
        const auto masks = generate_mask_range(cfg.mask_config, h, w, cfg.seed, first, count);
        batch_a.assign(count, Image(h, w, c));
        batch_b.assign(count, Image(h, w, c));
        kernels::omp::mask_batch(image_a, masks, batch_a);
        kernels::omp::mask_batch(image_b, masks, batch_b);

        std::span<double> sc_a(result.scores_a.data() + first, count);
        std::span<double> sc_b(result.scores_b.data() + first, count);
        score_batch(embedder, batch_a, x_b, sc_a, degenerate);
        score_batch(embedder, batch_b, x_a, sc_b, degenerate);

        if (regularize) {
            kernels::omp::blend_batch(image_a, image_b, masks, batch_a);
            kernels::omp::blend_batch(image_b, image_a, masks, batch_b);
            std::vector<double> reg_a(count);
            std::vector<double> reg_b(count);
            score_batch(embedder, batch_a, x_b, reg_a, degenerate);
            score_batch(embedder, batch_b, x_a, reg_b, degenerate);
            for (std::size_t k = 0; k < count; ++k) {
                sc_a[k] += result.lambda * reg_a[k];
                sc_b[k] += result.lambda * reg_b[k];
            }
        }

        const ScoreList slices[2] = {ScoreList(sc_a.begin(), sc_a.end()), ScoreList(sc_b.begin(), sc_b.end())};
        acc.add(masks, slices);
    }
    if (degenerate > 0) {
        result.warnings.push_back(std::to_string(degenerate) +
                                  " perturbed images had degenerate embeddings and scored 0");
    }

    result.signed_a = acc.finish(0);
    result.signed_b = acc.finish(1);
    result.a = split_saliency(result.signed_a);
    result.b = split_saliency(result.signed_b);
    return result;
}

std::vector<double> gallery_scores(const Image& probe, std::span<const Image> gallery,
                                   const Embedder& embedder, int batch_size) {
    if (gallery.empty()) throw ConfigError("gallery", "gallery is empty");
    if (batch_size < 1) throw ConfigError("batch_size", "must be >= 1");
    const Embedding x_p = embed(embedder, std::span(&probe, 1)).front();
    std::vector<double> scores(gallery.size());
    for (std::size_t first = 0; first < gallery.size(); first += static_cast<std::size_t>(batch_size)) {
        const auto sub = gallery.subspan(first, std::min<std::size_t>(batch_size, gallery.size() - first));
        std::size_t degenerate = 0;
        score_batch(embedder, sub, x_p, std::span(scores.data() + first, sub.size()), degenerate);
    }
    return scores;
}

std::vector<std::size_t> rank_gallery(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return scores[i] > scores[j]; });
    return order;
}

std::vector<RankedMatch> explain_identification(const Image& probe, std::span<const Image> gallery,
                                                int k, const Embedder& embedder,
                                                const ExplainConfig& cfg) {
    if (gallery.empty()) throw ConfigError("gallery", "gallery is empty");
    if (k < 1 || static_cast<std::size_t>(k) > gallery.size()) {
        throw ConfigError("top_k", "must lie in [1, " + std::to_string(gallery.size()) + "]");
    }
    const auto scores = gallery_scores(probe, gallery, embedder, cfg.batch_size);
    const auto order = rank_gallery(scores);
    std::vector<RankedMatch> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int r = 0; r < k; ++r) {
        const std::size_t idx = order[static_cast<std::size_t>(r)];
        out.push_back({idx, scores[idx], explain_pair(probe, gallery[idx], embedder, cfg)});
    }
    return out;
}

}  // namespace saliex
