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

#include "saliex/sanity.hpp"

#include <cmath>

#include "saliex/errors.hpp"
#include "saliex/seed.hpp"

namespace saliex {

namespace {

std::vector<PairMaps> similarity_maps(std::span<const VerificationSample> suite, const Embedder& embedder,
                                      const ExplainConfig& cfg) {
    std::vector<PairMaps> maps(suite.size());
    for (std::size_t i = 0; i < suite.size(); ++i) {
        if (!suite[i].matching) continue;
        const auto ex = explain_pair(suite[i].a, suite[i].b, embedder, cfg);
        maps[i] = {ex.a.positive, ex.b.positive};
    }
    return maps;
}

std::vector<PairMaps> baseline_maps(std::span<const VerificationSample> suite, std::uint64_t seed) {
    std::vector<PairMaps> maps(suite.size());
    for (std::size_t i = 0; i < suite.size(); ++i) {
        const int h = suite[i].a.height();
        const int w = suite[i].a.width();
        maps[i] = {random_saliency(h, w, seed, 2 * i), random_saliency(h, w, seed, 2 * i + 1)};
    }
    return maps;
}

}  // namespace

void SanityConfig::validate() const {
    if (trials < 1) throw ConfigError("trials", "must be >= 1");
    if (!(margin >= 0.0)) throw ConfigError("margin", "must be >= 0");
    if (!(epsilon >= 0.0)) throw ConfigError("epsilon", "must be >= 0");
    eval.validate();
}

SanityReport sanity_check(std::span<const VerificationSample> suite, const SanityConfig& config) {
    config.validate();
    const BlockAverageEmbedder structured(config.grid);
    const Threshold structured_threshold = calibrate_threshold(suite, structured, config.eval.batch_size);
    EvalOptions eval = config.eval;
    eval.mode = EvalMode::deletion;

    SanityReport report;
    report.pass = true;
    for (int t = 0; t < config.trials; ++t) {
        const auto trial = static_cast<std::uint64_t>(t);
        SanityTrial out;
        out.trial = t;
        out.random_model_seed = derive_seed(config.seed, "sanity.model", trial);
        const RandomProjectionEmbedder randomized(config.proj_dim, out.random_model_seed);

        ExplainConfig cfg = config.explain;
        cfg.seed = derive_seed(config.seed, "sanity.masks", trial);
        const auto random_maps = baseline_maps(suite, derive_seed(config.seed, "sanity.baseline", trial));
        const auto structured_maps = similarity_maps(suite, structured, cfg);
        const auto randomized_maps = similarity_maps(suite, randomized, cfg);

        out.auc_random_maps = verification_metric(suite, random_maps, MapKind::similarity,
                                                  structured_threshold.value, structured, eval).auc;
        out.auc_structured = verification_metric(suite, structured_maps, MapKind::similarity,
                                                 structured_threshold.value, structured, eval).auc;
        if (config.self_evaluate) {
            const Threshold thr = calibrate_threshold(suite, randomized, config.eval.batch_size);
            out.auc_random_maps_rand =
                verification_metric(suite, random_maps, MapKind::similarity, thr.value, randomized, eval).auc;
            out.auc_randomized =
                verification_metric(suite, randomized_maps, MapKind::similarity, thr.value, randomized, eval).auc;
        } else {
            out.auc_random_maps_rand = out.auc_random_maps;
            out.auc_randomized = verification_metric(suite, randomized_maps, MapKind::similarity,
                                                     structured_threshold.value, structured, eval).auc;
        }
        out.gap_structured = out.auc_random_maps - out.auc_structured;
        out.gap_randomized = out.auc_random_maps_rand - out.auc_randomized;
        out.pass = out.gap_structured > config.margin && std::abs(out.gap_randomized) <= config.epsilon;
        report.pass = report.pass && out.pass;
        report.trials.push_back(out);
    }
    return report;
}

}  // namespace saliex
