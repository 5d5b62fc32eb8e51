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

#include <gtest/gtest.h>

#include "saliex/corrrise.hpp"
#include "saliex/embedder.hpp"
#include "saliex/evaluation.hpp"
#include "saliex/toyset.hpp"

using namespace saliex;

namespace {

Toyset small_set() {
    ToysetConfig c;
    c.subjects = 5;
    c.images_per_subject = 3;
    c.seed = 3;
    return make_toyset(c);
}

SaliencyMap box_map(const PlantedBox& box, int h, int w) {
    SaliencyMap m(h, w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) m.at(r, c) = box.contains(r, c) ? 1.0f : 0.0f;
    }
    return m;
}

}  // namespace

TEST(ToyProperties, PlantedBoxMapHasLowestDissimilarityDeletion) {
    const Toyset set = small_set();
    const auto suite = verification_samples(set);
    const BlockAverageEmbedder e(8);
    const double thr = calibrate_threshold(suite, e).value;
    std::vector<PairMaps> ideal(suite.size()), method(suite.size()), baseline(suite.size());
    ExplainConfig cfg;
    for (std::size_t i = 0; i < suite.size(); ++i) {
        const ToyPair& p = set.pairs[i];
        baseline[i] = {random_saliency(112, 112, 1, 2 * i), random_saliency(112, 112, 1, 2 * i + 1)};
        if (!p.planted) continue;
        const SaliencyMap box = box_map(*p.planted, 112, 112);
        ideal[i] = {box, box};
        const auto ex = explain_pair(suite[i].a, suite[i].b, e, cfg);
        method[i] = {ex.a.negative, ex.b.negative};
    }
    EvalOptions opt;
    const double a_ideal = verification_metric(suite, ideal, MapKind::dissimilarity, thr, e, opt).auc;
    const double a_method = verification_metric(suite, method, MapKind::dissimilarity, thr, e, opt).auc;
    const double a_random = verification_metric(suite, baseline, MapKind::dissimilarity, thr, e, opt).auc;
    EXPECT_LT(a_ideal, a_method);
    EXPECT_LT(a_ideal, a_random);
}

TEST(ToyProperties, AveragedProbeMapsBeatRandomOnIdentification) {
    const Toyset set = small_set();
    const BlockAverageEmbedder e(8);
    std::vector<GalleryImage> gallery;
    std::vector<Image> gallery_images;
    for (std::size_t g : set.gallery) {
        gallery.push_back({set.images[g], set.identities[g]});
        gallery_images.push_back(set.images[g]);
    }
    ExplainConfig cfg;
    cfg.mask_config.num_masks = 500;
    std::vector<IdentificationProbe> method, baseline;
    for (std::size_t i = 0; i < set.probes.size(); ++i) {
        const std::size_t p = set.probes[i];
        const auto ranked = explain_identification(set.images[p], gallery_images, 5, e, cfg);
        std::vector<SaliencyMap> maps;
        for (const auto& m : ranked) maps.push_back(m.explanation.signed_a);
        method.push_back({set.images[p], set.identities[p], average_maps(maps), set.names[p]});
        baseline.push_back({set.images[p], set.identities[p], random_saliency(112, 112, 2, i), set.names[p]});
    }
    EvalOptions opt;
    const auto a_method = identification_metric(method, gallery, 1, e, opt);
    const auto a_random = identification_metric(baseline, gallery, 1, e, opt);
    EXPECT_TRUE(a_method.excluded.empty());
    EXPECT_LT(a_method.curve.auc, a_random.curve.auc);
}
