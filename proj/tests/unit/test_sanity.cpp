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

#include <cmath>

#include "saliex/errors.hpp"
#include "saliex/sanity.hpp"
#include "saliex/toyset.hpp"

using namespace saliex;

namespace {

std::vector<VerificationSample> suite() {
    ToysetConfig c;
    c.subjects = 2;
    c.images_per_subject = 2;
    c.size = 32;
    c.patch = 8;
    return verification_samples(make_toyset(c));
}

SanityConfig quick() {
    SanityConfig c;
    c.trials = 1;
    c.explain.mask_config.num_masks = 64;
    c.explain.mask_config.patch_size = 8;
    c.eval.steps = 8;
    c.proj_dim = 16;
    c.grid = 4;
    return c;
}

}  // namespace

TEST(Sanity, ReproducibleAndConsistent) {
    const auto s = suite();
    const auto r1 = sanity_check(s, quick());
    const auto r2 = sanity_check(s, quick());
    ASSERT_EQ(r1.trials.size(), 1u);
    const auto& t = r1.trials[0];
    EXPECT_EQ(t.auc_structured, r2.trials[0].auc_structured);
    EXPECT_EQ(t.auc_randomized, r2.trials[0].auc_randomized);
    EXPECT_DOUBLE_EQ(t.gap_structured, t.auc_random_maps - t.auc_structured);
    EXPECT_DOUBLE_EQ(t.gap_randomized, t.auc_random_maps_rand - t.auc_randomized);
    EXPECT_EQ(t.auc_random_maps, t.auc_random_maps_rand);
    EXPECT_EQ(t.pass, t.gap_structured > 0.05 && std::abs(t.gap_randomized) <= 0.02);
    EXPECT_EQ(r1.pass, t.pass);
}

TEST(Sanity, TrialsUseDistinctModels) {
    auto c = quick();
    c.trials = 2;
    const auto r = sanity_check(suite(), c);
    ASSERT_EQ(r.trials.size(), 2u);
    EXPECT_NE(r.trials[0].random_model_seed, r.trials[1].random_model_seed);
}

TEST(Sanity, InvalidConfig) {
    auto c = quick();
    c.trials = 0;
    EXPECT_THROW(sanity_check(suite(), c), ConfigError);
}
