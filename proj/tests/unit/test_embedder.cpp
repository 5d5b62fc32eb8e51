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
#include <fstream>

#include "helpers.hpp"
#include "saliex/embedder.hpp"
#include "saliex/errors.hpp"

using namespace saliex;

namespace {

Embedding unit(std::vector<float> v) { return *normalize_features(v); }

}  // namespace

TEST(EmbedderSpec, Grammar) {
    auto s = EmbedderSpec::parse("toy:block-avg:g=8");
    EXPECT_EQ(s.kind, EmbedderKind::block_avg);
    EXPECT_EQ(s.grid, 8);
    s = EmbedderSpec::parse("toy:block-avg");
    EXPECT_EQ(s.grid, 8);
    s = EmbedderSpec::parse("toy:rand-proj:d=64,seed=99");
    EXPECT_EQ(s.kind, EmbedderKind::rand_proj);
    EXPECT_EQ(s.dim, 64);
    EXPECT_EQ(s.weight_seed, 99u);
    s = EmbedderSpec::parse("ext:cmd=python3 serve.py --x=1,2");
    EXPECT_EQ(s.kind, EmbedderKind::external);
    EXPECT_EQ(s.command, "python3 serve.py --x=1,2");
    s = EmbedderSpec::parse("ext:tcp=localhost:9000");
    EXPECT_EQ(s.address, "localhost:9000");
    for (const char* text : {"toy:rand-proj:d=128,seed=7", "toy:block-avg:g=3", "ext:tcp=h:1"}) {
        EXPECT_EQ(EmbedderSpec::parse(text).to_string(), text);
    }
}

TEST(EmbedderSpec, Rejects) {
    auto field_of = [](const char* text) {
        try {
            EmbedderSpec::parse(text);
        } catch (const ConfigError& e) {
            return e.field();
        }
        return std::string("none");
    };
    EXPECT_EQ(field_of("toy:block-avg:g=0"), "g");
    EXPECT_EQ(field_of("toy:block-avg:g=x"), "g");
    EXPECT_EQ(field_of("toy:rand-proj:d=1"), "d");
    EXPECT_EQ(field_of("toy:rand-proj:q=1"), "model");
    EXPECT_EQ(field_of("toy:block-avgg"), "model");
    EXPECT_EQ(field_of("resnet"), "model");
    EXPECT_EQ(field_of("ext:cmd="), "model");
    EXPECT_EQ(field_of("ext:tcp=nohost"), "model");
}

TEST(BlockAverage, UniformGrayGridOne) {
    const BlockAverageEmbedder e(1);
    const Image gray(5, 7, 3, 0.5f);
    const auto out = embed(e, std::span(&gray, 1));
    ASSERT_EQ(out.front().dim(), 3u);
    for (float v : out.front().values) EXPECT_NEAR(v, 1.0 / std::sqrt(3.0), 1e-7);
}

TEST(BlockAverage, CellMeans) {
    // 4x4 single channel, g=2: each output is the mean of a 2x2 quadrant.
    Image img(4, 4, 1);
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) img.at(r, c, 0) = static_cast<float>(r * 4 + c) / 16.0f;
    }
    const auto raw = BlockAverageEmbedder(2).features(std::span(&img, 1)).front();
    const std::vector<float> expect = {2.5f / 16, 4.5f / 16, 10.5f / 16, 12.5f / 16};
    ASSERT_EQ(raw.size(), 4u);
    for (int i = 0; i < 4; ++i) EXPECT_FLOAT_EQ(raw[i], expect[i]);
}

TEST(BlockAverage, Locality) {
    const BlockAverageEmbedder e(4);
    const Image base = test::random_image(16, 16, 3, 1);
    Image changed = base;
    for (int r = 4; r < 8; ++r) {
        for (int c = 8; c < 12; ++c) changed.at(r, c, 2) = 0.0f;
    }
    const Image both[2] = {base, changed};
    const auto raw = e.features(both);
    for (std::size_t i = 0; i < raw[0].size(); ++i) {
        const bool in_cell = i / 3 == 1 * 4 + 2;
        if (in_cell && i % 3 == 2) EXPECT_NE(raw[0][i], raw[1][i]);
        else EXPECT_EQ(raw[0][i], raw[1][i]) << i;
    }
}

TEST(BlockAverage, DegenerateAndOversizedGrid) {
    const Image black(8, 8, 3);
    EXPECT_THROW(embed(BlockAverageEmbedder(2), std::span(&black, 1)), DegenerateEmbedding);
    EXPECT_FALSE(embed_lenient(BlockAverageEmbedder(2), std::span(&black, 1)).front().has_value());
    EXPECT_THROW(embed(BlockAverageEmbedder(9), std::span(&black, 1)), ConfigError);
}

TEST(Embed, BatchValidation) {
    const BlockAverageEmbedder e(2);
    EXPECT_THROW(embed(e, std::span<const Image>()), DimensionError);
    const Image mixed[2] = {Image(4, 4, 3, 0.5f), Image(4, 5, 3, 0.5f)};
    EXPECT_THROW(embed(e, mixed), DimensionError);
}

TEST(Embed, PureAndUnitNorm) {
    for (const auto& spec : {EmbedderSpec::block_avg(8), EmbedderSpec::rand_proj(32, 3)}) {
        const auto e = make_embedder(spec);
        const Image img = test::random_image(24, 24, 3, 5);
        const Image batch[3] = {img, test::random_image(24, 24, 3, 6), img};
        const auto first = embed(*e, batch);
        const auto second = embed(*e, batch);
        EXPECT_EQ(first[0].values, first[2].values);
        for (std::size_t i = 0; i < 3; ++i) {
            EXPECT_EQ(first[i].values, second[i].values);
            double n2 = 0;
            for (float v : first[i].values) n2 += double(v) * v;
            EXPECT_NEAR(std::sqrt(n2), 1.0, 1e-6);
        }
    }
}

TEST(RandomProjection, GoldenVector) {
    Image img(4, 4, 3);
    for (int i = 0; i < 48; ++i) img.data()[i] = static_cast<float>(i / 47.0);
    const auto out = embed(RandomProjectionEmbedder(128, 7), std::span(&img, 1)).front();
    std::ifstream in(SALIEX_TEST_DATA "/rand_proj_d128_s7.txt");
    ASSERT_TRUE(in);
    std::vector<double> golden;
    for (double v; in >> v;) golden.push_back(v);
    ASSERT_EQ(golden.size(), 128u);
    for (int i = 0; i < 128; ++i) EXPECT_NEAR(out.values[i], golden[i], 1e-6) << i;
}

TEST(RandomProjection, WeightsAreStandardNormal) {
    const auto w = projection_weights(64, 11, 500);
    double mean = 0, var = 0;
    for (float v : w) mean += v;
    mean /= w.size();
    for (float v : w) var += (v - mean) * (v - mean);
    var /= w.size();
    EXPECT_NEAR(mean, 0.0, 0.01);
    EXPECT_NEAR(var, 1.0, 0.02);
    EXPECT_EQ(w, projection_weights(64, 11, 500));
    EXPECT_NE(w, projection_weights(64, 12, 500));
}

TEST(Cosine, Examples) {
    const auto a = unit({1, 0});
    EXPECT_DOUBLE_EQ(cosine_similarity(a, a), 1.0);
    EXPECT_DOUBLE_EQ(cosine_similarity(a, unit({0, 1})), 0.0);
    EXPECT_NEAR(cosine_similarity(a, unit({1, 1})), 0.70710678, 1e-7);
    EXPECT_THROW(cosine_similarity(a, unit({1, 1, 1})), DimensionError);
}

TEST(Cosine, SymmetricAndClamped) {
    const auto x = embed(RandomProjectionEmbedder(16, 1), std::vector{test::random_image(6, 6, 3, 1),
                                                                      test::random_image(6, 6, 3, 2)});
    EXPECT_EQ(cosine_similarity(x[0], x[1]), cosine_similarity(x[1], x[0]));
    const auto big = unit(std::vector<float>(1000, 1.0f));
    EXPECT_LE(cosine_similarity(big, big), 1.0);
}
