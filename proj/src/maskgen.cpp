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

#include "saliex/maskgen.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

#include "saliex/errors.hpp"
#include "saliex/image_io.hpp"
#include "saliex/kernels.hpp"
#include "saliex/seed.hpp"

namespace saliex {

Mask generate_mask(const MaskGenConfig& config, int height, int width, std::uint64_t seed,
                   std::uint64_t index) {
    config.validate(height, width);
    std::mt19937_64 rng(derive_seed(seed, "mask", index));
    std::uniform_int_distribution<int> row_dist(0, height - config.patch_size);
    std::uniform_int_distribution<int> col_dist(0, width - config.patch_size);
    std::uniform_real_distribution<float> uniform(0.0f, 1.0f);
    std::normal_distribution<float> normal(0.5f, 0.25f);

    Mask mask(height, width, 1.0f);
    const int size = config.patch_size;
    for (int patch = 0; patch < config.patches_per_mask; ++patch) {
        const int top = row_dist(rng);
        const int left = col_dist(rng);
        for (int r = top; r < top + size; ++r) {
            for (int c = left; c < left + size; ++c) {
                switch (config.mask_type) {
                    case MaskType::binary: mask.at(r, c) = 0.0f; break;
                    case MaskType::random: mask.at(r, c) = uniform(rng); break;
                    case MaskType::gaussian:
                        mask.at(r, c) = std::clamp(normal(rng), 0.0f, 1.0f);
                        break;
                }
            }
        }
    }
    return mask;
}

std::vector<Mask> generate_mask_range(const MaskGenConfig& config, int height, int width,
                                      std::uint64_t seed, std::uint64_t first, std::size_t count) {
    config.validate(height, width);
    std::vector<Mask> masks(count);
    const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        masks[i] = generate_mask(config, height, width, seed, first + static_cast<std::uint64_t>(i));
    }
    return masks;
}

MaskSet generate_masks(const MaskGenConfig& config, int height, int width, std::uint64_t seed) {
    MaskSet set;
    set.masks = generate_mask_range(config, height, width, seed, 0,
                                    static_cast<std::size_t>(config.num_masks));
    set.config = config;
    set.seed = seed;
    return set;
}

Image apply_mask(const Image& image, const Mask& mask) {
    if (image.height() != mask.height() || image.width() != mask.width()) {
        throw DimensionError("mask and image dimensions differ");
    }
    Image out(image.height(), image.width(), image.channels());
    kernels::serial::mask_batch(image, std::span(&mask, 1), std::span(&out, 1));
    return out;
}

void dump_mask_set(const MaskSet& set, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (std::size_t k = 0; k < set.masks.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof(name), "mask_%05zu.pfm", k);
        const Mask& m = set.masks[k];
        save_pfm(SaliencyMap(m.height(), m.width(), std::vector<float>(m.values().begin(), m.values().end())),
                 dir / name);
    }
}

}  // namespace saliex
