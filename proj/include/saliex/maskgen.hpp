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
#include <filesystem>

#include "saliex/types.hpp"

namespace saliex {

/// Mask `index` of the set keyed by `seed`. Each mask is drawn from its own
/// stream derive_seed(seed, "mask", index), so masks can be produced in any
/// order (or in parallel) with identical values.
///
/// The mask starts as all ones; `patches_per_mask` square patches are stamped
/// at uniformly random integer top-left corners in [0, H-size] x [0, W-size].
/// Later patches overwrite earlier ones. Patch interiors are 0 (binary),
/// U[0,1] (random) or N(0.5, 0.25^2) clamped to [0,1] (gaussian).
Mask generate_mask(const MaskGenConfig& config, int height, int width, std::uint64_t seed,
                   std::uint64_t index);

/// Masks [first, first + count) of the set, generated in parallel.
std::vector<Mask> generate_mask_range(const MaskGenConfig& config, int height, int width,
                                      std::uint64_t seed, std::uint64_t first, std::size_t count);

MaskSet generate_masks(const MaskGenConfig& config, int height, int width, std::uint64_t seed);

/// Pixel-wise product; the mask broadcasts across channels.
Image apply_mask(const Image& image, const Mask& mask);

/// Writes one PFM per mask as `mask_{index:05}.pfm`.
void dump_mask_set(const MaskSet& set, const std::filesystem::path& dir);

}  // namespace saliex
