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

// Data-parallel inner loops. Every kernel exists twice with the same
// signature: `serial::` is the plain reference and `omp::` is the OpenMP
// version used by the library. Tests compare the two; bench/ times them.
//
// All omp kernels partition work so that each output element is produced by
// exactly one thread in a fixed summation order, so their results are
// bit-identical to the serial versions for any thread count.

#include <span>
#include <vector>

#include "saliex/types.hpp"

namespace saliex::kernels {

/// Running sums for a pixel-wise Pearson correlation against one or more
/// score channels. Scores are accumulated relative to a per-channel shift.
struct MomentSums {
    int pixels = 0;
    int channels = 0;
    std::vector<double> sum_m;    ///< [pixel]
    std::vector<double> sum_mm;   ///< [pixel]
    std::vector<double> sum_ms;   ///< [channel * pixels + pixel]

    MomentSums() = default;
    MomentSums(int pixel_count, int channel_count)
        : pixels(pixel_count),
          channels(channel_count),
          sum_m(static_cast<std::size_t>(pixel_count), 0.0),
          sum_mm(static_cast<std::size_t>(pixel_count), 0.0),
          sum_ms(static_cast<std::size_t>(pixel_count) * channel_count, 0.0) {}
};

#define SALIEX_KERNEL_DECLS                                                                    \
    /* out[k] = image (*) masks[k], mask broadcast over channels */                           \
    void mask_batch(const Image& image, std::span<const Mask> masks, std::span<Image> out);    \
    /* out[k] = keep (*) (1 - masks[k]) + fill (*) masks[k] */                                 \
    void blend_batch(const Image& keep, const Image& fill, std::span<const Mask> masks,        \
                     std::span<Image> out);                                                    \
    /* Mean-pool each channel onto a grid x grid lattice; layout (cell_row, cell_col, ch). */  \
    void block_average_batch(std::span<const Image> images, int grid,                          \
                             std::vector<std::vector<float>>& out);                            \
    /* out[i] = weights(dim x P) * flatten(images[i]), accumulated in double. */               \
    void project_batch(std::span<const Image> images, std::span<const float> weights, int dim, \
                       std::vector<std::vector<float>>& out);                                  \
    /* Adds masks (in index order) with (score - shift) per channel into sums. */              \
    void accumulate_moments(std::span<const Mask> masks, std::span<const ScoreList> scores,    \
                            std::span<const double> shifts, MomentSums& sums);                 \
    /* Separable Gaussian, radius ceil(3 sigma), half-sample symmetric padding. */             \
    SaliencyMap gaussian_blur(const SaliencyMap& map, double sigma);

namespace serial {
SALIEX_KERNEL_DECLS
}  // namespace serial

namespace omp {
SALIEX_KERNEL_DECLS
}  // namespace omp

#undef SALIEX_KERNEL_DECLS

/// Normalized 1-D Gaussian taps for the given sigma (single tap 1.0 when sigma == 0).
std::vector<double> gaussian_taps(double sigma);

/// Index folding for half-sample symmetric padding: ... c b a | a b c ... | c b a ...
int reflect_index(int i, int n);

}  // namespace saliex::kernels
