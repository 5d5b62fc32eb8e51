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

#include <cstddef>

#include "saliex/errors.hpp"
#include "saliex/kernels.hpp"
#include "kernels/dot.hpp"

namespace saliex::kernels::serial {

void mask_batch(const Image& image, std::span<const Mask> masks, std::span<Image> out) {
    const std::size_t pixels = image.pixel_count();
    const int channels = image.channels();
    for (std::size_t k = 0; k < masks.size(); ++k) {
        const float* src = image.data();
        const float* m = masks[k].data();
        float* dst = out[k].data();
        for (std::size_t p = 0; p < pixels; ++p) {
            for (int c = 0; c < channels; ++c) {
                dst[p * channels + c] = src[p * channels + c] * m[p];
            }
        }
    }
}

void blend_batch(const Image& keep, const Image& fill, std::span<const Mask> masks,
                 std::span<Image> out) {
    const std::size_t pixels = keep.pixel_count();
    const int channels = keep.channels();
    for (std::size_t k = 0; k < masks.size(); ++k) {
        const float* a = keep.data();
        const float* b = fill.data();
        const float* m = masks[k].data();
        float* dst = out[k].data();
        for (std::size_t p = 0; p < pixels; ++p) {
            for (int c = 0; c < channels; ++c) {
                const std::size_t i = p * channels + c;
                dst[i] = a[i] * (1.0f - m[p]) + b[i] * m[p];
            }
        }
    }
}

void block_average_batch(std::span<const Image> images, int grid,
                         std::vector<std::vector<float>>& out) {
    out.resize(images.size());
    for (std::size_t n = 0; n < images.size(); ++n) {
        const Image& img = images[n];
        const int h = img.height();
        const int w = img.width();
        const int ch = img.channels();
        out[n].assign(static_cast<std::size_t>(grid) * grid * ch, 0.0f);
        for (int gy = 0; gy < grid; ++gy) {
            const int r0 = gy * h / grid;
            const int r1 = (gy + 1) * h / grid;
            for (int gx = 0; gx < grid; ++gx) {
                const int c0 = gx * w / grid;
                const int c1 = (gx + 1) * w / grid;
                const double count = static_cast<double>(r1 - r0) * (c1 - c0);
                for (int c = 0; c < ch; ++c) {
                    double sum = 0.0;
                    for (int r = r0; r < r1; ++r) {
                        for (int col = c0; col < c1; ++col) sum += img.at(r, col, c);
                    }
                    out[n][(static_cast<std::size_t>(gy) * grid + gx) * ch + c] =
                        static_cast<float>(sum / count);
                }
            }
        }
    }
}

void project_batch(std::span<const Image> images, std::span<const float> weights, int dim,
                   std::vector<std::vector<float>>& out) {
    out.resize(images.size());
    for (std::size_t n = 0; n < images.size(); ++n) {
        const std::size_t len = images[n].size();
        if (weights.size() != len * static_cast<std::size_t>(dim)) {
            throw DimensionError("projection weights do not match image size");
        }
        const float* x = images[n].data();
        out[n].assign(static_cast<std::size_t>(dim), 0.0f);
        for (int r = 0; r < dim; ++r) {
            const float* row = weights.data() + static_cast<std::size_t>(r) * len;
            out[n][r] = static_cast<float>(detail::dot_f32(row, x, len));
        }
    }
}

void accumulate_moments(std::span<const Mask> masks, std::span<const ScoreList> scores,
                        std::span<const double> shifts, MomentSums& sums) {
    const int pixels = sums.pixels;
    for (std::size_t k = 0; k < masks.size(); ++k) {
        const float* m = masks[k].data();
        for (int p = 0; p < pixels; ++p) {
            const double v = m[p];
            sums.sum_m[p] += v;
            sums.sum_mm[p] += v * v;
            for (int c = 0; c < sums.channels; ++c) {
                sums.sum_ms[static_cast<std::size_t>(c) * pixels + p] += v * (scores[c][k] - shifts[c]);
            }
        }
    }
}

SaliencyMap gaussian_blur(const SaliencyMap& map, double sigma) {
    const std::vector<double> taps = gaussian_taps(sigma);
    if (taps.size() == 1) return map;
    const int radius = static_cast<int>(taps.size() / 2);
    const int h = map.height();
    const int w = map.width();
    SaliencyMap tmp(h, w);
    SaliencyMap out(h, w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t) {
                acc += taps[t + radius] * map.at(r, reflect_index(c + t, w));
            }
            tmp.at(r, c) = static_cast<float>(acc);
        }
    }
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t) {
                acc += taps[t + radius] * tmp.at(reflect_index(r + t, h), c);
            }
            out.at(r, c) = static_cast<float>(acc);
        }
    }
    return out;
}

}  // namespace saliex::kernels::serial
