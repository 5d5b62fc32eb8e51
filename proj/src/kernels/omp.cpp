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
#include <cstdint>

#include "saliex/errors.hpp"
#include "saliex/kernels.hpp"
#include "kernels/dot.hpp"

namespace saliex::kernels::omp {

void mask_batch(const Image& image, std::span<const Mask> masks, std::span<Image> out) {
    const std::int64_t pixels = static_cast<std::int64_t>(image.pixel_count());
    const int channels = image.channels();
    const std::int64_t count = static_cast<std::int64_t>(masks.size());
    const float* src = image.data();
#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t k = 0; k < count; ++k) {
        for (std::int64_t p = 0; p < pixels; ++p) {
            const float m = masks[k].data()[p];
            float* dst = out[k].data() + p * channels;
            for (int c = 0; c < channels; ++c) dst[c] = src[p * channels + c] * m;
        }
    }
}

void blend_batch(const Image& keep, const Image& fill, std::span<const Mask> masks,
                 std::span<Image> out) {
    const std::int64_t pixels = static_cast<std::int64_t>(keep.pixel_count());
    const int channels = keep.channels();
    const std::int64_t count = static_cast<std::int64_t>(masks.size());
    const float* a = keep.data();
    const float* b = fill.data();
#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t k = 0; k < count; ++k) {
        for (std::int64_t p = 0; p < pixels; ++p) {
            const float m = masks[k].data()[p];
            float* dst = out[k].data() + p * channels;
            for (int c = 0; c < channels; ++c) {
                const std::int64_t i = p * channels + c;
                dst[c] = a[i] * (1.0f - m) + b[i] * m;
            }
        }
    }
}

void block_average_batch(std::span<const Image> images, int grid,
                         std::vector<std::vector<float>>& out) {
    const std::int64_t count = static_cast<std::int64_t>(images.size());
    out.resize(images.size());
    for (std::int64_t n = 0; n < count; ++n) {
        out[n].assign(static_cast<std::size_t>(grid) * grid * images[n].channels(), 0.0f);
    }
    const std::int64_t cells = static_cast<std::int64_t>(grid) * grid;
#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t n = 0; n < count; ++n) {
        for (std::int64_t cell = 0; cell < cells; ++cell) {
            const Image& img = images[n];
            const int gy = static_cast<int>(cell / grid);
            const int gx = static_cast<int>(cell % grid);
            const int r0 = gy * img.height() / grid;
            const int r1 = (gy + 1) * img.height() / grid;
            const int c0 = gx * img.width() / grid;
            const int c1 = (gx + 1) * img.width() / grid;
            const double area = static_cast<double>(r1 - r0) * (c1 - c0);
            const int ch = img.channels();
            for (int c = 0; c < ch; ++c) {
                double sum = 0.0;
                for (int r = r0; r < r1; ++r) {
                    for (int col = c0; col < c1; ++col) sum += img.at(r, col, c);
                }
                out[n][static_cast<std::size_t>(cell) * ch + c] = static_cast<float>(sum / area);
            }
        }
    }
}

void project_batch(std::span<const Image> images, std::span<const float> weights, int dim,
                   std::vector<std::vector<float>>& out) {
    const std::int64_t count = static_cast<std::int64_t>(images.size());
    out.resize(images.size());
    for (std::int64_t n = 0; n < count; ++n) {
        if (weights.size() != images[n].size() * static_cast<std::size_t>(dim)) {
            throw DimensionError("projection weights do not match image size");
        }
        out[n].assign(static_cast<std::size_t>(dim), 0.0f);
    }
    if (count == 0) return;
    // Row-major over weights so each row stays cached across the batch.
#pragma omp parallel for schedule(static)
    for (int r = 0; r < dim; ++r) {
        const float* row = weights.data() + static_cast<std::size_t>(r) * images.front().size();
        for (std::int64_t n = 0; n < count; ++n) {
            out[n][r] = static_cast<float>(detail::dot_f32(row, images[n].data(), images[n].size()));
        }
    }
}

void accumulate_moments(std::span<const Mask> masks, std::span<const ScoreList> scores,
                        std::span<const double> shifts, MomentSums& sums) {
    const int pixels = sums.pixels;
    const int channels = sums.channels;
    const std::size_t count = masks.size();
    // Pixel-parallel; each pixel walks the masks in index order.
#pragma omp parallel for schedule(static)
    for (int p = 0; p < pixels; ++p) {
        double sm = sums.sum_m[p];
        double smm = sums.sum_mm[p];
        for (std::size_t k = 0; k < count; ++k) {
            const double v = masks[k].data()[p];
            sm += v;
            smm += v * v;
            for (int c = 0; c < channels; ++c) {
                sums.sum_ms[static_cast<std::size_t>(c) * pixels + p] += v * (scores[c][k] - shifts[c]);
            }
        }
        sums.sum_m[p] = sm;
        sums.sum_mm[p] = smm;
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
#pragma omp parallel for schedule(static)
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t) {
                acc += taps[t + radius] * map.at(r, reflect_index(c + t, w));
            }
            tmp.at(r, c) = static_cast<float>(acc);
        }
    }
#pragma omp parallel for schedule(static)
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

}  // namespace saliex::kernels::omp
