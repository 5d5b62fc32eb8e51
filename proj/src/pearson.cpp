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

#include "saliex/pearson.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "saliex/errors.hpp"

namespace saliex {

namespace {

constexpr double kMaskVarFloor = 1e-12;
constexpr double kScoreVarFloor = 1e-20;

double correlation(double cov, double var_m, double var_s) {
    if (var_m <= kMaskVarFloor || var_s <= kScoreVarFloor) return 0.0;
    return std::clamp(cov / std::sqrt(var_m * var_s), -1.0, 1.0);
}

}  // namespace

PearsonAccumulator::PearsonAccumulator(int height, int width, int channels)
    : height_(height),
      width_(width),
      sums_(height * width, channels),
      shift_(static_cast<std::size_t>(channels), 0.0),
      sum_s_(static_cast<std::size_t>(channels), 0.0),
      sum_ss_(static_cast<std::size_t>(channels), 0.0) {
    if (height <= 0 || width <= 0 || channels <= 0) {
        throw DimensionError("accumulator dimensions must be positive");
    }
}

void PearsonAccumulator::add(std::span<const Mask> masks, std::span<const ScoreList> scores) {
    if (scores.size() != static_cast<std::size_t>(sums_.channels)) {
        throw DimensionError("expected " + std::to_string(sums_.channels) + " score channels");
    }
    for (const ScoreList& s : scores) {
        if (s.size() != masks.size()) throw DimensionError("score list and mask batch lengths differ");
    }
    for (const Mask& m : masks) {
        if (m.height() != height_ || m.width() != width_) {
            throw DimensionError("mask dimensions differ from accumulator");
        }
    }
    if (masks.empty()) return;
    if (count_ == 0) {
        for (std::size_t c = 0; c < scores.size(); ++c) shift_[c] = scores[c].front();
    }
    for (std::size_t c = 0; c < scores.size(); ++c) {
        for (double s : scores[c]) {
            const double d = s - shift_[c];
            sum_s_[c] += d;
            sum_ss_[c] += d * d;
        }
    }
    kernels::omp::accumulate_moments(masks, scores, shift_, sums_);
    count_ += masks.size();
}

SaliencyMap PearsonAccumulator::finish(int channel) const {
    if (count_ < 2) throw InsufficientSamples("insufficient samples: need at least 2 masks");
    if (channel < 0 || channel >= sums_.channels) throw DimensionError("no such score channel");
    const double n = static_cast<double>(count_);
    const double mean_s = sum_s_[channel] / n;
    const double var_s = sum_ss_[channel] / n - mean_s * mean_s;
    SaliencyMap out(height_, width_);
    const std::size_t offset = static_cast<std::size_t>(channel) * sums_.pixels;
    for (int p = 0; p < sums_.pixels; ++p) {
        const double mean_m = sums_.sum_m[p] / n;
        const double var_m = sums_.sum_mm[p] / n - mean_m * mean_m;
        const double cov = sums_.sum_ms[offset + p] / n - mean_m * mean_s;
        out[p] = static_cast<float>(correlation(cov, var_m, var_s));
    }
    return out;
}

SaliencyMap pixelwise_pearson(std::span<const double> scores, const MaskSet& masks) {
    const std::size_t n = masks.masks.size();
    if (scores.size() != n) throw DimensionError("score list and mask set lengths differ");
    if (n < 2) throw InsufficientSamples("insufficient samples: need at least 2 masks");
    const int h = masks.masks.front().height();
    const int w = masks.masks.front().width();

    double mean_s = 0.0;
    for (double s : scores) mean_s += s;
    mean_s /= static_cast<double>(n);
    double var_s = 0.0;
    for (double s : scores) var_s += (s - mean_s) * (s - mean_s);
    var_s /= static_cast<double>(n);

    SaliencyMap out(h, w);
    for (std::size_t p = 0; p < out.size(); ++p) {
        double mean_m = 0.0;
        for (const Mask& m : masks.masks) mean_m += m[p];
        mean_m /= static_cast<double>(n);
        double var_m = 0.0;
        double cov = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double dm = masks.masks[k][p] - mean_m;
            var_m += dm * dm;
            cov += dm * (scores[k] - mean_s);
        }
        out[p] = static_cast<float>(correlation(cov / n, var_m / n, var_s));
    }
    return out;
}

}  // namespace saliex
