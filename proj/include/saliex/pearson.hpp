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

#include <span>
#include <vector>

#include "saliex/kernels.hpp"
#include "saliex/types.hpp"

namespace saliex {

/// Streaming pixel-wise Pearson correlation between mask values and one or
/// more score channels. Masks are fed in batches and never retained.
///
/// Scores are accumulated relative to the first score seen on each channel,
/// which keeps the variance sums well conditioned when cosines sit close
/// together (e.g. all near 0.99).
class PearsonAccumulator {
public:
    PearsonAccumulator(int height, int width, int channels = 1);

    /// scores[c][k] pairs with masks[k]. Batches must be added in mask order
    /// for results to be reproducible bit for bit.
    void add(std::span<const Mask> masks, std::span<const ScoreList> scores);

    std::size_t count() const noexcept { return count_; }

    /// Map of correlations for one channel. Pixels where either the mask
    /// values or the scores have zero variance get 0. Needs count() >= 2.
    SaliencyMap finish(int channel = 0) const;

private:
    int height_;
    int width_;
    std::size_t count_ = 0;
    kernels::MomentSums sums_;
    std::vector<double> shift_;
    std::vector<double> sum_s_;
    std::vector<double> sum_ss_;
};

/// Two-pass batch form over a materialized mask set.
SaliencyMap pixelwise_pearson(std::span<const double> scores, const MaskSet& masks);

}  // namespace saliex
