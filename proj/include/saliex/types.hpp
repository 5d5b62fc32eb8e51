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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace saliex {

/// Single-channel H x W float grid, row-major. The tag makes masks and
/// saliency maps distinct types even though they share a layout.
template <typename Tag>
class Grid {
public:
    Grid() = default;
    Grid(int height, int width, float fill = 0.0f);
    Grid(int height, int width, std::vector<float> values);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    float& at(int row, int col) { return values_[static_cast<std::size_t>(row) * width_ + col]; }
    float at(int row, int col) const { return values_[static_cast<std::size_t>(row) * width_ + col]; }
    float& operator[](std::size_t i) { return values_[i]; }
    float operator[](std::size_t i) const { return values_[i]; }

    std::span<float> values() noexcept { return values_; }
    std::span<const float> values() const noexcept { return values_; }
    float* data() noexcept { return values_.data(); }
    const float* data() const noexcept { return values_.data(); }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<float> values_;
};

struct MaskTag {};
struct SaliencyTag {};

/// Spatial multiplier in [0,1]; binary masks hold only 0 and 1.
using Mask = Grid<MaskTag>;

/// Signed per-pixel saliency. Positive = similarity evidence, negative = dissimilarity.
using SaliencyMap = Grid<SaliencyTag>;

/// H x W x C image with values in [0,1], row-major and channel-interleaved.
class Image {
public:
    Image() = default;
    Image(int height, int width, int channels, float fill = 0.0f);
    Image(int height, int width, int channels, std::vector<float> pixels);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    int channels() const noexcept { return channels_; }
    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(height_) * width_; }
    std::size_t size() const noexcept { return pixels_.size(); }
    bool empty() const noexcept { return pixels_.empty(); }

    float& at(int row, int col, int ch) {
        return pixels_[(static_cast<std::size_t>(row) * width_ + col) * channels_ + ch];
    }
    float at(int row, int col, int ch) const {
        return pixels_[(static_cast<std::size_t>(row) * width_ + col) * channels_ + ch];
    }

    std::span<float> pixels() noexcept { return pixels_; }
    std::span<const float> pixels() const noexcept { return pixels_; }
    float* data() noexcept { return pixels_.data(); }
    const float* data() const noexcept { return pixels_.data(); }

    bool same_shape(const Image& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::vector<float> pixels_;
};

/// Throws DimensionError unless every value lies in [0,1].
void validate_pixels(const Image& image);

enum class MaskType { binary, random, gaussian };

std::string_view to_string(MaskType type);
MaskType parse_mask_type(std::string_view name);

struct MaskGenConfig {
    int num_masks = 1000;
    int patches_per_mask = 10;
    int patch_size = 30;
    MaskType mask_type = MaskType::binary;

    /// Throws ConfigError naming the offending field.
    void validate(int height, int width) const;
};

struct MaskSet {
    std::vector<Mask> masks;
    MaskGenConfig config;
    std::uint64_t seed = 0;
};

/// Unit-norm feature vector produced by an embedder.
struct Embedding {
    std::vector<float> values;

    std::size_t dim() const noexcept { return values.size(); }
};

/// Per-mask similarity scores, one entry per mask.
using ScoreList = std::vector<double>;

struct SplitSaliency {
    SaliencyMap positive;  ///< max(S, 0)
    SaliencyMap negative;  ///< max(-S, 0)
};

SplitSaliency split_saliency(const SaliencyMap& signed_map);

}  // namespace saliex
