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

#include "saliex/types.hpp"

#include <algorithm>
#include <string>

#include "saliex/errors.hpp"

namespace saliex {

namespace {

void check_dims(int height, int width) {
    if (height <= 0 || width <= 0) {
        throw DimensionError("grid dimensions must be positive, got " + std::to_string(height) +
                             "x" + std::to_string(width));
    }
}

}  // namespace

template <typename Tag>
Grid<Tag>::Grid(int height, int width, float fill)
    : height_(height), width_(width) {
    check_dims(height, width);
    values_.assign(static_cast<std::size_t>(height) * width, fill);
}

template <typename Tag>
Grid<Tag>::Grid(int height, int width, std::vector<float> values)
    : height_(height), width_(width), values_(std::move(values)) {
    check_dims(height, width);
    if (values_.size() != static_cast<std::size_t>(height) * width) {
        throw DimensionError("grid value count does not match " + std::to_string(height) + "x" +
                             std::to_string(width));
    }
}

template class Grid<MaskTag>;
template class Grid<SaliencyTag>;

Image::Image(int height, int width, int channels, float fill)
    : height_(height), width_(width), channels_(channels) {
    check_dims(height, width);
    if (channels != 1 && channels != 3) {
        throw DimensionError("image channels must be 1 or 3, got " + std::to_string(channels));
    }
    pixels_.assign(pixel_count() * channels, fill);
}

Image::Image(int height, int width, int channels, std::vector<float> pixels)
    : height_(height), width_(width), channels_(channels), pixels_(std::move(pixels)) {
    check_dims(height, width);
    if (channels != 1 && channels != 3) {
        throw DimensionError("image channels must be 1 or 3, got " + std::to_string(channels));
    }
    if (pixels_.size() != pixel_count() * channels) {
        throw DimensionError("pixel count does not match image shape");
    }
}

void validate_pixels(const Image& image) {
    const auto px = image.pixels();
    const auto bad = std::find_if(px.begin(), px.end(), [](float v) { return !(v >= 0.0f && v <= 1.0f); });
    if (bad != px.end()) {
        throw DimensionError("pixel value outside [0,1]: " + std::to_string(*bad));
    }
}

std::string_view to_string(MaskType type) {
    switch (type) {
        case MaskType::binary: return "binary";
        case MaskType::random: return "random";
        case MaskType::gaussian: return "gaussian";
    }
    return "binary";
}

MaskType parse_mask_type(std::string_view name) {
    if (name == "binary") return MaskType::binary;
    if (name == "random") return MaskType::random;
    if (name == "gaussian") return MaskType::gaussian;
    throw ConfigError("mask_type", "unknown mask type '" + std::string(name) + "'");
}

void MaskGenConfig::validate(int height, int width) const {
    if (num_masks < 1) throw ConfigError("num_masks", "must be >= 1");
    if (patches_per_mask < 1) throw ConfigError("patches_per_mask", "must be >= 1");
    if (patch_size < 1 || patch_size > std::min(height, width)) {
        throw ConfigError("patch_size", "must lie in [1, " + std::to_string(std::min(height, width)) +
                                            "], got " + std::to_string(patch_size));
    }
}

SplitSaliency split_saliency(const SaliencyMap& signed_map) {
    SplitSaliency out{SaliencyMap(signed_map.height(), signed_map.width()),
                      SaliencyMap(signed_map.height(), signed_map.width())};
    for (std::size_t i = 0; i < signed_map.size(); ++i) {
        const float v = signed_map[i];
        out.positive[i] = v > 0.0f ? v : 0.0f;
        out.negative[i] = v < 0.0f ? -v : 0.0f;
    }
    return out;
}

}  // namespace saliex
