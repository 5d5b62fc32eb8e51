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

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "saliex/types.hpp"

namespace saliex {

/// Decodes PNG/JPEG/BMP, center-crops to the target aspect ratio, resizes
/// bilinearly to height x width and scales to [0,1]. Grayscale sources are
/// replicated when `channels` is 3; color sources are converted to luma when 1.
Image load_image(const std::filesystem::path& path, int height, int width, int channels = 3);

/// 8-bit PNG, values rounded from [0,1].
void save_png(const Image& image, const std::filesystem::path& path);

/// Largest centered window of `image` with aspect ratio height:width.
Image center_crop(const Image& image, int height, int width);

/// Bilinear resize with half-pixel centers and edge clamping.
Image resize_bilinear(const Image& image, int height, int width);

std::string encode_pfm(const SaliencyMap& map);
SaliencyMap decode_pfm(std::span<const char> bytes);

/// Grayscale little-endian PFM (`Pf`, scale -1.0), rows stored bottom to top.
void save_pfm(const SaliencyMap& map, const std::filesystem::path& path);
SaliencyMap load_pfm(const std::filesystem::path& path);

using Rgb8 = std::array<std::uint8_t, 3>;

/// The fixed 256-entry blue to red lookup table used for overlays.
std::span<const Rgb8, 256> colormap();

/// Colors S / max|S| through the colormap (negative values clip to the blue
/// end) and alpha-blends it over the image. Output is always 3-channel.
Image render_overlay(const Image& image, const SaliencyMap& map, double alpha = 0.5);

}  // namespace saliex
