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
#include <optional>
#include <string>
#include <vector>

#include "saliex/evaluation.hpp"
#include "saliex/types.hpp"

namespace saliex {

/// Synthetic identities for tests and demos. Each subject is a fixed set of
/// colored Gaussian blobs on a dark background; its images re-render those
/// blobs with small position and amplitude jitter, add one or two unrelated
/// blobs and pixel noise. Values are quantized to 8 bits so the in-memory set
/// equals what the PNG files decode to.
///
/// Every image also gets a planted counterpart: a copy whose `patch` x `patch`
/// square (placed over dark background where possible) is overwritten with
/// bright noise. (planted, original) forms a non-matching pair with a known
/// region of difference.
struct ToysetConfig {
    int subjects = 10;
    int images_per_subject = 4;
    int size = 112;
    int patch = 24;
    std::uint64_t seed = 0;

    void validate() const;
};

struct PlantedBox {
    int top = 0;
    int left = 0;
    int size = 0;

    bool contains(int row, int col) const {
        return row >= top && row < top + size && col >= left && col < left + size;
    }
};

struct ToyPair {
    std::size_t a = 0;  ///< index into Toyset::images
    std::size_t b = 0;
    bool matching = false;
    std::optional<PlantedBox> planted;  ///< region of image a that differs from b
};

struct Toyset {
    ToysetConfig config;
    std::vector<Image> images;
    std::vector<std::string> names;       ///< relative file paths
    std::vector<std::string> identities;  ///< planted images carry their source identity
    std::vector<ToyPair> pairs;           ///< all matching pairs, then one planted pair per image
    std::vector<std::size_t> gallery;     ///< first image of each subject
    std::vector<std::size_t> probes;      ///< remaining unplanted images
};

Toyset make_toyset(const ToysetConfig& config);

/// Writes images/, planted/, pairs.txt, gallery.txt, probes.txt and toyset.json.
void write_toyset(const Toyset& set, const std::filesystem::path& dir);

std::vector<VerificationSample> verification_samples(const Toyset& set);

}  // namespace saliex
