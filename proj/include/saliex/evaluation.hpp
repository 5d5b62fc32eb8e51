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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "saliex/embedder.hpp"
#include "saliex/types.hpp"

namespace saliex {

enum class EvalMode { deletion, insertion };
enum class MapKind { similarity, dissimilarity };

std::string_view to_string(EvalMode mode);
std::string_view to_string(MapKind kind);
EvalMode parse_eval_mode(std::string_view text);
MapKind parse_map_kind(std::string_view text);

struct PairEntry {
    std::filesystem::path a;
    std::filesystem::path b;
    bool matching = false;
};
using PairList = std::vector<PairEntry>;

struct GalleryEntry {
    std::filesystem::path path;
    std::string identity;
};

/// `path_a<TAB>path_b<TAB>{1|0}` per line. Relative paths resolve against the
/// list's directory. Blank lines and lines starting with '#' are skipped.
PairList read_pair_list(const std::filesystem::path& file);
void write_pair_list(const PairList& pairs, const std::filesystem::path& file);

/// `path<TAB>identity` per line.
std::vector<GalleryEntry> read_gallery_manifest(const std::filesystem::path& file);
void write_gallery_manifest(const std::vector<GalleryEntry>& entries, const std::filesystem::path& file);

struct EvalCurve {
    std::vector<double> fractions;
    std::vector<double> values;
    double auc = 0.0;
};

/// Gaussian smoothing before ranking; sigma 0 is the identity.
SaliencyMap blur_saliency(const SaliencyMap& map, double sigma);

/// Pixel indices (row-major) by value descending, ties in row-major order.
std::vector<std::uint32_t> rank_pixels(const SaliencyMap& map);

/// round(fraction * pixels), clamped to [0, pixels].
std::size_t modified_count(std::size_t pixels, double fraction);

/// Zeros the first round(fraction * H * W) pixels of `order` in every channel.
Image delete_pixels(const Image& image, std::span<const std::uint32_t> order, double fraction);

/// Copies the first round(fraction * H * W) pixels of `order` from source into base.
Image insert_pixels(const Image& base, const Image& source, std::span<const std::uint32_t> order,
                    double fraction);

/// Mean of the curve values.
double auc(std::span<const double> values);

struct Threshold {
    double value = 0.0;
    double accuracy = 0.0;
};

/// Accuracy-maximizing threshold (predict matching iff score >= threshold).
/// Candidates are the minimum score, midpoints between consecutive distinct
/// scores and just above the maximum; the smallest optimal candidate wins.
Threshold calibrate_threshold(std::span<const double> scores, std::span<const bool> matching);

struct VerificationSample {
    Image a;
    Image b;
    bool matching = false;
    std::string name;  ///< used in error messages
};

Threshold calibrate_threshold(std::span<const VerificationSample> pairs, const Embedder& embedder,
                              int batch_size = 64);

/// Saliency maps for both images of one pair. Empty maps mean "missing".
struct PairMaps {
    SaliencyMap a;
    SaliencyMap b;
};

struct EvalOptions {
    int steps = 20;
    double sigma = 4.0;
    EvalMode mode = EvalMode::deletion;
    int batch_size = 64;
    void validate() const;
};

/// Verification curve. Only pairs whose label fits `which` are used (matching
/// pairs for similarity maps, non-matching for dissimilarity). Both images of
/// each pair are modified by their own map; value_k is the accuracy at the
/// fixed threshold after modifying fraction k / steps. Degenerate embeddings
/// score 0. `maps` is indexed like `pairs`.
EvalCurve verification_metric(std::span<const VerificationSample> pairs, std::span<const PairMaps> maps,
                              MapKind which, double threshold, const Embedder& embedder,
                              const EvalOptions& options);

struct IdentificationProbe {
    Image image;
    std::string identity;
    SaliencyMap map;  ///< typically the mean of the top-K probe-side signed maps
    std::string name;
};

struct GalleryImage {
    Image image;
    std::string identity;
};

struct IdentificationCurve {
    EvalCurve curve;
    std::vector<std::size_t> excluded;  ///< probes whose identity is not in the gallery
};

/// Rank-N identification rate as the probe images are modified (gallery
/// untouched). Gallery ties rank by lower index.
IdentificationCurve identification_metric(std::span<const IdentificationProbe> probes,
                                          std::span<const GalleryImage> gallery, int rank_n,
                                          const Embedder& embedder, const EvalOptions& options);

/// Pixel-wise mean; all maps must share dimensions.
SaliencyMap average_maps(std::span<const SaliencyMap> maps);

/// Baseline map of i.i.d. U[0,1] values from stream derive_seed(seed, "random_map", index).
SaliencyMap random_saliency(int height, int width, std::uint64_t seed, std::uint64_t index);

}  // namespace saliex
