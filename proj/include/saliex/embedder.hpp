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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "saliex/types.hpp"

namespace saliex {

enum class EmbedderKind { block_avg, rand_proj, external };

/// Selects the black-box recognizer. String grammar:
///   toy:block-avg:g=8
///   toy:rand-proj:d=128,seed=7
///   ext:cmd=<shell command>
///   ext:tcp=<host:port>
struct EmbedderSpec {
    EmbedderKind kind = EmbedderKind::block_avg;
    int grid = 8;
    int dim = 128;
    std::uint64_t weight_seed = 7;
    std::string command;
    std::string address;
    int max_batch = 64;

    static EmbedderSpec parse(std::string_view text);
    static EmbedderSpec block_avg(int grid);
    static EmbedderSpec rand_proj(int dim, std::uint64_t seed);

    std::string to_string() const;
};

/// Batch of images -> raw feature vectors. Implementations must be pure
/// functions of their input and safe to call concurrently.
class Embedder {
public:
    virtual ~Embedder() = default;

    /// One unnormalized feature vector per image, order preserving.
    virtual std::vector<std::vector<float>> features(std::span<const Image> batch) const = 0;

    virtual std::string describe() const = 0;
};

/// L2-normalized embeddings. Throws DegenerateEmbedding on a zero vector.
std::vector<Embedding> embed(const Embedder& embedder, std::span<const Image> batch);

/// Like embed(), but degenerate vectors come back as nullopt.
std::vector<std::optional<Embedding>> embed_lenient(const Embedder& embedder,
                                                    std::span<const Image> batch);

std::optional<Embedding> normalize_features(std::span<const float> raw);

/// Dot product of unit vectors, clamped to [-1, 1].
double cosine_similarity(const Embedding& a, const Embedding& b);

class BlockAverageEmbedder final : public Embedder {
public:
    explicit BlockAverageEmbedder(int grid);

    std::vector<std::vector<float>> features(std::span<const Image> batch) const override;
    std::string describe() const override;

    int grid() const noexcept { return grid_; }

private:
    int grid_;
};

/// Fixed Gaussian random projection of the flattened pixels.
class RandomProjectionEmbedder final : public Embedder {
public:
    RandomProjectionEmbedder(int dim, std::uint64_t seed);

    std::vector<std::vector<float>> features(std::span<const Image> batch) const override;
    std::string describe() const override;

    /// Weights for inputs of `input_len` floats; generated once and cached.
    std::shared_ptr<const std::vector<float>> weights(std::size_t input_len) const;

private:
    int dim_;
    std::uint64_t seed_;
    mutable std::mutex mutex_;
    mutable std::map<std::size_t, std::shared_ptr<const std::vector<float>>> cache_;
};

/// Row-major dim x input_len matrix of N(0,1) draws. Entry e = r * input_len + c
/// uses Box-Muller on splitmix64(key + 2e) and splitmix64(key + 2e + 1) with
/// key = derive_seed(seed, "rand_proj"), so it is reproducible in any language.
std::vector<float> projection_weights(int dim, std::uint64_t seed, std::size_t input_len);

std::unique_ptr<Embedder> make_embedder(const EmbedderSpec& spec);

}  // namespace saliex
