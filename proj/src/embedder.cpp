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

#include "saliex/embedder.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "saliex/errors.hpp"
#include "saliex/external.hpp"
#include "saliex/kernels.hpp"
#include "saliex/seed.hpp"

namespace saliex {

namespace {

template <typename T>
T parse_number(std::string_view text, const std::string& field) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError(field, "not a number: '" + std::string(text) + "'");
    }
    return value;
}

// "key=value,key=value"
std::map<std::string, std::string, std::less<>> parse_params(std::string_view text) {
    std::map<std::string, std::string, std::less<>> out;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const std::string_view item = text.substr(0, comma);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("model", "expected key=value, got '" + std::string(item) + "'");
        }
        out.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return out;
}

void check_uniform(std::span<const Image> batch) {
    if (batch.empty()) throw DimensionError("embedding batch is empty");
    for (const Image& img : batch) {
        if (!img.same_shape(batch.front())) {
            throw DimensionError("embedding batch mixes image dimensions");
        }
    }
}

}  // namespace

EmbedderSpec EmbedderSpec::block_avg(int grid) {
    EmbedderSpec spec;
    spec.kind = EmbedderKind::block_avg;
    spec.grid = grid;
    return spec;
}

EmbedderSpec EmbedderSpec::rand_proj(int dim, std::uint64_t seed) {
    EmbedderSpec spec;
    spec.kind = EmbedderKind::rand_proj;
    spec.dim = dim;
    spec.weight_seed = seed;
    return spec;
}

EmbedderSpec EmbedderSpec::parse(std::string_view text) {
    EmbedderSpec spec;
    constexpr std::string_view block = "toy:block-avg";
    constexpr std::string_view proj = "toy:rand-proj";
    constexpr std::string_view cmd = "ext:cmd=";
    constexpr std::string_view tcp = "ext:tcp=";

    auto tail_params = [&](std::string_view prefix) {
        std::string_view rest = text.substr(prefix.size());
        if (rest.empty()) return std::map<std::string, std::string, std::less<>>{};
        if (rest.front() != ':') throw ConfigError("model", "malformed model string '" + std::string(text) + "'");
        return parse_params(rest.substr(1));
    };

    if (text.starts_with(block)) {
        spec.kind = EmbedderKind::block_avg;
        for (const auto& [key, value] : tail_params(block)) {
            if (key == "g") spec.grid = parse_number<int>(value, "g");
            else throw ConfigError("model", "unknown block-avg parameter '" + key + "'");
        }
        if (spec.grid < 1) throw ConfigError("g", "must be >= 1");
    } else if (text.starts_with(proj)) {
        spec.kind = EmbedderKind::rand_proj;
        for (const auto& [key, value] : tail_params(proj)) {
            if (key == "d") spec.dim = parse_number<int>(value, "d");
            else if (key == "seed") spec.weight_seed = parse_number<std::uint64_t>(value, "seed");
            else throw ConfigError("model", "unknown rand-proj parameter '" + key + "'");
        }
        if (spec.dim < 2) throw ConfigError("d", "must be >= 2");
    } else if (text.starts_with(cmd)) {
        spec.kind = EmbedderKind::external;
        spec.command = std::string(text.substr(cmd.size()));
        if (spec.command.empty()) throw ConfigError("model", "empty external command");
    } else if (text.starts_with(tcp)) {
        spec.kind = EmbedderKind::external;
        spec.address = std::string(text.substr(tcp.size()));
        if (spec.address.find(':') == std::string::npos) {
            throw ConfigError("model", "tcp address must be host:port");
        }
    } else {
        throw ConfigError("model", "unrecognized model string '" + std::string(text) + "'");
    }
    return spec;
}

std::string EmbedderSpec::to_string() const {
    switch (kind) {
        case EmbedderKind::block_avg: return "toy:block-avg:g=" + std::to_string(grid);
        case EmbedderKind::rand_proj:
            return "toy:rand-proj:d=" + std::to_string(dim) + ",seed=" + std::to_string(weight_seed);
        case EmbedderKind::external:
            return command.empty() ? "ext:tcp=" + address : "ext:cmd=" + command;
    }
    return {};
}

std::optional<Embedding> normalize_features(std::span<const float> raw) {
    double norm2 = 0.0;
    for (float v : raw) norm2 += static_cast<double>(v) * v;
    const double norm = std::sqrt(norm2);
    if (!(norm > 0.0) || !std::isfinite(norm)) return std::nullopt;
    Embedding e;
    e.values.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) e.values[i] = static_cast<float>(raw[i] / norm);
    return e;
}

std::vector<Embedding> embed(const Embedder& embedder, std::span<const Image> batch) {
    auto lenient = embed_lenient(embedder, batch);
    std::vector<Embedding> out;
    out.reserve(lenient.size());
    for (auto& e : lenient) {
        if (!e) throw DegenerateEmbedding();
        out.push_back(std::move(*e));
    }
    return out;
}

std::vector<std::optional<Embedding>> embed_lenient(const Embedder& embedder,
                                                    std::span<const Image> batch) {
    check_uniform(batch);
    const auto raw = embedder.features(batch);
    if (raw.size() != batch.size()) {
        throw TransportError("embedder returned " + std::to_string(raw.size()) + " vectors for " +
                             std::to_string(batch.size()) + " images");
    }
    std::vector<std::optional<Embedding>> out;
    out.reserve(raw.size());
    for (const auto& v : raw) out.push_back(normalize_features(v));
    return out;
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
    if (a.dim() != b.dim()) {
        throw DimensionError("embedding dimensions differ: " + std::to_string(a.dim()) + " vs " +
                             std::to_string(b.dim()));
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) dot += static_cast<double>(a.values[i]) * b.values[i];
    return std::clamp(dot, -1.0, 1.0);
}

BlockAverageEmbedder::BlockAverageEmbedder(int grid) : grid_(grid) {
    if (grid < 1) throw ConfigError("g", "must be >= 1");
}

std::vector<std::vector<float>> BlockAverageEmbedder::features(std::span<const Image> batch) const {
    check_uniform(batch);
    if (grid_ > std::min(batch.front().height(), batch.front().width())) {
        throw ConfigError("g", "grid " + std::to_string(grid_) + " exceeds image size");
    }
    std::vector<std::vector<float>> out;
    kernels::omp::block_average_batch(batch, grid_, out);
    return out;
}

std::string BlockAverageEmbedder::describe() const {
    return EmbedderSpec::block_avg(grid_).to_string();
}

RandomProjectionEmbedder::RandomProjectionEmbedder(int dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
    if (dim < 2) throw ConfigError("d", "must be >= 2");
}

std::shared_ptr<const std::vector<float>> RandomProjectionEmbedder::weights(std::size_t input_len) const {
    std::lock_guard lock(mutex_);
    auto& slot = cache_[input_len];
    if (!slot) {
        slot = std::make_shared<const std::vector<float>>(projection_weights(dim_, seed_, input_len));
    }
    return slot;
}

std::vector<std::vector<float>> RandomProjectionEmbedder::features(std::span<const Image> batch) const {
    check_uniform(batch);
    const auto w = weights(batch.front().size());
    std::vector<std::vector<float>> out;
    kernels::omp::project_batch(batch, *w, dim_, out);
    return out;
}

std::string RandomProjectionEmbedder::describe() const {
    return EmbedderSpec::rand_proj(dim_, seed_).to_string();
}

std::vector<float> projection_weights(int dim, std::uint64_t seed, std::size_t input_len) {
    const std::uint64_t key = derive_seed(seed, "rand_proj");
    const std::size_t total = static_cast<std::size_t>(dim) * input_len;
    std::vector<float> w(total);
    const auto n = static_cast<std::int64_t>(total);
#pragma omp parallel for schedule(static)
    for (std::int64_t e = 0; e < n; ++e) {
        const std::uint64_t base = key + 2 * static_cast<std::uint64_t>(e);
        const double u1 = static_cast<double>((splitmix64(base) >> 11) + 1) * 0x1.0p-53;
        const double u2 = unit_interval(splitmix64(base + 1));
        w[e] = static_cast<float>(std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2));
    }
    return w;
}

std::unique_ptr<Embedder> make_embedder(const EmbedderSpec& spec) {
    switch (spec.kind) {
        case EmbedderKind::block_avg: return std::make_unique<BlockAverageEmbedder>(spec.grid);
        case EmbedderKind::rand_proj:
            return std::make_unique<RandomProjectionEmbedder>(spec.dim, spec.weight_seed);
        case EmbedderKind::external: return std::make_unique<ExternalEmbedder>(spec);
    }
    throw ConfigError("model", "unknown embedder kind");
}

}  // namespace saliex
