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

#include "saliex/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "saliex/corrrise.hpp"
#include "saliex/errors.hpp"
#include "saliex/kernels.hpp"
#include "saliex/seed.hpp"

namespace saliex {

namespace {

std::vector<std::vector<std::string>> read_tsv(const std::filesystem::path& file, std::size_t fields) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string> row;
        std::size_t start = 0;
        while (true) {
            const auto tab = line.find('\t', start);
            row.push_back(line.substr(start, tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (row.size() != fields) {
            throw FormatError(file.string() + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(fields) + " tab-separated fields");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

// Embeds images in chunks and scores consecutive (2i, 2i+1) entries.
std::vector<std::optional<Embedding>> embed_chunked(const Embedder& embedder, std::span<const Image> images,
                                                    int batch_size) {
    std::vector<std::optional<Embedding>> out;
    out.reserve(images.size());
    for (std::size_t first = 0; first < images.size(); first += static_cast<std::size_t>(batch_size)) {
        const auto sub = images.subspan(first, std::min<std::size_t>(batch_size, images.size() - first));
        for (auto& e : embed_lenient(embedder, sub)) out.push_back(std::move(e));
    }
    return out;
}

double score_or_zero(const std::optional<Embedding>& a, const std::optional<Embedding>& b) {
    return a && b ? cosine_similarity(*a, *b) : 0.0;
}

}  // namespace

std::string_view to_string(EvalMode mode) { return mode == EvalMode::deletion ? "deletion" : "insertion"; }

std::string_view to_string(MapKind kind) {
    return kind == MapKind::similarity ? "similarity" : "dissimilarity";
}

EvalMode parse_eval_mode(std::string_view text) {
    if (text == "deletion") return EvalMode::deletion;
    if (text == "insertion") return EvalMode::insertion;
    throw ConfigError("mode", "expected deletion or insertion, got '" + std::string(text) + "'");
}

MapKind parse_map_kind(std::string_view text) {
    if (text == "similarity") return MapKind::similarity;
    if (text == "dissimilarity") return MapKind::dissimilarity;
    throw ConfigError("which", "expected similarity or dissimilarity, got '" + std::string(text) + "'");
}

PairList read_pair_list(const std::filesystem::path& file) {
    const auto base = file.parent_path();
    PairList pairs;
    for (const auto& row : read_tsv(file, 3)) {
        if (row[2] != "0" && row[2] != "1") throw FormatError(file.string() + ": label must be 0 or 1");
        pairs.push_back({resolve(base, row[0]), resolve(base, row[1]), row[2] == "1"});
    }
    if (pairs.empty()) throw FormatError(file.string() + ": pair list is empty");
    return pairs;
}

void write_pair_list(const PairList& pairs, const std::filesystem::path& file) {
    std::ofstream out(file);
    for (const auto& p : pairs) {
        out << p.a.generic_string() << '\t' << p.b.generic_string() << '\t' << (p.matching ? 1 : 0) << '\n';
    }
    if (!out) throw IoError("cannot write " + file.string());
}

std::vector<GalleryEntry> read_gallery_manifest(const std::filesystem::path& file) {
    const auto base = file.parent_path();
    std::vector<GalleryEntry> entries;
    for (const auto& row : read_tsv(file, 2)) entries.push_back({resolve(base, row[0]), row[1]});
    return entries;
}

void write_gallery_manifest(const std::vector<GalleryEntry>& entries, const std::filesystem::path& file) {
    std::ofstream out(file);
    for (const auto& e : entries) out << e.path.generic_string() << '\t' << e.identity << '\n';
    if (!out) throw IoError("cannot write " + file.string());
}

SaliencyMap blur_saliency(const SaliencyMap& map, double sigma) {
    return kernels::omp::gaussian_blur(map, sigma);
}

std::vector<std::uint32_t> rank_pixels(const SaliencyMap& map) {
    std::vector<std::uint32_t> order(map.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t i, std::uint32_t j) { return map[i] > map[j]; });
    return order;
}

std::size_t modified_count(std::size_t pixels, double fraction) {
    const double n = std::round(std::clamp(fraction, 0.0, 1.0) * static_cast<double>(pixels));
    return std::min(pixels, static_cast<std::size_t>(n));
}

Image delete_pixels(const Image& image, std::span<const std::uint32_t> order, double fraction) {
    if (order.size() != image.pixel_count()) throw DimensionError("pixel order does not cover the image");
    Image out = image;
    const int c = image.channels();
    const std::size_t count = modified_count(order.size(), fraction);
    for (std::size_t i = 0; i < count; ++i) {
        float* px = out.data() + static_cast<std::size_t>(order[i]) * c;
        std::fill(px, px + c, 0.0f);
    }
    return out;
}

Image insert_pixels(const Image& base, const Image& source, std::span<const std::uint32_t> order,
                    double fraction) {
    if (!base.same_shape(source)) throw DimensionError("insertion base and source differ in shape");
    if (order.size() != source.pixel_count()) throw DimensionError("pixel order does not cover the image");
    Image out = base;
    const int c = source.channels();
    const std::size_t count = modified_count(order.size(), fraction);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t off = static_cast<std::size_t>(order[i]) * c;
        std::copy(source.data() + off, source.data() + off + c, out.data() + off);
    }
    return out;
}

double auc(std::span<const double> values) {
    if (values.empty()) throw DimensionError("auc of an empty curve");
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

Threshold calibrate_threshold(std::span<const double> scores, std::span<const bool> matching) {
    if (scores.size() != matching.size()) throw DimensionError("scores and labels differ in length");
    const auto positives = static_cast<std::size_t>(std::count(matching.begin(), matching.end(), true));
    if (positives == 0 || positives == scores.size()) {
        throw ConfigError("pairs", "threshold calibration needs both matching and non-matching pairs");
    }
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return scores[i] < scores[j]; });

    // Sweep candidate cut positions: entries at sorted index >= cut are predicted matching.
    const double n = static_cast<double>(scores.size());
    std::size_t neg_below = 0;
    std::size_t pos_below = 0;
    Threshold best{scores[idx.front()], static_cast<double>(positives) / n};
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
            (matching[idx[j]] ? pos_below : neg_below) += 1;
            ++j;
        }
        const double acc = static_cast<double>(neg_below + (positives - pos_below)) / n;
        const double cut = j < idx.size() ? 0.5 * (scores[idx[i]] + scores[idx[j]])
                                          : std::nextafter(scores[idx[i]], INFINITY);
        if (acc > best.accuracy) best = {cut, acc};
        i = j;
    }
    return best;
}

Threshold calibrate_threshold(std::span<const VerificationSample> pairs, const Embedder& embedder,
                              int batch_size) {
    std::vector<Image> images;
    images.reserve(pairs.size() * 2);
    for (const auto& p : pairs) {
        images.push_back(p.a);
        images.push_back(p.b);
    }
    const auto emb = embed_chunked(embedder, images, batch_size);
    std::vector<double> scores(pairs.size());
    std::unique_ptr<bool[]> labels(new bool[pairs.size()]);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        scores[i] = score_or_zero(emb[2 * i], emb[2 * i + 1]);
        labels[i] = pairs[i].matching;
    }
    return calibrate_threshold(scores, std::span<const bool>(labels.get(), pairs.size()));
}

void EvalOptions::validate() const {
    if (steps < 1) throw ConfigError("steps", "must be >= 1");
    if (!(sigma >= 0.0)) throw ConfigError("sigma", "must be >= 0");
    if (batch_size < 1) throw ConfigError("batch_size", "must be >= 1");
}

namespace {

Image modify(const Image& image, std::span<const std::uint32_t> order, double fraction, EvalMode mode) {
    if (mode == EvalMode::deletion) return delete_pixels(image, order, fraction);
    return insert_pixels(Image(image.height(), image.width(), image.channels()), image, order, fraction);
}

std::vector<std::uint32_t> order_for(const SaliencyMap& map, const Image& image, double sigma,
                                     const std::string& what) {
    if (map.empty()) throw IoError("missing saliency map for " + what);
    if (map.height() != image.height() || map.width() != image.width()) {
        throw DimensionError("saliency map for " + what + " does not match the image size");
    }
    return rank_pixels(blur_saliency(map, sigma));
}

}  // namespace

EvalCurve verification_metric(std::span<const VerificationSample> pairs, std::span<const PairMaps> maps,
                              MapKind which, double threshold, const Embedder& embedder,
                              const EvalOptions& options) {
    options.validate();
    if (maps.size() != pairs.size()) throw DimensionError("one map pair is needed per image pair");
    const bool want_matching = which == MapKind::similarity;

    std::vector<std::size_t> selected;
    std::vector<std::string> missing;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (pairs[i].matching != want_matching) continue;
        selected.push_back(i);
        const std::string name = pairs[i].name.empty() ? "pair " + std::to_string(i) : pairs[i].name;
        if (maps[i].a.empty()) missing.push_back(name + " (image a)");
        if (maps[i].b.empty()) missing.push_back(name + " (image b)");
    }
    if (!missing.empty()) {
        std::string msg = "missing saliency maps:";
        for (const auto& m : missing) msg += " " + m + ";";
        throw IoError(msg);
    }
    if (selected.empty()) {
        throw ConfigError("pairs", std::string("no ") + (want_matching ? "matching" : "non-matching") +
                                       " pairs to evaluate");
    }

    std::vector<std::vector<std::uint32_t>> orders(selected.size() * 2);
    const auto count = static_cast<std::int64_t>(selected.size());
    std::vector<std::exception_ptr> errors(selected.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t s = 0; s < count; ++s) {
        const std::size_t i = selected[s];
        const std::string name = pairs[i].name.empty() ? "pair " + std::to_string(i) : pairs[i].name;
        try {
            orders[2 * s] = order_for(maps[i].a, pairs[i].a, options.sigma, name + " (image a)");
            orders[2 * s + 1] = order_for(maps[i].b, pairs[i].b, options.sigma, name + " (image b)");
        } catch (...) {
            errors[s] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    EvalCurve curve;
    std::vector<Image> images(selected.size() * 2);
    for (int k = 1; k <= options.steps; ++k) {
        const double fraction = static_cast<double>(k) / options.steps;
#pragma omp parallel for schedule(static)
        for (std::int64_t s = 0; s < count; ++s) {
            const auto& p = pairs[selected[s]];
            images[2 * s] = modify(p.a, orders[2 * s], fraction, options.mode);
            images[2 * s + 1] = modify(p.b, orders[2 * s + 1], fraction, options.mode);
        }
        const auto emb = embed_chunked(embedder, images, options.batch_size);
        std::size_t correct = 0;
        for (std::size_t s = 0; s < selected.size(); ++s) {
            const bool predicted = score_or_zero(emb[2 * s], emb[2 * s + 1]) >= threshold;
            if (predicted == want_matching) ++correct;
        }
        curve.fractions.push_back(fraction);
        curve.values.push_back(static_cast<double>(correct) / static_cast<double>(selected.size()));
    }
    curve.auc = auc(curve.values);
    return curve;
}

IdentificationCurve identification_metric(std::span<const IdentificationProbe> probes,
                                          std::span<const GalleryImage> gallery, int rank_n,
                                          const Embedder& embedder, const EvalOptions& options) {
    options.validate();
    if (gallery.empty()) throw ConfigError("gallery", "gallery is empty");
    if (rank_n < 1) throw ConfigError("rank_n", "must be >= 1");

    std::vector<Image> gallery_images;
    std::set<std::string> identities;
    for (const auto& g : gallery) {
        gallery_images.push_back(g.image);
        identities.insert(g.identity);
    }
    const auto gallery_emb = embed(embedder, std::span<const Image>(gallery_images));

    IdentificationCurve result;
    std::vector<std::size_t> used;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        if (identities.count(probes[i].identity) == 0) result.excluded.push_back(i);
        else used.push_back(i);
    }
    if (used.empty()) throw ConfigError("probes", "no probe identity occurs in the gallery");

    std::vector<std::vector<std::uint32_t>> orders(used.size());
    for (std::size_t u = 0; u < used.size(); ++u) {
        const auto& p = probes[used[u]];
        orders[u] = order_for(p.map, p.image, options.sigma,
                              p.name.empty() ? "probe " + std::to_string(used[u]) : p.name);
    }

    std::vector<Image> images(used.size());
    std::vector<double> scores(gallery.size());
    const auto count = static_cast<std::int64_t>(used.size());
    for (int k = 1; k <= options.steps; ++k) {
        const double fraction = static_cast<double>(k) / options.steps;
#pragma omp parallel for schedule(static)
        for (std::int64_t u = 0; u < count; ++u) {
            images[u] = modify(probes[used[u]].image, orders[u], fraction, options.mode);
        }
        const auto emb = embed_chunked(embedder, images, options.batch_size);
        std::size_t hits = 0;
        for (std::size_t u = 0; u < used.size(); ++u) {
            for (std::size_t g = 0; g < gallery.size(); ++g) {
                scores[g] = emb[u] ? cosine_similarity(*emb[u], gallery_emb[g]) : 0.0;
            }
            const auto order = rank_gallery(scores);
            const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(rank_n), order.size());
            for (std::size_t r = 0; r < top; ++r) {
                if (gallery[order[r]].identity == probes[used[u]].identity) {
                    ++hits;
                    break;
                }
            }
        }
        result.curve.fractions.push_back(fraction);
        result.curve.values.push_back(static_cast<double>(hits) / static_cast<double>(used.size()));
    }
    result.curve.auc = auc(result.curve.values);
    return result;
}

SaliencyMap average_maps(std::span<const SaliencyMap> maps) {
    if (maps.empty()) throw DimensionError("no maps to average");
    const int h = maps.front().height();
    const int w = maps.front().width();
    std::vector<double> acc(maps.front().size(), 0.0);
    for (const auto& m : maps) {
        if (m.height() != h || m.width() != w) throw DimensionError("averaged maps differ in size");
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += m[i];
    }
    SaliencyMap out(h, w);
    for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<float>(acc[i] / maps.size());
    return out;
}

SaliencyMap random_saliency(int height, int width, std::uint64_t seed, std::uint64_t index) {
    std::mt19937_64 rng(derive_seed(seed, "random_map", index));
    std::uniform_real_distribution<float> uniform(0.0f, 1.0f);
    SaliencyMap map(height, width);
    for (float& v : map.values()) v = uniform(rng);
    return map;
}

}  // namespace saliex
