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

#include "saliex/toyset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include <json.hpp>

#include "saliex/errors.hpp"
#include "saliex/image_io.hpp"
#include "saliex/seed.hpp"

namespace saliex {

namespace {

struct Blob {
    double row;
    double col;
    double sigma;
    double color[3];
};

constexpr double kBackground = 0.03;
constexpr double kNoise = 0.03;

std::vector<Blob> make_subject(std::mt19937_64& rng, int size) {
    const double lo = size * 15.0 / 112.0;
    const double hi = size * 97.0 / 112.0;
    std::uniform_int_distribution<int> count(4, 6);
    std::uniform_real_distribution<double> pos(lo, hi);
    std::uniform_real_distribution<double> sigma(6.0, 11.0);
    std::uniform_real_distribution<double> color(0.3, 0.6);
    std::vector<Blob> blobs(static_cast<std::size_t>(count(rng)));
    for (auto& b : blobs) {
        b.row = pos(rng);
        b.col = pos(rng);
        b.sigma = sigma(rng);
        for (double& c : b.color) c = color(rng);
    }
    return blobs;
}

void stamp(std::vector<double>& img, int size, const Blob& b, double gain) {
    const int radius = static_cast<int>(std::ceil(4.0 * b.sigma));
    const int r0 = std::max(0, static_cast<int>(b.row) - radius);
    const int r1 = std::min(size - 1, static_cast<int>(b.row) + radius);
    const int c0 = std::max(0, static_cast<int>(b.col) - radius);
    const int c1 = std::min(size - 1, static_cast<int>(b.col) + radius);
    for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
            const double d2 = (r - b.row) * (r - b.row) + (c - b.col) * (c - b.col);
            const double g = gain * std::exp(-d2 / (2.0 * b.sigma * b.sigma));
            for (int k = 0; k < 3; ++k) img[(static_cast<std::size_t>(r) * size + c) * 3 + k] += g * b.color[k];
        }
    }
}

float quantize(double v) {
    return static_cast<float>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0);
}

Image render(const std::vector<Blob>& subject, int size, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> jitter(0.0, 1.0);
    std::uniform_real_distribution<double> gain(0.9, 1.1);
    std::uniform_int_distribution<int> extra(1, 2);
    std::uniform_real_distribution<double> extra_pos(size * 10.0 / 112.0, size * 102.0 / 112.0);
    std::uniform_real_distribution<double> sigma(6.0, 11.0);
    std::uniform_real_distribution<double> extra_amp(0.2, 0.5);
    std::normal_distribution<double> noise(0.0, kNoise);

    std::vector<double> img(static_cast<std::size_t>(size) * size * 3);
    for (double& v : img) v = kBackground * unit(rng);
    for (const Blob& b : subject) {
        Blob moved = b;
        moved.row += jitter(rng);
        moved.col += jitter(rng);
        stamp(img, size, moved, gain(rng));
    }
    const int n_extra = extra(rng);
    for (int i = 0; i < n_extra; ++i) {
        Blob b{};
        b.row = extra_pos(rng);
        b.col = extra_pos(rng);
        b.sigma = sigma(rng);
        for (double& c : b.color) c = extra_amp(rng);
        stamp(img, size, b, 1.0);
    }
    Image out(size, size, 3);
    for (std::size_t i = 0; i < img.size(); ++i) out.data()[i] = quantize(img[i] + noise(rng));
    return out;
}

std::pair<Image, PlantedBox> plant(const Image& source, int patch, std::mt19937_64& rng) {
    const int size = source.height();
    std::uniform_int_distribution<int> pos(0, size - patch);
    std::uniform_real_distribution<double> bright(0.8, 1.0);
    PlantedBox box{0, 0, patch};
    for (int attempt = 0; attempt < 1000; ++attempt) {
        box.top = pos(rng);
        box.left = pos(rng);
        double sum = 0.0;
        for (int r = box.top; r < box.top + patch; ++r) {
            for (int c = box.left; c < box.left + patch; ++c) {
                for (int k = 0; k < 3; ++k) sum += source.at(r, c, k);
            }
        }
        if (sum / (patch * patch * 3.0) <= 0.2) break;
    }
    Image out = source;
    for (int r = box.top; r < box.top + patch; ++r) {
        for (int c = box.left; c < box.left + patch; ++c) {
            for (int k = 0; k < 3; ++k) out.at(r, c, k) = quantize(bright(rng));
        }
    }
    return {std::move(out), box};
}

std::string image_name(const char* dir, int subject, int index, const char* suffix) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s/s%03d_i%02d%s.png", dir, subject, index, suffix);
    return buf;
}

std::string subject_name(int subject) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "s%03d", subject);
    return buf;
}

}  // namespace

void ToysetConfig::validate() const {
    if (subjects < 1) throw ConfigError("subjects", "must be >= 1");
    if (images_per_subject < 2) throw ConfigError("images_per_subject", "must be >= 2");
    if (size < 32) throw ConfigError("size", "must be >= 32");
    if (patch < 1 || patch > size) throw ConfigError("patch", "must lie in [1, size]");
}

Toyset make_toyset(const ToysetConfig& config) {
    config.validate();
    Toyset set;
    set.config = config;
    const int m = config.images_per_subject;
    std::vector<std::size_t> originals;
    for (int s = 0; s < config.subjects; ++s) {
        std::mt19937_64 subject_rng(derive_seed(config.seed, "toyset.subject", static_cast<std::uint64_t>(s)));
        const auto blobs = make_subject(subject_rng, config.size);
        for (int i = 0; i < m; ++i) {
            std::mt19937_64 rng(derive_seed(config.seed, "toyset.image", static_cast<std::uint64_t>(s * m + i)));
            set.images.push_back(render(blobs, config.size, rng));
            set.names.push_back(image_name("images", s, i, ""));
            set.identities.push_back(subject_name(s));
            originals.push_back(set.images.size() - 1);
            (i == 0 ? set.gallery : set.probes).push_back(set.images.size() - 1);
        }
    }
    for (int s = 0; s < config.subjects; ++s) {
        for (int i = 0; i < m; ++i) {
            for (int j = i + 1; j < m; ++j) {
                set.pairs.push_back({static_cast<std::size_t>(s * m + i), static_cast<std::size_t>(s * m + j), true, {}});
            }
        }
    }
    for (std::size_t o : originals) {
        std::mt19937_64 rng(derive_seed(config.seed, "toyset.planted", o));
        auto [img, box] = plant(set.images[o], config.patch, rng);
        const int s = static_cast<int>(o) / m;
        const int i = static_cast<int>(o) % m;
        set.images.push_back(std::move(img));
        set.names.push_back(image_name("planted", s, i, "_planted"));
        set.identities.push_back(set.identities[o]);
        set.pairs.push_back({set.images.size() - 1, o, false, box});
    }
    return set;
}

void write_toyset(const Toyset& set, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "images");
    std::filesystem::create_directories(dir / "planted");
    for (std::size_t i = 0; i < set.images.size(); ++i) save_png(set.images[i], dir / set.names[i]);

    PairList pairs;
    nlohmann::json jpairs = nlohmann::json::array();
    for (const auto& p : set.pairs) {
        pairs.push_back({set.names[p.a], set.names[p.b], p.matching});
        nlohmann::json jp = {{"a", set.names[p.a]}, {"b", set.names[p.b]}, {"matching", p.matching}};
        if (p.planted) {
            jp["planted"] = {{"top", p.planted->top}, {"left", p.planted->left}, {"size", p.planted->size}};
        }
        jpairs.push_back(std::move(jp));
    }
    write_pair_list(pairs, dir / "pairs.txt");

    std::vector<GalleryEntry> gallery;
    for (std::size_t g : set.gallery) gallery.push_back({set.names[g], set.identities[g]});
    write_gallery_manifest(gallery, dir / "gallery.txt");
    std::vector<GalleryEntry> probes;
    for (std::size_t p : set.probes) probes.push_back({set.names[p], set.identities[p]});
    write_gallery_manifest(probes, dir / "probes.txt");

    const nlohmann::json doc = {
        {"seed", set.config.seed},
        {"subjects", set.config.subjects},
        {"images_per_subject", set.config.images_per_subject},
        {"size", set.config.size},
        {"patch", set.config.patch},
        {"pairs", jpairs},
    };
    std::ofstream out(dir / "toyset.json");
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("cannot write " + (dir / "toyset.json").string());
}

std::vector<VerificationSample> verification_samples(const Toyset& set) {
    std::vector<VerificationSample> out;
    out.reserve(set.pairs.size());
    for (const auto& p : set.pairs) {
        out.push_back({set.images[p.a], set.images[p.b], p.matching, set.names[p.a] + " | " + set.names[p.b]});
    }
    return out;
}

}  // namespace saliex
