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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Pass criterion numbers as arguments to run a subset.

#include <sys/resource.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "saliex/corrrise.hpp"
#include "saliex/embedder.hpp"
#include "saliex/evaluation.hpp"
#include "saliex/maskgen.hpp"
#include "saliex/parallel.hpp"
#include "saliex/pearson.hpp"
#include "saliex/sanity.hpp"
#include "saliex/seed.hpp"
#include "saliex/toyset.hpp"

using namespace saliex;

namespace {

constexpr int kSeeds = 10;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fixed(double v, int digits = 4) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(digits);
    out << v;
    return out.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Toy sets and their default-configuration similarity maps are shared by
// several criteria, so they are built once per seed.
struct SeedData {
    Toyset set;
    std::vector<VerificationSample> suite;
    double threshold = 0.0;
    std::vector<PairMaps> similarity;  // N = 1000, matching pairs only
};

const BlockAverageEmbedder& structured() {
    static const BlockAverageEmbedder e(8);
    return e;
}

Toyset toyset(int seed) {
    ToysetConfig c;
    c.seed = static_cast<std::uint64_t>(seed);
    return make_toyset(c);
}

std::vector<PairMaps> similarity_maps(const std::vector<VerificationSample>& suite, const ExplainConfig& cfg) {
    std::vector<PairMaps> maps(suite.size());
    for (std::size_t i = 0; i < suite.size(); ++i) {
        if (!suite[i].matching) continue;
        const auto ex = explain_pair(suite[i].a, suite[i].b, structured(), cfg);
        maps[i] = {ex.a.positive, ex.b.positive};
    }
    return maps;
}

std::vector<PairMaps> random_maps(const std::vector<VerificationSample>& suite, int seed) {
    std::vector<PairMaps> maps(suite.size());
    const int h = suite.front().a.height();
    const int w = suite.front().a.width();
    for (std::size_t i = 0; i < suite.size(); ++i) {
        maps[i] = {random_saliency(h, w, static_cast<std::uint64_t>(seed), 2 * i),
                   random_saliency(h, w, static_cast<std::uint64_t>(seed), 2 * i + 1)};
    }
    return maps;
}

const SeedData& seed_data(int seed) {
    static std::map<int, SeedData> cache;
    auto it = cache.find(seed);
    if (it != cache.end()) return it->second;
    SeedData d;
    d.set = toyset(seed);
    d.suite = verification_samples(d.set);
    d.threshold = calibrate_threshold(d.suite, structured()).value;
    ExplainConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(seed);
    d.similarity = similarity_maps(d.suite, cfg);
    return cache.emplace(seed, std::move(d)).first->second;
}

double verification_auc(const SeedData& d, const std::vector<PairMaps>& maps, MapKind which, EvalMode mode) {
    EvalOptions opt;
    opt.mode = mode;
    return verification_metric(d.suite, maps, which, d.threshold, structured(), opt).auc;
}

// 1. ---------------------------------------------------------------------

Outcome pearson_oracle() {
    MaskGenConfig mc;
    mc.num_masks = 64;
    mc.patches_per_mask = 3;
    mc.patch_size = 5;
    mc.mask_type = MaskType::random;
    const MaskSet set = generate_masks(mc, 16, 16, 42);
    std::mt19937_64 rng(43);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> scores(64);
    for (std::size_t k = 0; k < scores.size(); ++k) {
        double mean_mask = 0.0;
        for (float v : set.masks[k].values()) mean_mask += v;
        scores[k] = 0.6 + 0.1 * set.masks[k].at(8, 8) + 0.01 * mean_mask / 256.0 + 0.02 * noise(rng);
    }

    const auto t0 = std::chrono::steady_clock::now();
    const SaliencyMap fast = pixelwise_pearson(scores, set);
    PearsonAccumulator acc(16, 16);
    const ScoreList channel(scores);
    acc.add(set.masks, std::span(&channel, 1));
    const SaliencyMap streamed = acc.finish();
    const double elapsed = seconds_since(t0);

    // Naive oracle: textbook two-pass covariance per pixel.
    double worst = 0.0;
    const double n = static_cast<double>(scores.size());
    double mean_s = 0.0;
    for (double s : scores) mean_s += s / n;
    for (int r = 0; r < 16; ++r) {
        for (int c = 0; c < 16; ++c) {
            double mean_m = 0.0;
            for (const Mask& m : set.masks) mean_m += m.at(r, c) / n;
            double cov = 0.0, vm = 0.0, vs = 0.0;
            for (std::size_t k = 0; k < scores.size(); ++k) {
                const double dm = set.masks[k].at(r, c) - mean_m;
                const double ds = scores[k] - mean_s;
                cov += dm * ds;
                vm += dm * dm;
                vs += ds * ds;
            }
            const double rho = cov / std::sqrt(vm * vs);
            worst = std::max({worst, std::abs(fast.at(r, c) - rho), std::abs(streamed.at(r, c) - rho)});
        }
    }
    return {worst <= 1e-6 && elapsed < 1.0, "max |diff|=" + fixed(worst, 9) + " time=" + fixed(elapsed, 3) + "s"};
}

// 2. ---------------------------------------------------------------------

Outcome determinism() {
    const Toyset set = toyset(0);
    const ToyPair& pair = set.pairs.back();
    ExplainConfig cfg;
    cfg.seed = 2024;
    cfg.regularization = true;
    const int saved = worker_count();
    auto run = [&](int workers) {
        set_worker_count(workers);
        return explain_pair(set.images[pair.a], set.images[pair.b], structured(), cfg);
    };
    const auto first = run(1);
    const auto second = run(1);
    bool identical = first.signed_a == second.signed_a && first.signed_b == second.signed_b &&
                     first.scores_a == second.scores_a && first.scores_b == second.scores_b;
    double worst = 0.0;
    for (int workers : {2, 3, 4, 8}) {
        const auto other = run(workers);
        for (std::size_t i = 0; i < first.signed_a.size(); ++i) {
            worst = std::max(worst, std::abs(static_cast<double>(first.signed_a[i]) - other.signed_a[i]));
            worst = std::max(worst, std::abs(static_cast<double>(first.signed_b[i]) - other.signed_b[i]));
        }
    }
    set_worker_count(saved);
    return {identical && worst <= 1e-5,
            std::string("single-thread ") + (identical ? "bit-identical" : "DIFFERS") +
                ", max |diff| over 2/3/4/8 workers=" + fixed(worst, 9)};
}

// 3. ---------------------------------------------------------------------

Outcome localization() {
    int argmax_hits = 0;
    int top_hits = 0;
    std::string fractions;
    for (int seed = 0; seed < kSeeds; ++seed) {
        const Toyset set = toyset(seed);
        const auto it = std::find_if(set.pairs.begin(), set.pairs.end(), [](const ToyPair& p) { return p.planted; });
        ExplainConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(seed);
        const auto ex = explain_pair(set.images[it->a], set.images[it->b], structured(), cfg);
        const SaliencyMap& dissim = ex.a.negative;
        const auto order = rank_pixels(dissim);
        const int w = dissim.width();
        argmax_hits += it->planted->contains(static_cast<int>(order[0]) / w, static_cast<int>(order[0]) % w);
        const std::size_t top = modified_count(dissim.size(), 0.01);
        std::size_t inside = 0;
        for (std::size_t i = 0; i < top; ++i) {
            inside += it->planted->contains(static_cast<int>(order[i]) / w, static_cast<int>(order[i]) % w);
        }
        const double fraction = static_cast<double>(inside) / static_cast<double>(top);
        top_hits += fraction >= 0.6;
        fractions += (seed ? "," : "") + fixed(fraction, 2);
    }
    return {argmax_hits >= 9 && top_hits == kSeeds,
            "argmax inside " + std::to_string(argmax_hits) + "/10, top-1% inside per seed [" + fractions +
                "] (need >= 0.60 on every seed)"};
}

// 4. ---------------------------------------------------------------------

Outcome ordering() {
    int wins = 0;
    std::string rows;
    for (int seed = 0; seed < kSeeds; ++seed) {
        const SeedData& d = seed_data(seed);
        const auto baseline = random_maps(d.suite, seed);
        const double del_c = verification_auc(d, d.similarity, MapKind::similarity, EvalMode::deletion);
        const double del_r = verification_auc(d, baseline, MapKind::similarity, EvalMode::deletion);
        const double ins_c = verification_auc(d, d.similarity, MapKind::similarity, EvalMode::insertion);
        const double ins_r = verification_auc(d, baseline, MapKind::similarity, EvalMode::insertion);
        wins += del_c < del_r && ins_c > ins_r;
        rows += "\n    seed " + std::to_string(seed) + ": deletion " + fixed(del_c) + " vs random " + fixed(del_r) +
                ", insertion " + fixed(ins_c) + " vs random " + fixed(ins_r);
    }
    return {wins == kSeeds, std::to_string(wins) + "/10 seeds ordered" + rows};
}

// 5. ---------------------------------------------------------------------

Outcome sanity() {
    // Same small suite as the sanity-check command's default.
    ToysetConfig tc;
    tc.subjects = 4;
    tc.images_per_subject = 3;
    const auto suite = verification_samples(make_toyset(tc));
    SanityConfig cfg;
    const auto report = sanity_check(suite, cfg);
    int structured_ok = 0;
    int randomized_ok = 0;
    std::string rows;
    for (const auto& t : report.trials) {
        structured_ok += t.gap_structured > cfg.margin;
        randomized_ok += std::abs(t.gap_randomized) <= cfg.epsilon;
        rows += "\n    trial " + std::to_string(t.trial) + ": gap_structured=" + fixed(t.gap_structured) +
                " gap_randomized=" + fixed(t.gap_randomized) + (t.pass ? "" : "  (fail)");
    }
    return {report.pass, "structured gap > 0.05 in " + std::to_string(structured_ok) +
                             "/10, randomized |gap| <= 0.02 in " + std::to_string(randomized_ok) + "/10" + rows};
}

// 6. ---------------------------------------------------------------------

Outcome regularization() {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    bool bounded = true;
    for (int i = 0; i < 1000; ++i) {
        const double lambda = regularization_weight(u(rng));
        bounded = bounded && lambda >= -1.0 && lambda <= 0.0;
    }
    bounded = bounded && regularization_weight(0.0) == -1.0 && regularization_weight(1.0) == 0.0;

    int wins = 0;
    std::string rows;
    for (int seed = 0; seed < kSeeds; ++seed) {
        const SeedData& d = seed_data(seed);
        std::vector<PairMaps> plain(d.suite.size()), regularized(d.suite.size());
        ExplainConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(seed);
        for (std::size_t i = 0; i < d.suite.size(); ++i) {
            if (d.suite[i].matching) continue;
            cfg.regularization = false;
            const auto a = explain_pair(d.suite[i].a, d.suite[i].b, structured(), cfg);
            cfg.regularization = true;
            const auto b = explain_pair(d.suite[i].a, d.suite[i].b, structured(), cfg);
            plain[i] = {a.a.negative, a.b.negative};
            regularized[i] = {b.a.negative, b.b.negative};
        }
        const double off = verification_auc(d, plain, MapKind::dissimilarity, EvalMode::insertion);
        const double on = verification_auc(d, regularized, MapKind::dissimilarity, EvalMode::insertion);
        wins += on >= off;
        rows += "\n    seed " + std::to_string(seed) + ": insertion regularized " + fixed(on) + " vs plain " + fixed(off);
    }
    return {bounded && wins >= 8, std::string("lambda in [-1,0] for 1000 draws: ") + (bounded ? "yes" : "NO") +
                                      ", regularized >= plain in " + std::to_string(wins) + "/10" + rows};
}

// 7. ---------------------------------------------------------------------

Outcome harness_identities() {
    bool ok = true;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    int checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        Image img(8, 8, 3);
        for (float& v : img.pixels()) v = 0.01f + u(rng);  // strictly positive so deletions are visible
        SaliencyMap map(8, 8);
        for (float& v : map.values()) v = trial % 5 == 0 ? 0.5f : u(rng);  // include all-tie maps
        const auto order = rank_pixels(map);
        std::vector<bool> previous(64, false);
        for (int k = 0; k <= 8; ++k) {
            const double p = k / 8.0;
            const Image del = delete_pixels(img, order, p);
            const Image ins = insert_pixels(Image(8, 8, 3), img, order, p);
            std::vector<bool> modified(64, false);
            std::size_t count = 0;
            for (int i = 0; i < 64; ++i) {
                bool deleted = true, inserted = true;
                for (int c = 0; c < 3; ++c) {
                    const std::size_t j = static_cast<std::size_t>(i) * 3 + c;
                    ok = ok && del.pixels()[j] + ins.pixels()[j] == img.pixels()[j];
                    deleted = deleted && del.pixels()[j] == 0.0f;
                    inserted = inserted && ins.pixels()[j] == img.pixels()[j];
                }
                ok = ok && deleted == inserted;
                modified[i] = deleted;
                count += deleted;
                ok = ok && (!previous[i] || modified[i]);
            }
            ok = ok && count == modified_count(64, p);
            // The modified set is exactly the first `count` ranked pixels.
            for (std::size_t r = 0; r < order.size(); ++r) ok = ok && modified[order[r]] == (r < count);
            previous = modified;
            ++checked;
        }
    }
    std::vector<double> linear(11);
    for (int i = 0; i <= 10; ++i) linear[i] = 1.0 - i / 10.0;
    const double a = auc(linear);
    ok = ok && std::abs(a - 0.5) <= 1e-12;
    return {ok, std::to_string(checked) + " (map, fraction) cases, auc(linear)=" + fixed(a, 15)};
}

// 8. ---------------------------------------------------------------------

Outcome iterations() {
    int wins = 0;
    std::string rows;
    for (int seed = 0; seed < kSeeds; ++seed) {
        const SeedData& d = seed_data(seed);
        ExplainConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(seed);
        cfg.mask_config.num_masks = 100;
        const auto few = similarity_maps(d.suite, cfg);
        const double at_1000 = verification_auc(d, d.similarity, MapKind::similarity, EvalMode::deletion);
        const double at_100 = verification_auc(d, few, MapKind::similarity, EvalMode::deletion);
        wins += at_1000 <= at_100;
        rows += "\n    seed " + std::to_string(seed) + ": N=1000 " + fixed(at_1000) + " vs N=100 " + fixed(at_100);
    }
    return {wins >= 8, "N=1000 <= N=100 in " + std::to_string(wins) + "/10" + rows};
}

// 9. ---------------------------------------------------------------------

Outcome performance() {
    const Toyset set = toyset(0);
    const ToyPair& pair = set.pairs.front();
    ExplainConfig cfg;
    const auto t0 = std::chrono::steady_clock::now();
    const auto ex = explain_pair(set.images[pair.a], set.images[pair.b], structured(), cfg);
    const double elapsed = seconds_since(t0);
    rusage usage{};
    getrusage(RUSAGE_SELF, &usage);
    const double peak_mb = static_cast<double>(usage.ru_maxrss) / 1024.0;
    return {elapsed < 10.0 && peak_mb < 1024.0 && ex.scores_a.size() == 1000,
            "explain_pair N=1000 112x112 in " + fixed(elapsed, 3) + "s on " + std::to_string(worker_count()) +
                " worker(s), peak RSS " + fixed(peak_mb, 1) + " MB"};
}

// 10. --------------------------------------------------------------------

Outcome wire_protocol() {
    const std::uint64_t seed = 10;
    const EmbedderSpec spec = EmbedderSpec::parse(std::string("ext:cmd=") + SALIEX_REF_EMBEDDER +
                                                  " --dim 128 --seed " + std::to_string(seed));
    const auto remote = make_embedder(spec);
    const RandomProjectionEmbedder local(128, seed);
    const Toyset set = toyset(1);
    std::vector<Image> batch(set.images.begin(), set.images.begin() + 64);
    const auto a = embed(*remote, batch);
    const auto b = embed(local, batch);
    double worst = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        for (std::size_t j = 0; j < a[i].values.size(); ++j) {
            worst = std::max(worst, std::abs(static_cast<double>(a[i].values[j]) - b[i].values[j]));
        }
    }
    return {a.size() == 64 && worst <= 1e-6, "64 images, d=128, max |diff|=" + fixed(worst, 9)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app("Acceptance criteria");
    std::vector<int> only;
    app.add_option("criteria", only, "Criterion numbers to run (default: all)");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"Pearson oracle equivalence", pearson_oracle},
        {"end-to-end determinism", determinism},
        {"planted-difference localization", localization},
        {"deletion/insertion ordering vs random maps", ordering},
        {"model-randomization sanity check", sanity},
        {"regularization direction and lambda bound", regularization},
        {"evaluation-harness identities", harness_identities},
        {"more masks do not hurt deletion", iterations},
        {"performance envelope", performance},
        {"wire-protocol conformance", wire_protocol},
    };
    // Performance runs first so the peak RSS reflects one explanation; the
    // sanity check is by far the slowest and runs last.
    std::vector<int> order = {9, 1, 2, 3, 4, 6, 7, 8, 10, 5};
    const std::set<int> selected(only.begin(), only.end());
    std::map<int, Outcome> results;
    for (int id : order) {
        if (!selected.empty() && !selected.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[static_cast<std::size_t>(id - 1)].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        results[id] = o;
        std::cout << "[" << id << "] " << criteria[static_cast<std::size_t>(id - 1)].first << " ("
                  << fixed(seconds_since(t0), 1) << "s): " << o.detail << std::endl;
    }
    int failed = 0;
    std::cout << '\n';
    for (const auto& [id, o] : results) {
        failed += !o.pass;
        std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  "
                  << criteria[static_cast<std::size_t>(id - 1)].first << std::endl;
    }
    std::cout << "summary: " << results.size() - failed << "/" << results.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
