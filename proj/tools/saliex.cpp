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

// saliex command-line interface.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "saliex/corrrise.hpp"
#include "saliex/errors.hpp"
#include "saliex/evaluation.hpp"
#include "saliex/image_io.hpp"
#include "saliex/maskgen.hpp"
#include "saliex/parallel.hpp"
#include "saliex/sanity.hpp"
#include "saliex/toyset.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace saliex;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("SALIEX_SEED"); env != nullptr && *env != '\0') {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(env, &used);
            if (used == std::string(env).size()) return v;
        } catch (const std::logic_error&) {
        }
        throw CLI::ValidationError("SALIEX_SEED", std::string("not an unsigned integer: ") + env);
    }
    return 0;
}

std::string fmt(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

std::string indexed(const char* pattern, std::size_t i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, i);
    return buf;
}

void write_json(const json& doc, const fs::path& path) {
    std::ofstream out(path);
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("cannot write " + path.string());
}

// Options shared by every command that runs the explainer.
struct ExplainArgs {
    std::string model = "toy:block-avg:g=8";
    int masks = 1000;
    int patches = 10;
    int patch_size = 30;
    std::string mask_type = "binary";
    std::uint64_t seed = 0;
    bool regularize = false;
    std::optional<double> regularization_threshold;
    int batch_size = 64;
    int size = 112;

    void add_to(CLI::App& app) {
        app.add_option("--model", model, "Embedder, e.g. toy:block-avg:g=8 or ext:cmd=...");
        app.add_option("--masks", masks, "Number of masks N");
        app.add_option("--patches", patches, "Patches per mask");
        app.add_option("--patch-size", patch_size, "Side of each square patch in pixels");
        app.add_option("--mask-type", mask_type, "binary | random | gaussian")
            ->check(CLI::IsMember({"binary", "random", "gaussian"}));
        app.add_option("--seed", seed, "Root seed (default: $SALIEX_SEED or 0)");
        app.add_flag("--regularize", regularize, "Use the blended-image regularized score");
        app.add_option("--regularization-threshold", regularization_threshold,
                       "Skip regularization for pairs scoring at or above this value");
        app.add_option("--batch-size", batch_size, "Images per embedder call")->check(CLI::PositiveNumber);
        app.add_option("--size", size, "Working image side in pixels")->check(CLI::PositiveNumber);
    }

    ExplainConfig config() const {
        ExplainConfig cfg;
        cfg.mask_config.num_masks = masks;
        cfg.mask_config.patches_per_mask = patches;
        cfg.mask_config.patch_size = patch_size;
        cfg.mask_config.mask_type = parse_mask_type(mask_type);
        cfg.seed = seed;
        cfg.regularization = regularize;
        cfg.regularization_threshold = regularization_threshold;
        cfg.batch_size = batch_size;
        return cfg;
    }

    Image load(const fs::path& path) const { return load_image(path, size, size, 3); }
};

// Effective command line of a parsed subcommand, defaults included.
std::vector<std::string> effective_argv(const CLI::App& sub) {
    std::vector<std::string> argv;
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt->get_lnames().empty()) continue;
        const std::string name = "--" + opt->get_lnames().front();
        if (name == "--help") continue;
        if (opt->get_expected_max() == 0) {  // flag
            if (opt->count() > 0 && opt->as<bool>()) argv.push_back(name);
            continue;
        }
        if (opt->count() > 0) {
            for (const auto& v : opt->results()) {
                argv.push_back(name);
                argv.push_back(v);
            }
        } else if (!opt->get_default_str().empty()) {
            argv.push_back(name);
            argv.push_back(opt->get_default_str());
        }
    }
    return argv;
}

json manifest(const CLI::App& sub, const json& extra = json::object()) {
    json doc = {{"command", sub.get_name()}, {"argv", effective_argv(sub)}, {"cwd", fs::current_path().string()}};
    for (auto it = extra.begin(); it != extra.end(); ++it) doc[it.key()] = it.value();
    return doc;
}

void write_scores(const PairExplanation& ex, const fs::path& path) {
    std::ofstream out(path);
    out << "mask_index,sc_a,sc_b\n";
    for (std::size_t k = 0; k < ex.scores_a.size(); ++k) {
        out << k << ',' << fmt(ex.scores_a[k]) << ',' << fmt(ex.scores_b[k]) << '\n';
    }
    if (!out) throw IoError("cannot write " + path.string());
}

void write_side(const fs::path& dir, const std::string& name, const Image& image, const SaliencyMap& signed_map,
                const SplitSaliency& split, double alpha) {
    save_pfm(signed_map, dir / (name + "_signed.pfm"));
    save_pfm(split.positive, dir / (name + "_sim.pfm"));
    save_pfm(split.negative, dir / (name + "_dissim.pfm"));
    save_png(render_overlay(image, split.positive, alpha), dir / (name + "_sim.png"));
    save_png(render_overlay(image, split.negative, alpha), dir / (name + "_dissim.png"));
}

json explanation_json(const PairExplanation& ex) {
    return {{"score", ex.score},
            {"lambda", ex.lambda},
            {"regularization_applied", ex.regularization_applied},
            {"warnings", ex.warnings}};
}

// ---------------------------------------------------------------- explain

struct ExplainCmd {
    ExplainArgs common;
    std::string image_a;
    std::string image_b;
    std::string out_dir;
    double alpha = 0.5;
    bool dump_masks = false;

    CLI::App* attach(CLI::App& app) {
        auto* sub = app.add_subcommand("explain", "Saliency maps for one image pair");
        sub->add_option("--image-a", image_a, "First image")->required();
        sub->add_option("--image-b", image_b, "Second image")->required();
        sub->add_option("--out-dir", out_dir, "Output directory")->required();
        sub->add_option("--alpha", alpha, "Overlay opacity")->check(CLI::Range(0.0, 1.0));
        sub->add_flag("--dump-masks", dump_masks, "Also write every mask as PFM under masks/");
        common.add_to(*sub);
        return sub;
    }

    int run(const CLI::App& sub) const {
        const auto embedder = make_embedder(EmbedderSpec::parse(common.model));
        const Image a = common.load(image_a);
        const Image b = common.load(image_b);
        const ExplainConfig cfg = common.config();
        const auto ex = explain_pair(a, b, *embedder, cfg);

        const fs::path dir(out_dir);
        fs::create_directories(dir);
        write_side(dir, "a", a, ex.signed_a, ex.a, alpha);
        write_side(dir, "b", b, ex.signed_b, ex.b, alpha);
        write_scores(ex, dir / "scores.csv");
        if (dump_masks) dump_mask_set(generate_masks(cfg.mask_config, a.height(), a.width(), cfg.seed), dir / "masks");
        write_json(manifest(sub, {{"result", explanation_json(ex)}, {"embedder", embedder->describe()}}),
                   dir / "run-manifest.json");
        for (const auto& w : ex.warnings) std::cerr << "warning: " << w << '\n';
        std::cout << "score " << fmt(ex.score) << '\n';
        return 0;
    }
};

// ---------------------------------------------------------------- identify

struct IdentifyCmd {
    ExplainArgs common;
    std::string probe;
    std::string gallery_manifest;
    int top_k = 5;
    std::string out_dir;
    double alpha = 0.5;

    CLI::App* attach(CLI::App& app) {
        auto* sub = app.add_subcommand("identify", "Rank a gallery against a probe and explain the top K");
        sub->add_option("--probe", probe, "Probe image")->required();
        sub->add_option("--gallery-manifest", gallery_manifest, "path<TAB>identity per line")->required();
        sub->add_option("--top-k", top_k, "Number of gallery matches to explain")->check(CLI::PositiveNumber);
        sub->add_option("--out-dir", out_dir, "Output directory")->required();
        sub->add_option("--alpha", alpha, "Overlay opacity")->check(CLI::Range(0.0, 1.0));
        common.add_to(*sub);
        return sub;
    }

    int run(const CLI::App& sub) const {
        const auto embedder = make_embedder(EmbedderSpec::parse(common.model));
        const auto entries = read_gallery_manifest(gallery_manifest);
        if (entries.empty()) throw ConfigError("gallery-manifest", "gallery manifest is empty");
        const Image p = common.load(probe);
        std::vector<Image> gallery;
        for (const auto& e : entries) gallery.push_back(common.load(e.path));

        const auto ranked = explain_identification(p, gallery, top_k, *embedder, common.config());

        const fs::path dir(out_dir);
        fs::create_directories(dir);
        std::ofstream csv(dir / "ranking.csv");
        csv << "rank,path,identity,score\n";
        const auto scores = gallery_scores(p, gallery, *embedder, common.batch_size);
        const auto order = rank_gallery(scores);
        for (std::size_t r = 0; r < order.size(); ++r) {
            const auto& e = entries[order[r]];
            csv << r + 1 << ',' << e.path.generic_string() << ',' << e.identity << ',' << fmt(scores[order[r]]) << '\n';
        }
        if (!csv) throw IoError("cannot write ranking.csv");
        std::vector<SaliencyMap> probe_maps;
        json ranks = json::array();
        for (std::size_t r = 0; r < ranked.size(); ++r) {
            const auto& m = ranked[r];
            const auto& e = entries[m.gallery_index];
            const fs::path rank_dir = dir / indexed("rank_%02zu", r + 1);
            fs::create_directories(rank_dir);
            write_side(rank_dir, "gallery", gallery[m.gallery_index], m.explanation.signed_b, m.explanation.b, alpha);
            write_side(rank_dir, "probe", p, m.explanation.signed_a, m.explanation.a, alpha);
            probe_maps.push_back(m.explanation.signed_a);
            json jr = explanation_json(m.explanation);
            jr["gallery_index"] = m.gallery_index;
            jr["identity"] = e.identity;
            ranks.push_back(std::move(jr));
        }
        save_pfm(average_maps(probe_maps), dir / "probe_map.pfm");
        write_json(manifest(sub, {{"ranks", ranks}, {"embedder", embedder->describe()}}), dir / "run-manifest.json");
        std::cout << "rank 1: " << entries[ranked.front().gallery_index].identity << " score "
                  << fmt(ranked.front().score) << '\n';
        return 0;
    }
};

// ---------------------------------------------------------------- evaluate

struct EvaluateCmd {
    ExplainArgs common;
    std::string task = "verification";
    std::string pairs;
    std::string probes;
    std::string gallery_manifest;
    std::string mode = "deletion";
    std::string which = "similarity";
    int steps = 20;
    double sigma = 4.0;
    std::string method = "corrrise";
    std::string maps_dir;
    std::string save_maps;
    std::optional<double> threshold;
    int rank_n = 1;
    int top_k = 5;
    std::string out_dir;

    CLI::App* attach(CLI::App& app) {
        auto* sub = app.add_subcommand("evaluate", "Deletion / insertion curves for a saliency method");
        sub->add_option("--task", task, "verification | identification")
            ->check(CLI::IsMember({"verification", "identification"}));
        sub->add_option("--pairs", pairs, "Pair list (verification)");
        sub->add_option("--probes", probes, "Probe manifest path<TAB>identity (identification)");
        sub->add_option("--gallery-manifest", gallery_manifest, "Gallery manifest (identification)");
        sub->add_option("--mode", mode, "deletion | insertion")->check(CLI::IsMember({"deletion", "insertion"}));
        sub->add_option("--which", which, "similarity | dissimilarity (verification)")
            ->check(CLI::IsMember({"similarity", "dissimilarity"}));
        sub->add_option("--steps", steps, "Number of fractions n")->check(CLI::PositiveNumber);
        sub->add_option("--sigma", sigma, "Gaussian blur sigma before ranking")->check(CLI::NonNegativeNumber);
        sub->add_option("--method", method, "corrrise | random (ignored with --maps-dir)")
            ->check(CLI::IsMember({"corrrise", "random"}));
        sub->add_option("--maps-dir", maps_dir, "Precomputed maps: pair_NNNNN/{a|b}_{sim|dissim}.pfm or probe_NNNNN.pfm");
        sub->add_option("--save-maps", save_maps, "Write the maps used into this directory");
        sub->add_option("--threshold", threshold, "Fixed decision threshold (default: calibrated)");
        sub->add_option("--rank-n", rank_n, "Rank-N criterion (identification)")->check(CLI::PositiveNumber);
        sub->add_option("--top-k", top_k, "Explained matches averaged per probe")->check(CLI::PositiveNumber);
        sub->add_option("--out-dir", out_dir, "Output directory")->required();
        common.add_to(*sub);
        return sub;
    }

    EvalOptions options() const {
        EvalOptions o;
        o.steps = steps;
        o.sigma = sigma;
        o.mode = parse_eval_mode(mode);
        o.batch_size = common.batch_size;
        return o;
    }

    static void write_curve(const EvalCurve& curve, const fs::path& path) {
        std::ofstream out(path);
        out << "fraction,value\n";
        for (std::size_t k = 0; k < curve.values.size(); ++k) {
            out << fmt(curve.fractions[k]) << ',' << fmt(curve.values[k]) << '\n';
        }
        if (!out) throw IoError("cannot write " + path.string());
    }

    int run(const CLI::App& sub) const {
        const auto embedder = make_embedder(EmbedderSpec::parse(common.model));
        const fs::path dir(out_dir);
        fs::create_directories(dir);
        json summary = {{"task", task}, {"mode", mode}, {"n", steps}, {"sigma", sigma},
                        {"method", maps_dir.empty() ? method : "maps-dir"}};
        EvalCurve curve;
        if (task == "verification") {
            if (pairs.empty()) throw CLI::RequiredError("--pairs");
            curve = run_verification(*embedder, summary);
        } else {
            if (probes.empty()) throw CLI::RequiredError("--probes");
            if (gallery_manifest.empty()) throw CLI::RequiredError("--gallery-manifest");
            curve = run_identification(*embedder, summary);
        }
        summary["auc"] = curve.auc;
        write_curve(curve, dir / "curve.csv");
        write_json(summary, dir / "summary.json");
        write_json(manifest(sub, {{"summary", summary}}), dir / "run-manifest.json");
        std::cout << "auc " << fmt(curve.auc) << '\n';
        return 0;
    }

    EvalCurve run_verification(const Embedder& embedder, json& summary) const {
        const MapKind kind = parse_map_kind(which);
        const auto list = read_pair_list(pairs);
        std::vector<VerificationSample> samples;
        for (const auto& p : list) {
            samples.push_back({common.load(p.a), common.load(p.b), p.matching,
                               p.a.generic_string() + " | " + p.b.generic_string()});
        }
        const double thr = threshold ? *threshold : calibrate_threshold(samples, embedder, common.batch_size).value;
        const std::string suffix = kind == MapKind::similarity ? "sim" : "dissim";
        const bool want = kind == MapKind::similarity;

        std::vector<PairMaps> maps(samples.size());
        const ExplainConfig cfg = common.config();
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (samples[i].matching != want) continue;
            const int h = samples[i].a.height();
            const int w = samples[i].a.width();
            const fs::path pair_dir = indexed("pair_%05zu", i);
            if (!maps_dir.empty()) {
                const fs::path base = fs::path(maps_dir) / pair_dir;
                if (fs::exists(base / ("a_" + suffix + ".pfm"))) maps[i].a = load_pfm(base / ("a_" + suffix + ".pfm"));
                if (fs::exists(base / ("b_" + suffix + ".pfm"))) maps[i].b = load_pfm(base / ("b_" + suffix + ".pfm"));
            } else if (method == "random") {
                maps[i] = {random_saliency(h, w, common.seed, 2 * i), random_saliency(h, w, common.seed, 2 * i + 1)};
            } else {
                const auto ex = explain_pair(samples[i].a, samples[i].b, embedder, cfg);
                maps[i] = want ? PairMaps{ex.a.positive, ex.b.positive} : PairMaps{ex.a.negative, ex.b.negative};
            }
            if (!save_maps.empty() && !maps[i].a.empty() && !maps[i].b.empty()) {
                const fs::path out = fs::path(save_maps) / pair_dir;
                fs::create_directories(out);
                save_pfm(maps[i].a, out / ("a_" + suffix + ".pfm"));
                save_pfm(maps[i].b, out / ("b_" + suffix + ".pfm"));
            }
        }
        summary["which"] = which;
        summary["threshold"] = thr;
        return verification_metric(samples, maps, kind, thr, embedder, options());
    }

    EvalCurve run_identification(const Embedder& embedder, json& summary) const {
        const auto probe_entries = read_gallery_manifest(probes);
        const auto gallery_entries = read_gallery_manifest(gallery_manifest);
        if (gallery_entries.empty()) throw ConfigError("gallery-manifest", "gallery manifest is empty");
        std::vector<GalleryImage> gallery;
        std::vector<Image> gallery_images;
        for (const auto& e : gallery_entries) {
            gallery.push_back({common.load(e.path), e.identity});
            gallery_images.push_back(gallery.back().image);
        }
        const int k = std::min<int>(top_k, static_cast<int>(gallery.size()));
        const ExplainConfig cfg = common.config();
        std::vector<IdentificationProbe> items;
        for (std::size_t i = 0; i < probe_entries.size(); ++i) {
            IdentificationProbe p{common.load(probe_entries[i].path), probe_entries[i].identity, {},
                                  probe_entries[i].path.generic_string()};
            const std::string file = indexed("probe_%05zu.pfm", i);
            if (!maps_dir.empty()) {
                if (fs::exists(fs::path(maps_dir) / file)) p.map = load_pfm(fs::path(maps_dir) / file);
            } else if (method == "random") {
                p.map = random_saliency(p.image.height(), p.image.width(), common.seed, i);
            } else {
                std::vector<SaliencyMap> side;
                for (const auto& m : explain_identification(p.image, gallery_images, k, embedder, cfg)) {
                    side.push_back(m.explanation.signed_a);
                }
                p.map = average_maps(side);
            }
            if (!save_maps.empty() && !p.map.empty()) {
                fs::create_directories(save_maps);
                save_pfm(p.map, fs::path(save_maps) / file);
            }
            items.push_back(std::move(p));
        }
        const auto result = identification_metric(items, gallery, rank_n, embedder, options());
        json excluded = json::array();
        for (std::size_t i : result.excluded) {
            excluded.push_back(probe_entries[i].path.generic_string());
            std::cerr << "warning: probe " << probe_entries[i].path << " excluded, identity '"
                      << probe_entries[i].identity << "' is not in the gallery\n";
        }
        summary["rank_n"] = rank_n;
        summary["top_k"] = k;
        summary["excluded_probes"] = excluded;
        return result.curve;
    }
};

// ---------------------------------------------------------------- sanity-check

struct SanityCmd {
    ExplainArgs common;
    std::string pairs;
    int subjects = 4;
    int images_per_subject = 3;
    int trials = 10;
    double margin = 0.05;
    double epsilon = 0.02;
    int proj_dim = 128;
    int grid = 8;
    int steps = 20;
    double sigma = 4.0;
    bool self_evaluate = false;
    std::string out_dir;

    CLI::App* attach(CLI::App& app) {
        auto* sub = app.add_subcommand("sanity-check", "Model-randomization check of the explainer");
        sub->add_option("--pairs", pairs, "Pair list (default: a generated toy suite)");
        sub->add_option("--subjects", subjects, "Toy suite subjects")->check(CLI::PositiveNumber);
        sub->add_option("--images-per-subject", images_per_subject, "Toy suite images per subject")
            ->check(CLI::Range(2, 1000));
        sub->add_option("--trials", trials, "Number of randomized models")->check(CLI::PositiveNumber);
        sub->add_option("--margin", margin, "Required gap for the structured embedder");
        sub->add_option("--epsilon", epsilon, "Allowed |gap| for the randomized embedder");
        sub->add_option("--proj-dim", proj_dim, "Output dimension of the randomized embedder");
        sub->add_option("--grid", grid, "Grid of the structured block-average embedder");
        sub->add_option("--steps", steps, "Deletion steps")->check(CLI::PositiveNumber);
        sub->add_option("--sigma", sigma, "Blur sigma before ranking")->check(CLI::NonNegativeNumber);
        sub->add_flag("--self-evaluate", self_evaluate, "Score each map set under the embedder that made it");
        sub->add_option("--out-dir", out_dir, "Output directory")->required();
        common.add_to(*sub);
        return sub;
    }

    int run(const CLI::App& sub) const {
        std::vector<VerificationSample> suite;
        if (!pairs.empty()) {
            for (const auto& p : read_pair_list(pairs)) {
                suite.push_back({common.load(p.a), common.load(p.b), p.matching,
                                 p.a.generic_string() + " | " + p.b.generic_string()});
            }
        } else {
            ToysetConfig tc;
            tc.subjects = subjects;
            tc.images_per_subject = images_per_subject;
            tc.size = common.size;
            tc.seed = common.seed;
            suite = verification_samples(make_toyset(tc));
        }
        SanityConfig cfg;
        cfg.explain = common.config();
        cfg.eval.steps = steps;
        cfg.eval.sigma = sigma;
        cfg.eval.batch_size = common.batch_size;
        cfg.trials = trials;
        cfg.grid = grid;
        cfg.proj_dim = proj_dim;
        cfg.margin = margin;
        cfg.epsilon = epsilon;
        cfg.seed = common.seed;
        cfg.self_evaluate = self_evaluate;
        const auto report = sanity_check(suite, cfg);

        json trials_json = json::array();
        for (const auto& t : report.trials) {
            std::cout << "trial " << t.trial << ": " << (t.pass ? "PASS" : "FAIL")
                      << " gap_structured=" << fmt(t.gap_structured) << " gap_randomized=" << fmt(t.gap_randomized)
                      << '\n';
            trials_json.push_back({{"trial", t.trial},
                                   {"random_model_seed", t.random_model_seed},
                                   {"auc_random_maps", t.auc_random_maps},
                                   {"auc_structured", t.auc_structured},
                                   {"auc_random_maps_randomized_eval", t.auc_random_maps_rand},
                                   {"auc_randomized", t.auc_randomized},
                                   {"gap_structured", t.gap_structured},
                                   {"gap_randomized", t.gap_randomized},
                                   {"pass", t.pass}});
        }
        std::cout << "overall: " << (report.pass ? "PASS" : "FAIL") << '\n';
        fs::create_directories(out_dir);
        write_json({{"pass", report.pass}, {"margin", margin}, {"epsilon", epsilon}, {"trials", trials_json}},
                   fs::path(out_dir) / "sanity.json");
        write_json(manifest(sub), fs::path(out_dir) / "run-manifest.json");
        return 0;
    }
};

// ---------------------------------------------------------------- make-toyset

struct ToysetCmd {
    std::string out_dir;
    ToysetConfig config;

    CLI::App* attach(CLI::App& app) {
        auto* sub = app.add_subcommand("make-toyset", "Write the synthetic planted-difference dataset");
        sub->add_option("--out-dir", out_dir, "Output directory")->required();
        sub->add_option("--subjects", config.subjects, "Number of identities");
        sub->add_option("--images-per-subject", config.images_per_subject, "Images per identity");
        sub->add_option("--size", config.size, "Image side in pixels");
        sub->add_option("--patch", config.patch, "Planted patch side in pixels");
        sub->add_option("--seed", config.seed, "Root seed (default: $SALIEX_SEED or 0)");
        return sub;
    }

    int run(const CLI::App& sub) const {
        const auto set = make_toyset(config);
        write_toyset(set, out_dir);
        write_json(manifest(sub), fs::path(out_dir) / "run-manifest.json");
        std::cout << set.images.size() << " images, " << set.pairs.size() << " pairs\n";
        return 0;
    }
};

int run(std::vector<std::string> args);

int rerun(const std::string& manifest_path, const std::string& out_dir) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot open " + manifest_path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError(manifest_path + ": " + e.what());
    }
    if (!doc.contains("command") || !doc.contains("argv")) {
        throw FormatError(manifest_path + ": not a run manifest");
    }
    // Relative paths in argv are relative to the original working directory.
    const std::string override_dir = out_dir.empty() ? out_dir : fs::absolute(out_dir).string();
    if (doc.contains("cwd")) fs::current_path(doc["cwd"].get<std::string>());
    std::vector<std::string> args = {"saliex", doc["command"].get<std::string>()};
    const auto argv = doc["argv"].get<std::vector<std::string>>();
    for (std::size_t i = 0; i < argv.size(); ++i) {
        if (!override_dir.empty() && argv[i] == "--out-dir" && i + 1 < argv.size()) {
            args.push_back(argv[i]);
            args.push_back(override_dir);
            ++i;
            continue;
        }
        args.push_back(argv[i]);
    }
    return run(std::move(args));
}

int run(std::vector<std::string> args) {
    CLI::App app{"Correlation-based saliency for embedding recognizers"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    int workers = 0;
    app.add_option("--workers", workers, "Parallel workers (default: all cores)");

    std::uint64_t seed = 0;
    try {
        seed = default_seed();
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << '\n';
        return kExitUsage;
    }

    ExplainCmd explain;
    IdentifyCmd identify;
    EvaluateCmd evaluate;
    SanityCmd sanity;
    ToysetCmd toyset;
    explain.common.seed = identify.common.seed = evaluate.common.seed = sanity.common.seed = seed;
    toyset.config.seed = seed;
    auto* explain_app = explain.attach(app);
    auto* identify_app = identify.attach(app);
    auto* evaluate_app = evaluate.attach(app);
    auto* sanity_app = sanity.attach(app);
    auto* toyset_app = toyset.attach(app);

    std::string manifest_path;
    std::string rerun_out;
    auto* rerun_app = app.add_subcommand("rerun", "Repeat a run from its run-manifest.json");
    rerun_app->add_option("manifest", manifest_path, "Path to run-manifest.json")->required();
    rerun_app->add_option("--out-dir", rerun_out, "Write to this directory instead");

    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    set_worker_count(workers);
    try {
        if (*explain_app) return explain.run(*explain_app);
        if (*identify_app) return identify.run(*identify_app);
        if (*evaluate_app) return evaluate.run(*evaluate_app);
        if (*sanity_app) return sanity.run(*sanity_app);
        if (*toyset_app) return toyset.run(*toyset_app);
        if (*rerun_app) return rerun(manifest_path, rerun_out);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    return run(std::vector<std::string>(argv, argv + argc));
}
