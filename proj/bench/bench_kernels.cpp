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

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "saliex/kernels.hpp"
#include "saliex/maskgen.hpp"
#include "saliex/parallel.hpp"

using namespace saliex;

namespace {

constexpr int kSize = 112;
constexpr int kBatch = 64;

Image noise_image(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    Image img(kSize, kSize, 3);
    for (float& v : img.pixels()) v = u(rng);
    return img;
}

std::vector<Mask> masks() {
    MaskGenConfig config;
    config.num_masks = kBatch;
    return generate_mask_range(config, kSize, kSize, 1, 0, kBatch);
}

template <auto Kernel>
void BM_mask_batch(benchmark::State& state) {
    set_worker_count(static_cast<int>(state.range(0)));
    const Image img = noise_image(1);
    const auto m = masks();
    std::vector<Image> out(kBatch);
    for (auto _ : state) {
        Kernel(img, m, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * kBatch);
}

template <auto Kernel>
void BM_project_batch(benchmark::State& state) {
    set_worker_count(static_cast<int>(state.range(0)));
    std::vector<Image> images;
    for (int i = 0; i < 16; ++i) images.push_back(noise_image(i));
    std::vector<float> weights(static_cast<std::size_t>(128) * kSize * kSize * 3, 0.01f);
    std::vector<std::vector<float>> out;
    for (auto _ : state) {
        Kernel(images, weights, 128, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * 16);
}

template <auto Kernel>
void BM_accumulate_moments(benchmark::State& state) {
    set_worker_count(static_cast<int>(state.range(0)));
    const auto m = masks();
    const std::vector<ScoreList> scores(2, ScoreList(kBatch, 0.5));
    const std::vector<double> shifts = {0.1, 0.2};
    kernels::MomentSums sums(kSize * kSize, 2);
    for (auto _ : state) {
        Kernel(m, scores, shifts, sums);
        benchmark::DoNotOptimize(sums.sum_ms.data());
    }
    state.SetItemsProcessed(state.iterations() * kBatch);
}

template <auto Kernel>
void BM_gaussian_blur(benchmark::State& state) {
    set_worker_count(static_cast<int>(state.range(0)));
    SaliencyMap map(kSize, kSize);
    std::mt19937_64 rng(3);
    std::normal_distribution<float> n;
    for (float& v : map.values()) v = n(rng);
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(map, 4.0));
}

}  // namespace

BENCHMARK(BM_mask_batch<kernels::serial::mask_batch>)->Arg(1);
BENCHMARK(BM_mask_batch<kernels::omp::mask_batch>)->Arg(1)->Arg(0);
BENCHMARK(BM_project_batch<kernels::serial::project_batch>)->Arg(1);
BENCHMARK(BM_project_batch<kernels::omp::project_batch>)->Arg(1)->Arg(0);
BENCHMARK(BM_accumulate_moments<kernels::serial::accumulate_moments>)->Arg(1);
BENCHMARK(BM_accumulate_moments<kernels::omp::accumulate_moments>)->Arg(1)->Arg(0);
BENCHMARK(BM_gaussian_blur<kernels::serial::gaussian_blur>)->Arg(1);
BENCHMARK(BM_gaussian_blur<kernels::omp::gaussian_blur>)->Arg(1)->Arg(0);

BENCHMARK_MAIN();
