/*
 * Copyright 2026 the psrc authors
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
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

#include "psrc/cic.hpp"
#include "psrc/halfband.hpp"
#include "psrc/pipeline.hpp"
#include "psrc/stream.hpp"

using namespace psrc;

namespace {

SerialStream<std::int64_t> random_stream(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int64_t> dist(-32768, 32767);
    SerialStream<std::int64_t> s;
    s.sample_rate_hz = 20e6;
    s.samples.resize(n);
    for (auto& v : s.samples)
        v = dist(rng);
    return s;
}

void BM_SerialCicPush(benchmark::State& state) {
    const CicConfig cfg{5, 20, 1, 16, 16};
    const auto in = random_stream(1 << 20, 1);
    for (auto _ : state) {
        BasicSerialCic<std::uint64_t> cic(cfg);
        std::int64_t y = 0;
        std::int64_t sink = 0;
        for (const auto v : in.samples)
            if (cic.push(v, y))
                sink ^= y;
        benchmark::DoNotOptimize(sink);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(in.samples.size()));
}
BENCHMARK(BM_SerialCicPush);

void BM_ParallelCicBatch(benchmark::State& state) {
    const CicConfig cfg{5, 20, 1, 16, 16};
    const auto lanes = static_cast<int>(state.range(0));
    const auto packed = serial_to_parallel(random_stream(1 << 20, 2), lanes);
    for (auto _ : state) {
        auto out = run_parallel_cic(packed, cfg);
        benchmark::DoNotOptimize(out.flat().data());
    }
    state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << 20));
}
BENCHMARK(BM_ParallelCicBatch)->Arg(8)->Arg(80);

void BM_HalfbandDirectFir(benchmark::State& state) {
    const auto c = design_halfband(HalfbandSpec{61, 0.03, 70.0, 16});
    const auto in = random_stream(1 << 18, 3);
    for (auto _ : state) {
        FirState<std::int64_t> fs;
        auto out = serial_fir_fixed(in, c.quantized, c.coeff_width, 16, fs);
        benchmark::DoNotOptimize(out.samples.data());
    }
    state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << 18));
}
BENCHMARK(BM_HalfbandDirectFir);

void BM_HalfbandTwoPath(benchmark::State& state) {
    const auto c = design_halfband(HalfbandSpec{61, 0.03, 70.0, 16});
    const auto in = random_stream(1 << 18, 4);
    for (auto _ : state) {
        TwoPathState<std::int64_t> st;
        auto out = halfband_decimate_two_path_fixed(in, c, 16, st);
        benchmark::DoNotOptimize(out.samples.data());
    }
    state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << 18));
}
BENCHMARK(BM_HalfbandTwoPath);

void BM_RunSrc(benchmark::State& state) {
    const auto factor = static_cast<std::int64_t>(state.range(0));
    const auto cfg = SrcConfig::make_default(factor, NumericKind::fixed);
    const auto packed = serial_to_parallel(random_stream(1 << 20, 5), 80);
    for (auto _ : state) {
        auto out = run_src(packed, cfg);
        benchmark::DoNotOptimize(out.samples.data());
    }
    state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << 20));
}
BENCHMARK(BM_RunSrc)->Arg(80)->Arg(1600);

} // namespace

BENCHMARK_MAIN();
