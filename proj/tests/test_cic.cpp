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
#include <doctest.h>

#include <bit>
#include <random>
#include <tuple>

#include "psrc/cic.hpp"

#include "oracles.hpp"

using namespace psrc;

namespace {

SerialStream<std::int64_t> make_stream(std::vector<std::int64_t> v) {
    return {std::move(v), 1e6};
}

} // namespace

TEST_CASE("adder matrix computes lane prefix sums") {
    const auto m4 = build_adder_matrix(4);
    std::vector<std::int64_t> frame{1, 2, 3, 4};
    m4.apply(std::span<std::int64_t>{frame});
    CHECK((frame == std::vector<std::int64_t>{1, 3, 6, 10}));

    const auto m1 = build_adder_matrix(1);
    CHECK(m1.levels.empty());
    CHECK(m1.add_node_count() == 0);

    std::mt19937_64 rng(11);
    for (int lanes = 1; lanes <= 128; ++lanes) {
        const auto m = build_adder_matrix(lanes);
        auto frame_rand = oracle::random_fixed(static_cast<std::size_t>(lanes), 16, rng());
        const auto want = oracle::prefix_sums(frame_rand);
        m.apply(std::span<std::int64_t>{frame_rand});
        CHECK(frame_rand == want);
    }
}

TEST_CASE("adder matrix structure follows the recursive two-group build") {
    const auto m = build_adder_matrix(8);
    REQUIRE(m.levels.size() == 3);
    // level d: 8/2^(d+1) blocks of 2^d adds each
    for (std::size_t d = 0; d < 3; ++d) {
        CHECK(m.levels[d].size() == (8u >> (d + 1)));
        for (const auto& b : m.levels[d])
            CHECK(b.dst_end - b.dst_begin == (1 << d));
    }
    CHECK(m.add_node_count() == 12);

    // non-power-of-two: built at 8 lanes, trailing 2 dropped
    const auto m6 = build_adder_matrix(6);
    CHECK(m6.add_node_count() == 7);
    for (const auto& level : m6.levels)
        for (const auto& b : level)
            CHECK(b.dst_end <= 6);

    // power-of-two size: (L/2) * log2(L) adds in log2(L) levels
    for (const int lanes : {16, 32, 64, 128}) {
        const auto mp = build_adder_matrix(lanes);
        const auto depth = static_cast<std::size_t>(std::countr_zero(
            static_cast<unsigned>(lanes)));
        CHECK(mp.levels.size() == depth);
        CHECK(mp.add_node_count() == static_cast<std::size_t>(lanes) / 2 * depth);
    }
}

TEST_CASE("parallel integrator step accumulates across frames") {
    const auto m = build_adder_matrix(4);
    IntegratorState st;
    std::vector<uint128> in{1, 1, 1, 1}, out(4);
    parallel_integrate_step(in, out, m, st, 32);
    CHECK(static_cast<std::int64_t>(out[0]) == 1);
    CHECK(static_cast<std::int64_t>(out[3]) == 4);
    CHECK(static_cast<std::int64_t>(st.accum) == 4);
    parallel_integrate_step(in, out, m, st, 32);
    CHECK(static_cast<std::int64_t>(out[0]) == 5);
    CHECK(static_cast<std::int64_t>(out[3]) == 8);

    std::vector<uint128> bad(3);
    CHECK_THROWS_AS(parallel_integrate_step(bad, out, m, st, 32), Error);
}

TEST_CASE("parallel comb step differences against flat history") {
    CombState st;
    st.delay = {3}; // previous frame's last lane
    std::vector<uint128> in{5, 7, 9, 11}, out(4);
    parallel_comb_step(in, out, st, 1, 32);
    for (int l = 0; l < 4; ++l)
        CHECK(static_cast<std::int64_t>(out[static_cast<std::size_t>(l)]) == 2);
    CHECK(static_cast<std::int64_t>(st.delay[0]) == 11);

    CombState first; // zero pre-history
    std::vector<uint128> f{4, 4}, o(2);
    parallel_comb_step(f, o, first, 1, 32);
    CHECK(static_cast<std::int64_t>(o[0]) == 4);
    CHECK(static_cast<std::int64_t>(o[1]) == 0);
}

TEST_CASE("parallel downsampler keeps flat indices 0 mod R") {
    SerialStream<std::int64_t> s{{0, 1, 2, 3, 4, 5, 6, 7}, 8.0};
    const auto p = serial_to_parallel(s, 4);
    const auto d = parallel_downsample(p, 2);
    CHECK(d.lanes() == 2);
    CHECK((parallel_to_serial(d).samples == std::vector<std::int64_t>{0, 2, 4, 6}));

    const auto ident = parallel_downsample(p, 1);
    CHECK(parallel_to_serial(ident).samples == s.samples);

    std::mt19937_64 rng(5);
    for (const int lanes : {3, 6, 8, 80}) {
        for (const int r : {2, 3, 20, 7}) {
            SerialStream<std::int64_t> in;
            in.sample_rate_hz = 1e6;
            in.samples = oracle::random_fixed(1000 + rng() % 100, 16, rng());
            const auto dp = parallel_downsample(serial_to_parallel(in, lanes), r);
            std::vector<std::int64_t> want;
            for (std::size_t k = 0; k < in.samples.size(); k += static_cast<std::size_t>(r))
                want.push_back(in.samples[k]);
            CHECK(parallel_to_serial(dp).samples == want);
            CHECK(dp.lanes() == (lanes + r - 1) / r);
        }
    }
}

TEST_CASE("serial CIC: trivial configurations") {
    // N=1, R=1, M=1 is the identity
    const auto id = run_serial_cic(make_stream({5, -3, 12, 0, -32768, 32767}), CicConfig{1, 1, 1});
    CHECK((id.samples == std::vector<std::int64_t>{5, -3, 12, 0, -32768, 32767}));

    // DC gain: unit-normalized output equals the input in steady state
    CicConfig cfg{3, 4, 2, 16, 16};
    std::vector<std::int64_t> dc(200, 1234);
    const auto out = run_serial_cic(make_stream(dc), cfg);
    CHECK(out.samples.back() == 1234);
}

TEST_CASE("one CIC stage is a moving sum of R*M ones") {
    // impulse through N=1: unrounded response is RM ones; unit-normalized
    // output rounds each to round(1/(RM) * RM * x) with x the impulse.
    CicConfig cfg{1, 1, 4, 16, 16}; // R=1 keeps every sample
    std::vector<std::int64_t> x(12, 0);
    x[0] = 4000;
    const auto y = run_serial_cic(make_stream(x), cfg);
    // moving sum of 4 ones scaled by 1/4 -> 1000 for four samples
    CHECK((y.samples == std::vector<std::int64_t>{1000, 1000, 1000, 1000, 0, 0, 0, 0, 0, 0, 0, 0}));
}

TEST_CASE("serial CIC matches the brute-force boxcar cascade") {
    std::mt19937_64 rng(17);
    for (const auto& [n, r, m] : {std::tuple{5, 20, 1}, {3, 7, 2}, {1, 1, 1}, {2, 3, 1}}) {
        const auto x = oracle::random_fixed(4000, 16, rng());
        const auto got = run_serial_cic(make_stream(x), CicConfig{n, r, m, 16, 16});
        const auto want = oracle::boxcar_cic(x, n, r, m, 16);
        REQUIRE(got.samples.size() == want.size());
        CHECK(got.samples == want);
    }
}

TEST_CASE("wrap width is sufficient: modular datapath equals wide reference") {
    // narrow input so the internal width is small and wraps constantly
    std::mt19937_64 rng(23);
    for (const auto& [n, r, m, w] : {std::tuple{2, 3, 1, 4}, {3, 2, 2, 5}, {1, 7, 1, 3}}) {
        const auto x = oracle::random_fixed(3000, w, rng());
        CicConfig cfg{n, r, m, w, w};
        const auto got = run_serial_cic({x, 1.0}, cfg);
        const auto want = oracle::boxcar_cic(x, n, r, m, w);
        CHECK(got.samples == want);
    }
}

TEST_CASE("parallel CIC output is bit-identical to the serial oracle") {
    std::mt19937_64 rng(31);
    for (const int lanes : {1, 2, 4, 6, 8, 80}) {
        for (const auto& [n, r, m] : {std::tuple{5, 20, 1}, {3, 2, 2}, {1, 1, 1}, {4, 7, 1}}) {
            const CicConfig cfg{n, r, m, 16, 16};
            SerialStream<std::int64_t> in;
            in.sample_rate_hz = 1e6;
            in.samples = oracle::random_fixed(5000 + rng() % 160, 16, rng());
            const auto serial = run_serial_cic(in, cfg);
            const auto parallel = run_parallel_cic(serial_to_parallel(in, lanes), cfg);
            const auto flat = parallel_to_serial(parallel);
            REQUIRE(flat.samples.size() == serial.samples.size());
            CHECK(flat.samples == serial.samples);
            CHECK(parallel.lanes() == (lanes + r - 1) / r);
        }
    }
}

TEST_CASE("parallel CIC handles the wide-accumulator path (R > 1024)") {
    const CicConfig cfg{5, 2048, 1, 16, 16}; // internal width 71 bits
    REQUIRE(cfg.internal_width() > 64);
    std::mt19937_64 rng(37);
    SerialStream<std::int64_t> in;
    in.sample_rate_hz = 1e6;
    in.samples = oracle::random_fixed(3 * 2048 + 123, 16, rng());
    const auto serial = run_serial_cic(in, cfg);
    const auto parallel = parallel_to_serial(run_parallel_cic(serial_to_parallel(in, 16), cfg));
    CHECK(parallel.samples == serial.samples);
}

TEST_CASE("step-composed parallel CIC equals the batched engine") {
    // compose the public per-frame ops exactly as the datapath describes
    const CicConfig cfg{3, 4, 2, 16, 16};
    const int lanes = 8;
    std::mt19937_64 rng(41);
    SerialStream<std::int64_t> in;
    in.sample_rate_hz = 1e6;
    in.samples = oracle::random_fixed(4096, 16, rng());

    const auto matrix = build_adder_matrix(lanes);
    const int width = cfg.internal_width();
    auto state = CicState::make(cfg);

    auto p = serial_to_parallel(in, lanes);
    ParallelStream<uint128> wide(lanes, p.lane_rate_hz());
    for (std::size_t f = 0; f < p.frame_count(); ++f) {
        std::vector<uint128> frame(p.frame(f).begin(), p.frame(f).end());
        std::vector<uint128> out(static_cast<std::size_t>(lanes));
        for (int s = 0; s < cfg.stages; ++s) {
            parallel_integrate_step(frame, out, matrix,
                                    state.integrators[static_cast<std::size_t>(s)], width);
            frame = out;
        }
        const std::size_t remaining = in.samples.size() - f * static_cast<std::size_t>(lanes);
        wide.push_frame(frame, std::min<std::size_t>(remaining, static_cast<std::size_t>(lanes)));
    }
    auto down = parallel_downsample(wide, cfg.decimation);
    ParallelStream<uint128> combed(down.lanes(), down.lane_rate_hz());
    {
        std::size_t left = down.valid_count();
        for (std::size_t f = 0; f < down.frame_count(); ++f) {
            std::vector<uint128> frame(down.frame(f).begin(), down.frame(f).end());
            std::vector<uint128> out(frame.size());
            for (int s = 0; s < cfg.stages; ++s) {
                parallel_comb_step(frame, out, state.combs[static_cast<std::size_t>(s)],
                                   cfg.diff_delay, width);
                frame = out;
            }
            combed.push_frame(frame, std::min<std::size_t>(left, frame.size()));
            left -= std::min<std::size_t>(left, frame.size());
        }
    }
    const CicRounder rounder(cfg);
    std::vector<std::int64_t> stepped;
    for (std::size_t i = 0; i < combed.valid_count(); ++i)
        stepped.push_back(rounder.round(combed.flat()[i]));

    const auto batched = parallel_to_serial(run_parallel_cic(p, cfg));
    CHECK(stepped == batched.samples);
}

TEST_CASE("CIC magnitude response") {
    const CicConfig cfg{5, 20, 1, 16, 16};
    CHECK(cic_magnitude_response_db(cfg, 0.0) == 0.0);
    CHECK(cic_magnitude_response_db(cfg, 1.0 / 20.0) == -300.0); // first null

    // closed form against the DFT of the brute-force impulse response
    std::vector<double> h(200, 0.0);
    h[0] = 1.0;
    for (int s = 0; s < cfg.stages; ++s) {
        std::vector<double> next(h.size(), 0.0);
        for (std::size_t n = 0; n < h.size(); ++n)
            for (std::size_t j = (n >= 19 ? n - 19 : 0); j <= n; ++j)
                next[n] += h[j];
        h = std::move(next);
    }
    for (auto& v : h)
        v /= std::pow(20.0, 5);
    for (const double f : {0.001, 0.0123, 0.21}) {
        const double want = oracle::dft_db(h, f);
        const double got = cic_magnitude_response_db(cfg, f);
        CHECK(got == doctest::Approx(want).epsilon(1e-11));
    }
}

TEST_CASE("CIC config validation") {
    CHECK_THROWS_AS((CicConfig{0, 1, 1}).validate(), Error);
    CHECK_THROWS_AS((CicConfig{5, 0, 1}).validate(), Error);
    CHECK_THROWS_AS((CicConfig{5, 4000, 2, 64, 16}).validate(), Error); // width > 126
    CHECK_NOTHROW((CicConfig{5, 4000, 2, 16, 16}).validate());          // 81 bits
    CHECK_THROWS_AS(run_serial_cic(make_stream({40000}), CicConfig{1, 1, 1, 16, 16}), Error);
}
