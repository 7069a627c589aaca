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

#include <cmath>
#include <random>

#include "psrc/halfband.hpp"

#include "oracles.hpp"

using namespace psrc;

namespace {

std::vector<double> quantized_as_real(const HalfbandCoeffs& c) {
    std::vector<double> t(c.quantized.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = static_cast<double>(c.quantized[i]) / c.quant_scale();
    return t;
}

double worst_stopband_db(const std::vector<double>& taps, double tw) {
    double worst = -1e300;
    for (int i = 0; i <= 4096; ++i) {
        const double f = (0.25 + tw) + (0.25 - tw) * i / 4096;
        worst = std::max(worst, fir_magnitude_response_db(taps, f));
    }
    return -worst;
}

} // namespace

TEST_CASE("designed halfband satisfies the exact structure") {
    for (const int order : {122, 238, 14}) {
        const auto c = design_halfband(
            HalfbandSpec{order / 2, order == 238 ? 0.015 : (order == 14 ? 0.11 : 0.03),
                         order == 14 ? 40.0 : 70.0, 16});
        const int n = c.half_order();
        REQUIRE(static_cast<int>(c.taps.size()) == order + 1);
        CHECK(c.taps[static_cast<std::size_t>(n)] == 0.5);
        for (int d = 1; d <= n; ++d) {
            CHECK(c.taps[static_cast<std::size_t>(n - d)] ==
                  c.taps[static_cast<std::size_t>(n + d)]);
            if (d % 2 == 0)
                CHECK(c.taps[static_cast<std::size_t>(n + d)] == 0.0);
        }
        CHECK_NOTHROW(validate_halfband_structure(c));
        // adjacent odd taps mirror: h(N+1) == h(N-1)
        CHECK(c.taps[static_cast<std::size_t>(n + 1)] == c.taps[static_cast<std::size_t>(n - 1)]);
    }
}

TEST_CASE("design meets the order-122 attenuation target and unit DC gain") {
    const auto c = design_halfband(HalfbandSpec{61, 0.03, 70.0, 16});
    CHECK(c.measured_stopband_db >= 70.0);
    // independent measurement over the stopband grid
    CHECK(worst_stopband_db(c.taps, 0.03) >= 70.0);

    long double sum = 0.0L;
    for (const auto t : c.taps)
        sum += t;
    CHECK(std::fabs(static_cast<double>(sum) - 1.0) <= 1e-12);
}

TEST_CASE("infeasible designs are rejected with the achieved value") {
    try {
        design_halfband(HalfbandSpec{10, 0.005, 70.0, 16});
        FAIL("expected design_infeasible");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::design_infeasible);
        CHECK(std::string(e.what()).find("achieves only") != std::string::npos);
    }
}

TEST_CASE("quantization: center scale, preserved zeros, degradation bound") {
    const auto c = design_halfband(HalfbandSpec{61, 0.03, 70.0, 16});
    CHECK(c.quant_scale() == 32768);
    CHECK(c.quantized[static_cast<std::size_t>(c.half_order())] == 16384); // 0.5 * 2^15
    for (int d = 2; d <= c.half_order(); d += 2) {
        CHECK(c.quantized[static_cast<std::size_t>(c.half_order() + d)] == 0);
        CHECK(c.quantized[static_cast<std::size_t>(c.half_order() - d)] == 0);
    }
    const double atten_float = worst_stopband_db(c.taps, 0.03);
    const double atten_quant = worst_stopband_db(quantized_as_real(c), 0.03);
    CHECK(atten_float - atten_quant <= 6.0);
    CHECK(atten_quant >= 64.0);

    HalfbandCoeffs big;
    big.taps = {2.0, 0.5, 2.0}; // center would overflow the scale
    CHECK_THROWS_AS(quantize_coeffs(big, 16), Error);
}

TEST_CASE("serial FIR against the naive convolution") {
    FirState<double> st;
    const auto ident = serial_fir({{1.5, -2.0, 7.0}, 1.0}, std::vector<double>{1.0}, st);
    CHECK(ident.samples == std::vector<double>{1.5, -2.0, 7.0});

    FirState<double> st2;
    const auto sum2 = serial_fir({{1, 2, 3}, 1.0}, std::vector<double>{1.0, 1.0}, st2);
    CHECK(sum2.samples == std::vector<double>{1.0, 3.0, 5.0});

    std::mt19937_64 rng(51);
    for (int i = 0; i < 20; ++i) {
        const auto x = oracle::random_real(300 + rng() % 100, rng());
        const auto h = oracle::random_real(1 + rng() % 40, rng());
        FirState<double> state;
        const auto got = serial_fir({x, 1.0}, h, state);
        const auto want = oracle::naive_fir(x, h);
        REQUIRE(got.samples.size() == want.size());
        for (std::size_t k = 0; k < want.size(); ++k)
            CHECK(got.samples[k] == doctest::Approx(want[k]).epsilon(1e-14));
    }

    // streaming in blocks equals one-shot
    {
        const auto x = oracle::random_real(1000, 77);
        const auto h = oracle::random_real(31, 78);
        FirState<double> one, two;
        const auto whole = serial_fir({x, 1.0}, h, one);
        std::vector<double> pieced;
        for (std::size_t at = 0; at < x.size(); at += 137) {
            const std::size_t len = std::min<std::size_t>(137, x.size() - at);
            std::vector<double> chunk(x.begin() + static_cast<std::ptrdiff_t>(at),
                                      x.begin() + static_cast<std::ptrdiff_t>(at + len));
            const auto part = serial_fir({chunk, 1.0}, h, two);
            pieced.insert(pieced.end(), part.samples.begin(), part.samples.end());
        }
        CHECK(pieced == whole.samples);
    }
}

TEST_CASE("fixed serial FIR matches the integer oracle") {
    std::mt19937_64 rng(53);
    const auto c = design_halfband(HalfbandSpec{15, 0.06, 50.0, 16});
    for (int i = 0; i < 10; ++i) {
        const auto x = oracle::random_fixed(500, 16, rng());
        FirState<std::int64_t> st;
        const auto got = serial_fir_fixed({x, 1.0}, c.quantized, c.coeff_width, 16, st);
        const auto want = oracle::naive_fir_fixed(x, c.quantized, c.coeff_width, 16);
        CHECK(got.samples == want);
    }
}

TEST_CASE("parallel FIR step is bit-identical to the serial FIR") {
    // h=[1]: identity frame by frame
    {
        FirState<double> ist;
        std::vector<double> io(3);
        parallel_fir_step(std::vector<double>{4.0, -1.5, 2.0}, io, std::vector<double>{1.0}, ist);
        CHECK(io == std::vector<double>{4.0, -1.5, 2.0});
    }

    // hand example: L=2, h=[1,1]
    FirState<double> st;
    std::vector<double> out(2);
    parallel_fir_step(std::vector<double>{1, 2}, out, std::vector<double>{1.0, 1.0}, st);
    CHECK(out == std::vector<double>{1.0, 3.0});
    parallel_fir_step(std::vector<double>{3, 4}, out, std::vector<double>{1.0, 1.0}, st);
    CHECK(out == std::vector<double>{5.0, 7.0});

    std::mt19937_64 rng(57);
    for (const int lanes : {2, 4, 8}) {
        const auto x = oracle::random_real(64 * static_cast<std::size_t>(lanes), rng());
        const auto h = oracle::random_real(23, rng());
        FirState<double> serial_state, step_state;
        const auto serial = serial_fir({x, 1.0}, h, serial_state);
        std::vector<double> stepped;
        for (std::size_t at = 0; at < x.size(); at += static_cast<std::size_t>(lanes)) {
            std::vector<double> frame(x.begin() + static_cast<std::ptrdiff_t>(at),
                                      x.begin() + static_cast<std::ptrdiff_t>(at + lanes));
            std::vector<double> o(static_cast<std::size_t>(lanes));
            parallel_fir_step(frame, o, h, step_state);
            stepped.insert(stepped.end(), o.begin(), o.end());
        }
        CHECK(stepped == serial.samples); // bitwise: identical accumulation order

        // fixed flavor
        const auto c = design_halfband(HalfbandSpec{9, 0.08, 40.0, 12});
        const auto xi = oracle::random_fixed(64 * static_cast<std::size_t>(lanes), 12, rng());
        FirState<std::int64_t> fs, fstep;
        const auto sfix = serial_fir_fixed({xi, 1.0}, c.quantized, c.coeff_width, 12, fs);
        std::vector<std::int64_t> stepped_fix;
        for (std::size_t at = 0; at < xi.size(); at += static_cast<std::size_t>(lanes)) {
            std::vector<std::int64_t> frame(xi.begin() + static_cast<std::ptrdiff_t>(at),
                                            xi.begin() + static_cast<std::ptrdiff_t>(at + lanes));
            std::vector<std::int64_t> o(static_cast<std::size_t>(lanes));
            parallel_fir_step_fixed(frame, o, c.quantized, c.coeff_width, 12, fstep);
            stepped_fix.insert(stepped_fix.end(), o.begin(), o.end());
        }
        CHECK(stepped_fix == sfix.samples);
    }
}

TEST_CASE("two-path decimator equals direct FIR then keep-every-other") {
    const auto c = design_halfband(HalfbandSpec{61, 0.03, 70.0, 16});

    // impulse: decimated impulse response is the even-index taps
    {
        SerialStream<double> imp;
        imp.sample_rate_hz = 2.0;
        imp.samples.assign(200, 0.0);
        imp.samples[0] = 1.0;
        TwoPathState<double> st;
        const auto y = halfband_decimate_two_path(imp, c, st);
        for (std::size_t m = 0; 2 * m < c.taps.size(); ++m)
            CHECK(y.samples[m] == doctest::Approx(c.taps[2 * m]).epsilon(1e-15));
    }

    // DC: unit gain
    {
        SerialStream<double> dc;
        dc.sample_rate_hz = 2.0;
        dc.samples.assign(400, 1.0);
        TwoPathState<double> st;
        const auto y = halfband_decimate_two_path(dc, c, st);
        CHECK(y.samples.back() == doctest::Approx(1.0).epsilon(1e-12));
    }

    // float: against serial_fir + decimate, 1 ulp at the stream peak
    std::mt19937_64 rng(61);
    {
        const auto x = oracle::random_real(10000, rng());
        TwoPathState<double> st;
        const auto got = halfband_decimate_two_path({x, 1.0}, c, st);
        FirState<double> fs;
        const auto full = serial_fir({x, 1.0}, c.taps, fs);
        double peak = 0.0;
        for (const auto v : full.samples)
            peak = std::max(peak, std::fabs(v));
        const double ulp = std::nextafter(peak, 2.0 * peak) - peak;
        REQUIRE(got.samples.size() == (x.size() + 1) / 2);
        for (std::size_t m = 0; m < got.samples.size(); ++m)
            CHECK(std::fabs(got.samples[m] - full.samples[2 * m]) <= ulp);
    }

    // fixed: bit-exact, serial and block forms
    for (const int lanes : {2, 4, 8}) {
        const auto xi = oracle::random_fixed(4096, 16, rng());
        const auto want = [&] {
            const auto filt = oracle::naive_fir_fixed(xi, c.quantized, c.coeff_width, 16);
            std::vector<std::int64_t> keep;
            for (std::size_t k = 0; k < filt.size(); k += 2)
                keep.push_back(filt[k]);
            return keep;
        }();
        TwoPathState<std::int64_t> st;
        const auto serial = halfband_decimate_two_path_fixed({xi, 1.0}, c, 16, st);
        CHECK(serial.samples == want);

        TwoPathState<std::int64_t> bst;
        const SerialStream<std::int64_t> xis{xi, 1.0};
        const auto block =
            halfband_decimate_two_path_fixed(serial_to_parallel(xis, lanes), c, 16, bst);
        CHECK(parallel_to_serial(block).samples == want);
        CHECK(block.lanes() == lanes / 2);
    }

    // odd lane counts are rejected in block mode
    TwoPathState<std::int64_t> st;
    const auto odd = serial_to_parallel<std::int64_t>({{1, 2, 3}, 1.0}, 3);
    CHECK_THROWS_AS(halfband_decimate_two_path_fixed(odd, c, 16, st), Error);
}

TEST_CASE("two-path evaluation multiplication count") {
    for (const int order : {122, 124, 238}) {
        const auto c = design_halfband(HalfbandSpec{order / 2, 0.03, 55.0, 16});
        const int n = c.half_order();
        const int expected_per_output = (n + 1) / 2;
        // matches ceil((2N+1)/4) for odd N and N/2 for even N
        if (n % 2 == 1)
            CHECK(expected_per_output == (2 * n + 1 + 3) / 4);
        else
            CHECK(expected_per_output == n / 2);

        const auto x = oracle::random_fixed(2000, 16, 71);
        TwoPathState<std::int64_t> st;
        const auto y = halfband_decimate_two_path_fixed({x, 1.0}, c, 16, st);
        CHECK(st.multiplications ==
              static_cast<std::uint64_t>(expected_per_output) * y.samples.size());
    }
}

TEST_CASE("FIR magnitude response") {
    CHECK(fir_magnitude_response_db(std::vector<double>{1.0}, 0.123) == doctest::Approx(0.0));
    CHECK(fir_magnitude_response_db(std::vector<double>{0.5, 0.5}, 0.5) == -300.0);

    const auto c = design_halfband(HalfbandSpec{61, 0.03, 70.0, 16});
    CHECK(fir_magnitude_response_db(c.taps, 0.25) == doctest::Approx(-6.0206).epsilon(1e-4));

    // fast amplitude path agrees with the generic evaluator
    for (const double f : {0.01, 0.1, 0.24, 0.3, 0.49}) {
        const double fast = 20.0 * std::log10(std::fabs(halfband_amplitude(c, f)));
        const double generic = fir_magnitude_response_db(c.taps, f);
        CHECK(fast == doctest::Approx(generic).epsilon(1e-9));
    }
}

TEST_CASE("power complementarity about f = 0.25 in the passband") {
    const auto c = design_halfband(HalfbandSpec{61, 0.03, 70.0, 16});
    for (int i = 0; i <= 512; ++i) {
        const double f = 0.22 * i / 512;
        const double a = halfband_amplitude(c, f);
        const double b = halfband_amplitude(c, 0.5 - f);
        const double sum_db = 10.0 * std::log10(a * a + b * b);
        CHECK(std::fabs(sum_db) <= 0.1);
    }
}
