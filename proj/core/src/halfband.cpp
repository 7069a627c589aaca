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
#include "psrc/halfband.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "psrc/fixed.hpp"

namespace psrc {

namespace {

double bessel_i0(double x) {
    // power series; converges quickly for the beta range of interest
    double sum = 1.0, term = 1.0;
    const double y = x * x / 4.0;
    for (int k = 1; k < 200; ++k) {
        term *= y / (static_cast<double>(k) * k);
        sum += term;
        if (term < sum * 1e-18)
            break;
    }
    return sum;
}

double kaiser_beta(double atten_db) {
    if (atten_db > 50.0)
        return 0.1102 * (atten_db - 8.7);
    if (atten_db >= 21.0)
        return 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);
    return 0.0;
}

/// Zero-phase amplitude of a halfband filter (center-referenced):
/// A(f) = 0.5 + sum_p 2 h(N+2p+1) cos(2 pi f (2p+1)).
double halfband_amplitude(const std::vector<double>& taps, double f) {
    const int n = (static_cast<int>(taps.size()) - 1) / 2;
    double a = 0.5;
    for (int d = 1; d <= n; d += 2)
        a += 2.0 * taps[static_cast<std::size_t>(n + d)] * std::cos(2.0 * M_PI * f * d);
    return a;
}

double to_db(double mag) {
    if (mag <= 1e-300)
        return -300.0;
    return std::max(20.0 * std::log10(mag), -300.0);
}

struct BandStats {
    double ripple_db;  // peak-to-peak over the passband
    double stopband_db; // worst-case rejection over the stopband
};

BandStats measure_halfband(const std::vector<double>& taps, double tw) {
    const double pe = 0.25 - tw;
    const double se = 0.25 + tw;
    constexpr int kPb = 4096, kSb = 8192;
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i <= kPb; ++i) {
        const double db = to_db(std::fabs(halfband_amplitude(taps, pe * i / kPb)));
        lo = std::min(lo, db);
        hi = std::max(hi, db);
    }
    double worst = -1e300;
    for (int i = 0; i <= kSb; ++i) {
        const double f = se + (0.5 - se) * i / kSb;
        worst = std::max(worst, to_db(std::fabs(halfband_amplitude(taps, f))));
    }
    return {hi - lo, -worst};
}

std::int32_t round_half_up_i32(double v) {
    return static_cast<std::int32_t>(std::floor(v + 0.5));
}

} // namespace

void HalfbandSpec::validate() const {
    if (half_order < 1)
        throw Error(Errc::invalid_config, "halfband half-order must be >= 1");
    if (!(transition_width > 0.0) || !(transition_width < 0.25))
        throw Error(Errc::invalid_config, "halfband transition width must be in (0, 0.25)");
    if (!(stopband_atten_db > 0.0))
        throw Error(Errc::invalid_config, "halfband stopband attenuation must be positive");
    if (coeff_width < 2 || coeff_width > 31)
        throw Error(Errc::invalid_config, "halfband coefficient width out of range [2, 31]");
}

HalfbandCoeffs design_halfband(const HalfbandSpec& spec) {
    spec.validate();
    const int n = spec.half_order;
    const double beta = kaiser_beta(spec.stopband_atten_db);
    const double i0_beta = bessel_i0(beta);

    std::vector<double> taps(static_cast<std::size_t>(2 * n + 1), 0.0);
    taps[static_cast<std::size_t>(n)] = 0.5;
    double side_sum = 0.0;
    for (int d = 1; d <= n; d += 2) {
        // ideal halfband: 0.5 sinc(d/2) = sin(pi d/2)/(pi d), sign (-1)^((d-1)/2)
        const double ideal = (d % 4 == 1 ? 1.0 : -1.0) / (M_PI * d);
        const double r = static_cast<double>(d) / n;
        const double w = bessel_i0(beta * std::sqrt(1.0 - r * r)) / i0_beta;
        const double t = ideal * w;
        taps[static_cast<std::size_t>(n + d)] = t;
        side_sum += t;
    }
    // rescale the odd taps for exactly unit DC gain (0.5 + 2*side = 1)
    const double scale = 0.25 / side_sum;
    for (int d = 1; d <= n; d += 2) {
        taps[static_cast<std::size_t>(n + d)] *= scale;
        taps[static_cast<std::size_t>(n - d)] = taps[static_cast<std::size_t>(n + d)];
    }

    const BandStats stats = measure_halfband(taps, spec.transition_width);
    if (stats.stopband_db < spec.stopband_atten_db)
        throw Error(Errc::design_infeasible,
                    "halfband order " + std::to_string(2 * n) + " achieves only " +
                        std::to_string(stats.stopband_db) + " dB of the requested " +
                        std::to_string(spec.stopband_atten_db) + " dB stopband attenuation");

    HalfbandCoeffs c;
    c.taps = std::move(taps);
    c.coeff_width = spec.coeff_width;
    c.transition_width = spec.transition_width;
    c.measured_stopband_db = stats.stopband_db;
    c.measured_ripple_db = stats.ripple_db;
    return quantize_coeffs(c, spec.coeff_width);
}

HalfbandCoeffs quantize_coeffs(const HalfbandCoeffs& c, int bits) {
    if (bits < 2 || bits > 31)
        throw Error(Errc::invalid_config, "coefficient width out of range [2, 31]");
    if (c.taps.empty() || c.taps.size() % 2 == 0)
        throw Error(Errc::invalid_config, "halfband tap vector must have odd length");
    HalfbandCoeffs out = c;
    out.coeff_width = bits;
    const int n = out.half_order();
    const auto scale = static_cast<double>(std::int32_t{1} << (bits - 1));
    const std::int32_t limit = (std::int32_t{1} << (bits - 1)) - 1;
    out.quantized.assign(out.taps.size(), 0);
    for (int d = 0; d <= n; ++d) {
        if (d > 0 && d % 2 == 0)
            continue; // even offsets stay exactly zero
        const std::int32_t q = round_half_up_i32(out.taps[static_cast<std::size_t>(n + d)] * scale);
        if (q > limit || q < -limit - 1)
            throw Error(Errc::invalid_scaling,
                        "coefficient overflows " + std::to_string(bits) + "-bit quantization");
        out.quantized[static_cast<std::size_t>(n + d)] = q;
        out.quantized[static_cast<std::size_t>(n - d)] = q;
    }
    return out;
}

double halfband_amplitude(const HalfbandCoeffs& c, double f) {
    return halfband_amplitude(c.taps, f);
}

void validate_halfband_structure(const HalfbandCoeffs& c) {
    if (c.taps.empty() || c.taps.size() % 2 == 0)
        throw Error(Errc::invalid_config, "halfband tap vector must have odd length");
    const int n = c.half_order();
    if (c.taps[static_cast<std::size_t>(n)] != 0.5)
        throw Error(Errc::invalid_config, "halfband center tap must be exactly 0.5");
    for (int d = 1; d <= n; ++d) {
        const double a = c.taps[static_cast<std::size_t>(n - d)];
        const double b = c.taps[static_cast<std::size_t>(n + d)];
        if (a != b)
            throw Error(Errc::invalid_config, "halfband taps must mirror exactly");
        if (d % 2 == 0 && b != 0.0)
            throw Error(Errc::invalid_config, "halfband even-offset taps must be exactly zero");
    }
    if (!c.quantized.empty()) {
        if (c.quantized.size() != c.taps.size())
            throw Error(Errc::invalid_config, "quantized tap count mismatch");
        if (c.quantized[static_cast<std::size_t>(n)] != (std::int32_t{1} << (c.coeff_width - 2)))
            throw Error(Errc::invalid_config, "quantized center tap must be the exact half scale");
        for (int d = 1; d <= n; ++d) {
            const auto a = c.quantized[static_cast<std::size_t>(n - d)];
            const auto b = c.quantized[static_cast<std::size_t>(n + d)];
            if (a != b || (d % 2 == 0 && b != 0))
                throw Error(Errc::invalid_config, "quantized taps violate halfband structure");
        }
    }
}

double fir_magnitude_response_db(std::span<const double> taps, double f) {
    if (taps.empty())
        throw Error(Errc::invalid_config, "empty coefficient vector");
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t k = 0; k < taps.size(); ++k) {
        const double phi = -2.0 * M_PI * f * static_cast<double>(k);
        acc += taps[k] * std::complex<double>(std::cos(phi), std::sin(phi));
    }
    return to_db(std::abs(acc));
}

std::vector<double> fir_magnitude_response_db(std::span<const double> taps,
                                              std::span<const double> grid) {
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        out[i] = fir_magnitude_response_db(taps, grid[i]);
    return out;
}

namespace {

/// ext = history ++ input; out[n] = sum_k taps[k] ext[hist + n - k].
void fir_block(const double* ext, std::size_t hist, std::size_t count,
               std::span<const double> taps, double* out) {
    for (std::size_t n = 0; n < count; ++n) {
        long double acc = 0.0L;
        for (std::size_t k = 0; k < taps.size(); ++k)
            acc += static_cast<long double>(taps[k]) * ext[hist + n - k];
        out[n] = static_cast<double>(acc);
    }
}

void fir_block_fixed(const std::int64_t* ext, std::size_t hist, std::size_t count,
                     std::span<const std::int32_t> qtaps, int coeff_width, int out_width,
                     std::int64_t* out) {
    for (std::size_t n = 0; n < count; ++n) {
        int128 acc = 0;
        for (std::size_t k = 0; k < qtaps.size(); ++k)
            acc += static_cast<int128>(qtaps[k]) * ext[hist + n - k];
        const int128 rounded = round_half_up_shift(acc, coeff_width - 1);
        out[n] = static_cast<std::int64_t>(sign_extend(static_cast<uint128>(rounded), out_width));
    }
}

template <typename T>
std::vector<T> extend_history(const std::vector<T>& history, std::span<const T> input,
                              std::size_t hist_len) {
    std::vector<T> ext(hist_len + input.size());
    if (history.empty()) {
        std::fill(ext.begin(), ext.begin() + static_cast<std::ptrdiff_t>(hist_len), T{});
    } else {
        if (history.size() != hist_len)
            throw Error(Errc::invalid_frame, "FIR state depth does not match coefficients");
        std::copy(history.begin(), history.end(), ext.begin());
    }
    std::copy(input.begin(), input.end(), ext.begin() + static_cast<std::ptrdiff_t>(hist_len));
    return ext;
}

template <typename T>
void save_history(std::vector<T>& history, const std::vector<T>& ext, std::size_t hist_len) {
    history.assign(ext.end() - static_cast<std::ptrdiff_t>(hist_len), ext.end());
}

/*
 * Two-path halfband kernel: out(m) = 0.5 x(2m-N) + sum_p h(N+2p+1) *
 * [x(2m-N+dp) + x(2m-N-dp)], dp = 2p+1. ext[i] holds x(i - 2N).
 */
void two_path_block(const double* ext, std::size_t count, const HalfbandCoeffs& c, double* out,
                    std::uint64_t& muls) {
    const int n = c.half_order();
    const int pairs = c.pair_count();
    std::uint64_t local = 0;
    for (std::size_t m = 0; m < count; ++m) {
        const std::size_t base = 2 * m + static_cast<std::size_t>(n);
        long double acc = 0.5L * ext[base];
        for (int p = 0; p < pairs; ++p) {
            const int d = 2 * p + 1;
            const long double pair = static_cast<long double>(ext[base - static_cast<std::size_t>(d)]) +
                                     ext[base + static_cast<std::size_t>(d)];
            acc += static_cast<long double>(c.taps[static_cast<std::size_t>(n + d)]) * pair;
        }
        local += static_cast<std::uint64_t>(pairs);
        out[m] = static_cast<double>(acc);
    }
    muls += local;
}

void two_path_block_fixed(const std::int64_t* ext, std::size_t count, const HalfbandCoeffs& c,
                          int out_width, std::int64_t* out, std::uint64_t& muls) {
    const int n = c.half_order();
    const int pairs = c.pair_count();
    const int cw = c.coeff_width;
    std::uint64_t local = 0;
    for (std::size_t m = 0; m < count; ++m) {
        const std::size_t base = 2 * m + static_cast<std::size_t>(n);
        // center tap is exactly 2^(cw-2): a shift, not a multiply
        int128 acc = static_cast<int128>(ext[base]) << (cw - 2);
        for (int p = 0; p < pairs; ++p) {
            const int d = 2 * p + 1;
            const int128 pair = static_cast<int128>(ext[base - static_cast<std::size_t>(d)]) +
                                ext[base + static_cast<std::size_t>(d)];
            acc += pair * c.quantized[static_cast<std::size_t>(n + d)];
        }
        local += static_cast<std::uint64_t>(pairs);
        const int128 rounded = round_half_up_shift(acc, cw - 1);
        out[m] = static_cast<std::int64_t>(sign_extend(static_cast<uint128>(rounded), out_width));
    }
    muls += local;
}

void require_halfband(const HalfbandCoeffs& c, bool need_quantized) {
    if (c.taps.empty() || c.taps.size() % 2 == 0)
        throw Error(Errc::invalid_config, "halfband tap vector must have odd length");
    if (need_quantized && c.quantized.size() != c.taps.size())
        throw Error(Errc::invalid_config, "halfband quantized taps missing");
}

} // namespace

SerialStream<double> serial_fir(const SerialStream<double>& in, std::span<const double> taps,
                                FirState<double>& state) {
    if (taps.empty())
        throw Error(Errc::invalid_config, "empty coefficient vector");
    const std::size_t hist = taps.size() - 1;
    auto ext = extend_history(state.history, std::span<const double>{in.samples}, hist);
    SerialStream<double> out;
    out.sample_rate_hz = in.sample_rate_hz;
    out.samples.resize(in.samples.size());
    fir_block(ext.data(), hist, out.samples.size(), taps, out.samples.data());
    save_history(state.history, ext, hist);
    return out;
}

SerialStream<std::int64_t> serial_fir_fixed(const SerialStream<std::int64_t>& in,
                                            std::span<const std::int32_t> qtaps, int coeff_width,
                                            int out_width, FirState<std::int64_t>& state) {
    if (qtaps.empty())
        throw Error(Errc::invalid_config, "empty coefficient vector");
    const std::size_t hist = qtaps.size() - 1;
    auto ext = extend_history(state.history, std::span<const std::int64_t>{in.samples}, hist);
    SerialStream<std::int64_t> out;
    out.sample_rate_hz = in.sample_rate_hz;
    out.samples.resize(in.samples.size());
    fir_block_fixed(ext.data(), hist, out.samples.size(), qtaps, coeff_width, out_width,
                    out.samples.data());
    save_history(state.history, ext, hist);
    return out;
}

void parallel_fir_step(std::span<const double> frame, std::span<double> out,
                       std::span<const double> taps, FirState<double>& state) {
    if (frame.size() != out.size())
        throw Error(Errc::invalid_frame, "FIR frame size mismatch");
    const std::size_t hist = taps.size() - 1;
    auto ext = extend_history(state.history, frame, hist);
    fir_block(ext.data(), hist, frame.size(), taps, out.data());
    save_history(state.history, ext, hist);
}

void parallel_fir_step_fixed(std::span<const std::int64_t> frame, std::span<std::int64_t> out,
                             std::span<const std::int32_t> qtaps, int coeff_width, int out_width,
                             FirState<std::int64_t>& state) {
    if (frame.size() != out.size())
        throw Error(Errc::invalid_frame, "FIR frame size mismatch");
    const std::size_t hist = qtaps.size() - 1;
    auto ext = extend_history(state.history, frame, hist);
    fir_block_fixed(ext.data(), hist, frame.size(), qtaps, coeff_width, out_width, out.data());
    save_history(state.history, ext, hist);
}

namespace {

template <typename T, typename Kernel>
SerialStream<T> two_path_serial(const SerialStream<T>& in, const HalfbandCoeffs& c,
                                TwoPathState<T>& state, Kernel&& kernel) {
    const std::size_t hist = 2 * static_cast<std::size_t>(c.half_order());
    auto ext = extend_history(state.history, std::span<const T>{in.samples}, hist);
    SerialStream<T> out;
    out.sample_rate_hz = in.sample_rate_hz / 2.0;
    out.samples.resize((in.samples.size() + 1) / 2);
    kernel(ext.data(), out.samples.size(), out.samples.data());
    save_history(state.history, ext, hist);
    return out;
}

template <typename T, typename Kernel>
ParallelStream<T> two_path_parallel(const ParallelStream<T>& in, const HalfbandCoeffs& c,
                                    TwoPathState<T>& state, Kernel&& kernel) {
    if (in.lanes() % 2 != 0)
        throw Error(Errc::invalid_frame, "two-path block mode needs an even lane count");
    const std::size_t hist = 2 * static_cast<std::size_t>(c.half_order());
    const std::size_t valid = in.valid_count();
    auto ext = extend_history(state.history,
                              std::span<const T>{in.flat().data(), valid}, hist);
    const std::size_t out_valid = (valid + 1) / 2;
    const int lanes_out = in.lanes() / 2;
    const std::size_t frames_out =
        (out_valid + static_cast<std::size_t>(lanes_out) - 1) / static_cast<std::size_t>(lanes_out);
    std::vector<T> flat(frames_out * static_cast<std::size_t>(lanes_out), T{});
    kernel(ext.data(), out_valid, flat.data());
    save_history(state.history, ext, hist);
    return ParallelStream<T>::from_flat(std::move(flat), lanes_out, out_valid,
                                        in.lane_rate_hz());
}

} // namespace

SerialStream<double> halfband_decimate_two_path(const SerialStream<double>& in,
                                                const HalfbandCoeffs& c,
                                                TwoPathState<double>& state) {
    require_halfband(c, false);
    return two_path_serial(in, c, state, [&](const double* ext, std::size_t n, double* out) {
        two_path_block(ext, n, c, out, state.multiplications);
    });
}

SerialStream<std::int64_t> halfband_decimate_two_path_fixed(const SerialStream<std::int64_t>& in,
                                                            const HalfbandCoeffs& c, int out_width,
                                                            TwoPathState<std::int64_t>& state) {
    require_halfband(c, true);
    return two_path_serial(in, c, state,
                           [&](const std::int64_t* ext, std::size_t n, std::int64_t* out) {
                               two_path_block_fixed(ext, n, c, out_width, out,
                                                    state.multiplications);
                           });
}

ParallelStream<double> halfband_decimate_two_path(const ParallelStream<double>& in,
                                                  const HalfbandCoeffs& c,
                                                  TwoPathState<double>& state) {
    require_halfband(c, false);
    return two_path_parallel(in, c, state, [&](const double* ext, std::size_t n, double* out) {
        two_path_block(ext, n, c, out, state.multiplications);
    });
}

ParallelStream<std::int64_t>
halfband_decimate_two_path_fixed(const ParallelStream<std::int64_t>& in, const HalfbandCoeffs& c,
                                 int out_width, TwoPathState<std::int64_t>& state) {
    require_halfband(c, true);
    return two_path_parallel(in, c, state,
                             [&](const std::int64_t* ext, std::size_t n, std::int64_t* out) {
                                 two_path_block_fixed(ext, n, c, out_width, out,
                                                      state.multiplications);
                             });
}

} // namespace psrc
