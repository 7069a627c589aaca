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
#ifndef PSRC_HALFBAND_HPP
#define PSRC_HALFBAND_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "psrc/error.hpp"
#include "psrc/stream.hpp"

namespace psrc {

/*
 * Halfband decimate-by-2 lowpass of length 2N+1: center tap exactly 0.5,
 * zeros at even offsets from the center, odd-offset taps mirrored. The
 * transition band is symmetric about f = 0.25 of the filter's input rate;
 * transition_width is the one-sided margin, i.e. passband edge
 * 0.25 - transition_width and stopband edge 0.25 + transition_width.
 */
struct HalfbandSpec {
    int half_order = 61;            // N; filter length 2N+1
    double transition_width = 0.03; // one-sided, fraction of input rate
    double stopband_atten_db = 70.0;
    int coeff_width = 16;

    void validate() const;
    double passband_edge() const { return 0.25 - transition_width; }
    double stopband_edge() const { return 0.25 + transition_width; }
};

struct HalfbandCoeffs {
    std::vector<double> taps;            // 2N+1, unit DC gain
    std::vector<std::int32_t> quantized; // taps scaled by 2^(coeff_width-1)
    int coeff_width = 16;
    double transition_width = 0.0;
    double measured_stopband_db = 0.0; // of the float taps, at design time
    double measured_ripple_db = 0.0;   // peak-to-peak over the passband

    int half_order() const { return (static_cast<int>(taps.size()) - 1) / 2; }
    /// Symmetric nonzero pairs: the coefficient multiplies per output
    /// sample of the two-path evaluation (ceil(N/2)).
    int pair_count() const { return (half_order() + 1) / 2; }
    std::int32_t quant_scale() const { return std::int32_t{1} << (coeff_width - 1); }
};

/*
 * Kaiser-windowed ideal halfband. Zeros and symmetry hold exactly by
 * construction; the odd taps are rescaled so the tap sum is exactly unit
 * DC gain. Throws design_infeasible (reporting the achieved value) when
 * the measured stopband attenuation misses the requested target.
 */
HalfbandCoeffs design_halfband(const HalfbandSpec& spec);

/// Round-half-up quantization to `bits`-wide integers; one side is
/// quantized and mirrored so symmetry and zeros survive exactly.
HalfbandCoeffs quantize_coeffs(const HalfbandCoeffs& c, int bits);

/// |sum h(k) e^{-i 2 pi f k}| in dB (floor -300), f in cycles/sample.
double fir_magnitude_response_db(std::span<const double> taps, double f);
std::vector<double> fir_magnitude_response_db(std::span<const double> taps,
                                              std::span<const double> grid);

/// Signed zero-phase amplitude of a halfband filter, |.| of which equals
/// the magnitude response: 0.5 + sum_p 2 h(N+2p+1) cos(2 pi f (2p+1)).
/// O(N/2) per point against O(2N+1) for the generic evaluator.
double halfband_amplitude(const HalfbandCoeffs& c, double f);

/// Enforce center 0.5, even-offset zeros and mirror symmetry exactly;
/// throws invalid_config otherwise. The two-path kernels rely on this.
void validate_halfband_structure(const HalfbandCoeffs& c);

/// Streaming FIR delay line: the last (taps-1) inputs, oldest first;
/// pre-history is zeros.
template <typename T>
struct FirState {
    std::vector<T> history;
};

/*
 * Direct-form convolution y(n) = sum_k h(k) x(n-k), the reference for the
 * block and two-path forms. Real-valued path accumulates in extended
 * precision; the block form uses the identical term order, so the two are
 * bit-identical.
 */
SerialStream<double> serial_fir(const SerialStream<double>& in, std::span<const double> taps,
                                FirState<double>& state);

/// Fixed-point direct form: full-precision products, single round by the
/// coefficient scale, wrap to out_width.
SerialStream<std::int64_t> serial_fir_fixed(const SerialStream<std::int64_t>& in,
                                            std::span<const std::int32_t> qtaps, int coeff_width,
                                            int out_width, FirState<std::int64_t>& state);

/// One frame of the block FIR: out lane j = sum_k h(k) x_flat(t*L + j - k).
void parallel_fir_step(std::span<const double> frame, std::span<double> out,
                       std::span<const double> taps, FirState<double>& state);
void parallel_fir_step_fixed(std::span<const std::int64_t> frame, std::span<std::int64_t> out,
                             std::span<const std::int32_t> qtaps, int coeff_width, int out_width,
                             FirState<std::int64_t>& state);

/*
 * Two-path halfband decimator state. `multiplications` counts coefficient
 * multiplies (the center tap is a shift and is not counted), which the
 * response/resource claims are checked against.
 */
template <typename T>
struct TwoPathState {
    std::vector<T> history; // last 2N flat inputs, oldest first
    std::uint64_t multiplications = 0;
};

/*
 * Two-path evaluation of y(2m): the center tap contributes
 * 0.5 * x(2m - N); each symmetric pair is summed before its single
 * multiply. Equals serial_fir followed by keep-every-other sample.
 */
SerialStream<double> halfband_decimate_two_path(const SerialStream<double>& in,
                                                const HalfbandCoeffs& c,
                                                TwoPathState<double>& state);
SerialStream<std::int64_t> halfband_decimate_two_path_fixed(const SerialStream<std::int64_t>& in,
                                                            const HalfbandCoeffs& c, int out_width,
                                                            TwoPathState<std::int64_t>& state);

/// Block form: lane count halves, output lane j of frame t holds
/// y(2 (t L/2 + j)). Lane count must be even.
ParallelStream<double> halfband_decimate_two_path(const ParallelStream<double>& in,
                                                  const HalfbandCoeffs& c,
                                                  TwoPathState<double>& state);
ParallelStream<std::int64_t>
halfband_decimate_two_path_fixed(const ParallelStream<std::int64_t>& in, const HalfbandCoeffs& c,
                                 int out_width, TwoPathState<std::int64_t>& state);

} // namespace psrc

#endif
