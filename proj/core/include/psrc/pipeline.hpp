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
#ifndef PSRC_PIPELINE_HPP
#define PSRC_PIPELINE_HPP

#include <cstdint>
#include <vector>

#include "psrc/cic.hpp"
#include "psrc/halfband.hpp"
#include "psrc/stream.hpp"

namespace psrc {

/*
 * Decomposition of a total decimation factor into the fixed parallel part
 * (CIC/20 then two halfbands: 80) times a serial CIC ratio in [1, 4000]
 * (1 = bypass) times 2^(serial halfband stages), stages in [0, 3].
 * Planning prefers the largest halfband stage count for the sharpest
 * composite transition band.
 */
struct FactorPlan {
    static constexpr std::int64_t parallel_factor = 80;
    int serial_cic_r = 1;
    int serial_hb_stages = 0;

    std::int64_t total() const {
        return parallel_factor * serial_cic_r * (std::int64_t{1} << serial_hb_stages);
    }
    friend bool operator==(const FactorPlan&, const FactorPlan&) = default;
};

/// Deterministic plan for a total factor; throws unsupported_factor with
/// the nearest achievable totals when no decomposition exists.
FactorPlan plan_factor(std::int64_t total);

/// True when some (r, h) decomposition reaches this total.
bool factor_achievable(std::int64_t total);

struct SrcConfig {
    FactorPlan plan;
    CicConfig parallel_cic{5, 20, 1, 16, 16};
    std::vector<HalfbandCoeffs> parallel_hb; // 2 stages
    CicConfig serial_cic{5, 1, 1, 16, 16};
    std::vector<HalfbandCoeffs> serial_hb; // up to 3 stages used
    NumericKind numeric = NumericKind::fixed;
    int input_lanes = 80;
    int stage_output_width = 16; // halfband stage boundaries (fixed mode)

    /// Reference design: 16-bit, 5-stage CICs, order-122/238 halfbands.
    static SrcConfig make_default(std::int64_t factor, NumericKind kind);
    void validate() const;
};

/*
 * Full cascaded converter on an 80-lane (configurable) parallel stream:
 * parallel CIC -> two halfband halvings -> serial CIC (optional) -> up to
 * three serial halfbands. In fixed mode the flattened output is
 * bit-identical to run_src_serial_reference on the flattened input.
 */
SerialStream<std::int64_t> run_src(const ParallelStream<std::int64_t>& in, const SrcConfig& cfg);
SerialStream<double> run_src(const ParallelStream<double>& in, const SrcConfig& cfg);

/// All-serial oracle chain: serial CIC + direct FIR + keep-every-other
/// per stage, with identical stage-boundary rounding.
SerialStream<std::int64_t> run_src_serial_reference(const SerialStream<std::int64_t>& in,
                                                    const SrcConfig& cfg);
SerialStream<double> run_src_serial_reference(const SerialStream<double>& in,
                                              const SrcConfig& cfg);

/// Composite magnitude response at input-normalized frequency f: sum of
/// stage responses, each stage evaluated at f times its input decimation.
double cascade_response_db(const SrcConfig& cfg, double f);

/*
 * Passband ripple is measured peak-to-peak over [0, 0.8 * output Nyquist];
 * stopband attenuation is the worst rejection over every band that folds
 * onto the measured passband after decimation.
 */
struct ResponseReport {
    std::int64_t decimation_factor = 0;
    double passband_ripple_db = 0.0;
    double stopband_atten_db = 0.0;
    double passband_edge = 0.0;                     // input-normalized
    std::vector<std::pair<double, double>> response; // (f, dB) plot grid
};

struct ResponseOptions {
    int plot_points = 4097; // 0 disables the plot grid
};

ResponseReport cascade_response(const SrcConfig& cfg, const ResponseOptions& opts = {});

/// Fraction of the output Nyquist band treated as the usable passband.
inline constexpr double kPassbandFraction = 0.8;

} // namespace psrc

#endif
