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
#ifndef PSRC_CIC_HPP
#define PSRC_CIC_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "psrc/error.hpp"
#include "psrc/fixed.hpp"
#include "psrc/stream.hpp"

namespace psrc {

/*
 * Cascaded integrator-comb decimator. N integrator stages, decimate-by-R
 * keeping phase-0 samples, N comb stages y = x - x[-M]. All internal
 * arithmetic wraps at internal_width(); the unrounded DC gain is (R*M)^N.
 * The single rounding step at the final comb output divides by that gain
 * (round half up) and rescales to output_width, so the filter is
 * unit-normalized at DC. The normalized boxcar cascade has unit L-inf
 * gain, so the rounded output never exceeds the output width.
 */
struct CicConfig {
    int stages = 5;        // N
    int decimation = 1;    // R
    int diff_delay = 1;    // M
    int input_width = 16;
    int output_width = 16;

    /// Hogenauer width: input_width + stages * ceil(log2(R*M)).
    int internal_width() const {
        return input_width + stages * ceil_log2(static_cast<std::int64_t>(decimation) * diff_delay);
    }
    void validate() const;
};

/*
 * Log-depth prefix-sum network over one frame: output lane l is
 * sum_{j<=l} x[j]. Built by recursive halving; each level-d block adds the
 * running total of its lower half (lane src) into every lane of its upper
 * half. For lane counts that are not a power of two the network is built
 * for the next power of two and the trailing lanes are dropped.
 */
struct AdderMatrix {
    struct Block {
        int src;
        int dst_begin;
        int dst_end; // exclusive
    };

    int lane_count = 1;
    std::vector<std::vector<Block>> levels;

    std::size_t add_node_count() const {
        std::size_t n = 0;
        for (const auto& level : levels)
            for (const auto& b : level)
                n += static_cast<std::size_t>(b.dst_end - b.dst_begin);
        return n;
    }

    /// In-place lane-prefix sums (wrap semantics of the scalar type).
    template <typename T>
    void apply(std::span<T> frame) const {
        for (const auto& level : levels) {
            for (const auto& b : level) {
                const T v = frame[static_cast<std::size_t>(b.src)];
                for (int l = b.dst_begin; l < b.dst_end; ++l)
                    frame[static_cast<std::size_t>(l)] += v;
            }
        }
    }
};

AdderMatrix build_adder_matrix(int lanes);

/// Cross-frame accumulator of one parallel integrator stage (A(t)).
struct IntegratorState {
    uint128 accum = 0;
};

/// Last M flat samples seen by one parallel comb stage, oldest first.
struct CombState {
    std::vector<uint128> delay;
};

/// Whole-filter state bundle: N integrators, N combs, downsampler phase.
struct CicState {
    std::vector<IntegratorState> integrators;
    std::vector<CombState> combs;
    int downsample_phase = 0;

    static CicState make(const CicConfig& cfg) {
        CicState s;
        s.integrators.resize(static_cast<std::size_t>(cfg.stages));
        s.combs.resize(static_cast<std::size_t>(cfg.stages));
        for (auto& c : s.combs)
            c.delay.assign(static_cast<std::size_t>(cfg.diff_delay), 0);
        return s;
    }
};

/*
 * One parallel integrator stage: out[l] = A(t-1) + I(t,l) with
 * I(t,l) the lane-prefix sums of the frame; A advances by I(t,L-1).
 * Values are canonicalized to `width` bits.
 */
void parallel_integrate_step(std::span<const uint128> in, std::span<uint128> out,
                             const AdderMatrix& matrix, IntegratorState& state, int width);

/*
 * One parallel comb stage: out[l] = x(t,l) - x at flat index t*L + l - M,
 * drawing the first M lanes from state history (zeros before the stream).
 */
void parallel_comb_step(std::span<const uint128> in, std::span<uint128> out, CombState& state,
                        int diff_delay, int width);

/*
 * Keep flat indices == 0 (mod r). Output frames have ceil(L/r) lanes
 * (= L/r when r divides L); kept samples are repacked contiguously, so a
 * phase that does not line up with the frame boundary carries across
 * frames. r = 1 is the identity. Only the valid region is kept; the
 * zero-padded tail of the input never contributes.
 */
template <typename T>
ParallelStream<T> parallel_downsample(const ParallelStream<T>& in, int r) {
    if (r < 1)
        throw Error(Errc::invalid_config, "decimation ratio must be >= 1");
    const int lanes_out = (in.lanes() + r - 1) / r;
    const std::size_t valid = in.valid_count();
    const std::size_t kept = valid == 0 ? 0 : (valid - 1) / static_cast<std::size_t>(r) + 1;
    const std::size_t frames_out = (kept + static_cast<std::size_t>(lanes_out) - 1) /
                                   static_cast<std::size_t>(lanes_out);
    std::vector<T> flat(frames_out * static_cast<std::size_t>(lanes_out), T{});
    const auto& src = in.flat();
    std::size_t w = 0;
    for (std::size_t k = 0; k < valid; k += static_cast<std::size_t>(r))
        flat[w++] = src[k];
    const double rate_out = in.aggregate_rate_hz() / r / lanes_out;
    return ParallelStream<T>::from_flat(std::move(flat), lanes_out, kept, rate_out);
}

/*
 * The single output rounding of the CIC: round_half_up of the final comb
 * value divided by the DC gain (R*M)^N, rescaled for any input/output
 * width difference, then wrapped to the output width.
 */
struct CicRounder {
    explicit CicRounder(const CicConfig& cfg)
        : width(cfg.internal_width()), out_width(cfg.output_width) {
        const auto rm = static_cast<int128>(cfg.decimation) * cfg.diff_delay;
        divisor = 1;
        for (int i = 0; i < cfg.stages; ++i)
            divisor *= rm;
        up_shift = cfg.output_width > cfg.input_width ? cfg.output_width - cfg.input_width : 0;
        divisor <<= cfg.input_width > cfg.output_width ? cfg.input_width - cfg.output_width : 0;
    }

    template <typename Word>
    std::int64_t round(Word v) const {
        const int128 wide = sign_extend(static_cast<uint128>(v), width) << up_shift;
        const int128 r = round_half_up_div(wide, divisor);
        return static_cast<std::int64_t>(sign_extend(static_cast<uint128>(r), out_width));
    }

    int width;
    int out_width;
    int up_shift;
    int128 divisor;
};

/*
 * Per-sample serial CIC, the bit-exact reference for every parallel form.
 * Word must be wide enough for internal_width() (uint128 always is).
 */
template <typename Word>
class BasicSerialCic {
public:
    explicit BasicSerialCic(const CicConfig& cfg)
        : stages_(cfg.stages),
          r_(cfg.decimation),
          m_(cfg.diff_delay),
          width_(cfg.internal_width()),
          rounder_(cfg),
          accums_(static_cast<std::size_t>(cfg.stages), 0),
          comb_(static_cast<std::size_t>(cfg.stages) * static_cast<std::size_t>(cfg.diff_delay),
                0),
          comb_pos_(static_cast<std::size_t>(cfg.stages), 0) {
        cfg.validate();
        if (width_ > static_cast<int>(sizeof(Word)) * 8)
            throw Error(Errc::invalid_config, "word type narrower than internal width");
    }

    /// Feed one sample; returns true when a decimated output is produced.
    bool push(std::int64_t x, std::int64_t& out) {
        Word v = static_cast<Word>(x);
        for (int s = 0; s < stages_; ++s) {
            accums_[static_cast<std::size_t>(s)] += v;
            v = accums_[static_cast<std::size_t>(s)];
        }
        const bool keep = phase_ == 0;
        if (++phase_ == r_)
            phase_ = 0;
        if (!keep)
            return false;
        for (int s = 0; s < stages_; ++s) {
            const std::size_t slot =
                static_cast<std::size_t>(s) * static_cast<std::size_t>(m_) +
                static_cast<std::size_t>(comb_pos_[static_cast<std::size_t>(s)]);
            const Word delayed = comb_[slot];
            comb_[slot] = v;
            if (++comb_pos_[static_cast<std::size_t>(s)] == m_)
                comb_pos_[static_cast<std::size_t>(s)] = 0;
            v -= delayed;
        }
        out = rounder_.round(v);
        return true;
    }

private:
    int stages_, r_, m_, width_;
    CicRounder rounder_;
    int phase_ = 0;
    std::vector<Word> accums_;
    std::vector<Word> comb_;
    std::vector<int> comb_pos_;
};

/// Serial reference: integrators, decimate-by-R (phase 0), combs, round.
SerialStream<std::int64_t> run_serial_cic(const SerialStream<std::int64_t>& in,
                                          const CicConfig& cfg);

/*
 * Parallel-pipeline CIC over an L-lane stream: per stage an adder matrix
 * plus adder line with a cross-frame accumulator, then the parallel
 * downsampler, then parallel combs at the reduced lane count. Flattened
 * output is bit-identical to run_serial_cic on the flattened input.
 */
ParallelStream<std::int64_t> run_parallel_cic(const ParallelStream<std::int64_t>& in,
                                              const CicConfig& cfg);

/*
 * DC-normalized magnitude response in dB:
 * 20*N*log10(|sin(pi f R M)| / (R M |sin(pi f)|)), periodic in f,
 * 0 dB at replica centers by the sinc limit, floored at -300 dB.
 */
double cic_magnitude_response_db(const CicConfig& cfg, double f);

} // namespace psrc

#endif
