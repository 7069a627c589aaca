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
#include "psrc/cic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace psrc {

void CicConfig::validate() const {
    if (stages < 1)
        throw Error(Errc::invalid_config, "CIC stages must be >= 1");
    if (decimation < 1)
        throw Error(Errc::invalid_config, "CIC decimation must be >= 1");
    if (diff_delay < 1)
        throw Error(Errc::invalid_config, "CIC differential delay must be >= 1");
    if (input_width < 2 || input_width > 64)
        throw Error(Errc::invalid_config, "CIC input width out of range [2, 64]");
    if (output_width < 2 || output_width > internal_width())
        throw Error(Errc::invalid_config, "CIC output width out of range [2, internal width]");
    // one headroom bit for the rounding arithmetic (2v + d)
    if (internal_width() > 126)
        throw Error(Errc::invalid_config,
                    "CIC internal width " + std::to_string(internal_width()) + " exceeds 126");
}

AdderMatrix build_adder_matrix(int lanes) {
    if (lanes < 1)
        throw Error(Errc::invalid_lane_count, "lane count must be >= 1");
    AdderMatrix m;
    m.lane_count = lanes;
    const int depth = ceil_log2(lanes);
    const std::int64_t padded = bit_ceil_i64(lanes);
    for (int d = 0; d < depth; ++d) {
        std::vector<AdderMatrix::Block> level;
        const std::int64_t block = std::int64_t{1} << (d + 1);
        const std::int64_t half = std::int64_t{1} << d;
        for (std::int64_t b0 = 0; b0 < padded; b0 += block) {
            const std::int64_t begin = b0 + half;
            if (begin >= lanes)
                break; // trailing lanes of the padded network are dropped
            const std::int64_t end = std::min<std::int64_t>(b0 + block, lanes);
            level.push_back({static_cast<int>(b0 + half - 1), static_cast<int>(begin),
                             static_cast<int>(end)});
        }
        m.levels.push_back(std::move(level));
    }
    return m;
}

void parallel_integrate_step(std::span<const uint128> in, std::span<uint128> out,
                             const AdderMatrix& matrix, IntegratorState& state, int width) {
    const auto lanes = static_cast<std::size_t>(matrix.lane_count);
    if (in.size() != lanes || out.size() != lanes)
        throw Error(Errc::invalid_frame, "frame lane count does not match adder matrix");
    std::copy(in.begin(), in.end(), out.begin());
    matrix.apply(out);
    const uint128 a_prev = state.accum;
    for (auto& v : out)
        v = wrap_bits(v + a_prev, width);
    state.accum = out[lanes - 1];
}

void parallel_comb_step(std::span<const uint128> in, std::span<uint128> out, CombState& state,
                        int diff_delay, int width) {
    const std::size_t lanes = in.size();
    const auto m = static_cast<std::size_t>(diff_delay);
    if (out.size() != lanes)
        throw Error(Errc::invalid_frame, "comb output frame size mismatch");
    if (state.delay.empty())
        state.delay.assign(m, 0);
    if (state.delay.size() != m)
        throw Error(Errc::invalid_frame, "comb state depth does not match differential delay");
    // next history = last M of (history ++ frame), taken before `out`
    // may alias `in`
    std::vector<uint128> next(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t flat = lanes + i; // index into (history ++ frame)
        next[i] = flat >= m ? in[flat - m] : state.delay[flat];
    }
    for (std::size_t l = 0; l < lanes; ++l) {
        const uint128 delayed = l >= m ? in[l - m] : state.delay[l];
        out[l] = wrap_bits(in[l] - delayed, width);
    }
    state.delay = std::move(next);
}

namespace {

/*
 * One level of the prefix network: each 2*half block adds the running
 * total of its lower half into every upper-half lane. Identical network
 * to build_adder_matrix; modular addition makes any evaluation order
 * bit-exact. The two smallest levels run as flat strided loops, the rest
 * as complete blocks plus one clipped tail block.
 */
template <typename Word>
inline void prefix_level(Word* fr, int lanes, int half) {
    if (half == 1) {
        for (int b = 1; b < lanes; b += 2)
            fr[b] += fr[b - 1];
        return;
    }
    if (half == 2) {
        int b = 0;
        for (; b + 4 <= lanes; b += 4) {
            const Word s = fr[b + 1];
            fr[b + 2] += s;
            fr[b + 3] += s;
        }
        if (b + 2 < lanes)
            fr[b + 2] += fr[b + 1];
        return;
    }
    const int block = half << 1;
    int b0 = 0;
    for (; b0 + block <= lanes; b0 += block) {
        const Word src = fr[b0 + half - 1];
        Word* dst = fr + b0 + half;
        for (int l = 0; l < half; ++l)
            dst[l] += src;
    }
    if (b0 + half < lanes) {
        const Word src = fr[b0 + half - 1];
        for (int l = b0 + half; l < lanes; ++l)
            fr[l] += src;
    }
}

/// One integrator stage over one frame: prefix levels then the adder line.
template <typename Word>
inline Word integrate_frame(Word* fr, int lanes, int depth, Word accum) {
    for (int d = 0; d < depth; ++d)
        prefix_level(fr, lanes, 1 << d);
    for (int l = 0; l < lanes; ++l)
        fr[l] += accum;
    return fr[lanes - 1];
}

template <typename Word>
ParallelStream<std::int64_t> run_parallel_cic_impl(const ParallelStream<std::int64_t>& in,
                                                   const CicConfig& cfg) {
    const int lanes = in.lanes();
    const int depth = ceil_log2(lanes);

    std::vector<Word> buf(in.flat().size());
    for (std::size_t i = 0; i < buf.size(); ++i)
        buf[i] = static_cast<Word>(in.flat()[i]);

    // Integrators: all N stages applied while the frame is hot; each
    // stage's accumulator carries its cross-frame time integral.
    const std::size_t frames = in.frame_count();
    std::vector<Word> accums(static_cast<std::size_t>(cfg.stages), 0);
    for (std::size_t f = 0; f < frames; ++f) {
        Word* fr = buf.data() + f * static_cast<std::size_t>(lanes);
        for (int s = 0; s < cfg.stages; ++s)
            accums[static_cast<std::size_t>(s)] =
                integrate_frame(fr, lanes, depth, accums[static_cast<std::size_t>(s)]);
    }

    // Downsampler: keep flat indices == 0 mod R, repack to ceil(L/R) lanes.
    auto integrated = ParallelStream<Word>::from_flat(std::move(buf), lanes, in.valid_count(),
                                                      in.lane_rate_hz());
    ParallelStream<Word> dec = parallel_downsample(integrated, cfg.decimation);

    // Combs at the reduced lane count, history of M flat samples per stage.
    const auto m = static_cast<std::size_t>(cfg.diff_delay);
    const auto lo = static_cast<std::size_t>(dec.lanes());
    const std::size_t frames_out = dec.frame_count();
    std::vector<Word> hist(m);
    std::vector<Word> next(m);
    for (int s = 0; s < cfg.stages; ++s) {
        std::fill(hist.begin(), hist.end(), Word{0});
        for (std::size_t f = 0; f < frames_out; ++f) {
            const std::span<Word> fr = dec.frame(f);
            for (std::size_t i = 0; i < m; ++i) {
                const std::size_t flat = lo + i;
                next[i] = flat >= m ? fr[flat - m] : hist[flat];
            }
            for (std::size_t l = lo; l-- > 0;) // descending: in-place safe
                fr[l] -= l >= m ? fr[l - m] : hist[l];
            std::swap(hist, next);
        }
    }

    // Single unit-normalizing rounding to the output width.
    const CicRounder rounder(cfg);
    std::vector<std::int64_t> out(dec.flat().size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = rounder.round(dec.flat()[i]);
    return ParallelStream<std::int64_t>::from_flat(std::move(out), dec.lanes(), dec.valid_count(),
                                                   dec.lane_rate_hz());
}

void check_input_width(const std::vector<std::int64_t>& samples, int width) {
    const std::int64_t lo = fixed_min(width);
    const std::int64_t hi = fixed_max(width);
    for (const auto v : samples)
        if (v < lo || v > hi)
            throw Error(Errc::malformed_stream, "sample exceeds declared input width");
}

} // namespace

SerialStream<std::int64_t> run_serial_cic(const SerialStream<std::int64_t>& in,
                                          const CicConfig& cfg) {
    cfg.validate();
    check_input_width(in.samples, cfg.input_width);
    SerialStream<std::int64_t> out;
    out.sample_rate_hz = in.sample_rate_hz / cfg.decimation;
    out.samples.reserve(in.samples.size() / static_cast<std::size_t>(cfg.decimation) + 1);
    std::int64_t y = 0;
    if (cfg.internal_width() <= 64) {
        BasicSerialCic<std::uint64_t> cic(cfg);
        for (const auto x : in.samples)
            if (cic.push(x, y))
                out.samples.push_back(y);
    } else {
        BasicSerialCic<uint128> cic(cfg);
        for (const auto x : in.samples)
            if (cic.push(x, y))
                out.samples.push_back(y);
    }
    return out;
}

ParallelStream<std::int64_t> run_parallel_cic(const ParallelStream<std::int64_t>& in,
                                              const CicConfig& cfg) {
    cfg.validate();
    check_input_width(in.flat(), cfg.input_width);
    if (cfg.internal_width() <= 64)
        return run_parallel_cic_impl<std::uint64_t>(in, cfg);
    return run_parallel_cic_impl<uint128>(in, cfg);
}

double cic_magnitude_response_db(const CicConfig& cfg, double f) {
    const double rm = static_cast<double>(cfg.decimation) * cfg.diff_delay;
    const double fr = f - std::floor(f);
    if (fr == 0.0)
        return 0.0; // replica center, sinc limit
    const double num = std::fabs(std::sin(M_PI * fr * rm));
    const double den = rm * std::fabs(std::sin(M_PI * fr));
    if (den == 0.0)
        return 0.0;
    const double db = 20.0 * cfg.stages * std::log10(num / den);
    return std::max(db, -300.0);
}

} // namespace psrc
