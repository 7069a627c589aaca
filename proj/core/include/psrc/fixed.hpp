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
#ifndef PSRC_FIXED_HPP
#define PSRC_FIXED_HPP

#include <cstdint>

namespace psrc {

/*
 * Fixed-point convention used throughout the datapath:
 *
 *   - A sample of width W is a two's-complement integer in
 *     [-2^(W-1), 2^(W-1)-1].
 *   - All arithmetic wraps modulo 2^W. Because modular addition is a ring
 *     homomorphism, any regrouping of sums (prefix networks, block
 *     convolution) is exact, which is what the parallel/serial equivalence
 *     of the decimators rests on.
 *   - Values are carried as raw bits in unsigned words; sign extension
 *     happens only when a numeric value is read out (e.g. for rounding).
 *
 * Wide accumulators use the compiler's 128-bit integers: a 5-stage CIC at
 * decimation 4000 needs 16 + 5*ceil(log2(4000)) = 76 bits of state.
 */
using int128 = __int128;
using uint128 = unsigned __int128;

/// Mask selecting the low `width` bits; width in [1, 128].
constexpr uint128 width_mask(int width) {
    return width >= 128 ? ~uint128{0} : ((uint128{1} << width) - 1);
}

/// Reduce raw bits modulo 2^width.
constexpr uint128 wrap_bits(uint128 v, int width) {
    return v & width_mask(width);
}

/// Interpret the low `width` bits of v as a two's-complement value.
constexpr int128 sign_extend(uint128 v, int width) {
    const uint128 m = width_mask(width);
    const uint128 sign = uint128{1} << (width - 1);
    v &= m;
    return (v & sign) ? static_cast<int128>(v | ~m) : static_cast<int128>(v);
}

/// Wrap a 64-bit signed value to `width` bits (width <= 64).
constexpr std::int64_t wrap_i64(std::int64_t v, int width) {
    return static_cast<std::int64_t>(sign_extend(static_cast<uint128>(v), width));
}

/// floor((v + 2^(shift-1)) / 2^shift): round to nearest, ties toward +inf.
constexpr int128 round_half_up_shift(int128 v, int shift) {
    if (shift <= 0)
        return v;
    return (v + (int128{1} << (shift - 1))) >> shift;
}

constexpr int128 floor_div(int128 a, int128 b) {
    int128 q = a / b;
    if (a % b != 0 && (a < 0) != (b < 0))
        --q;
    return q;
}

/// round_half_up(v / d) for d > 0: floor((2v + d) / 2d).
constexpr int128 round_half_up_div(int128 v, int128 d) {
    return floor_div(2 * v + d, 2 * d);
}

constexpr int ceil_log2(std::int64_t v) {
    int bits = 0;
    std::int64_t p = 1;
    while (p < v) {
        p <<= 1;
        ++bits;
    }
    return bits;
}

constexpr std::int64_t bit_ceil_i64(std::int64_t v) {
    return std::int64_t{1} << ceil_log2(v);
}

/// Smallest/largest value representable at `width` bits.
constexpr std::int64_t fixed_min(int width) {
    return -(std::int64_t{1} << (width - 1));
}
constexpr std::int64_t fixed_max(int width) {
    return (std::int64_t{1} << (width - 1)) - 1;
}

} // namespace psrc

#endif
