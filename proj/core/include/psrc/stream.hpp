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
#ifndef PSRC_STREAM_HPP
#define PSRC_STREAM_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "psrc/error.hpp"

namespace psrc {

/*
 * Sample streams come in two numeric kinds: 64-bit float for filter design
 * and response analysis, and fixed-point (int64_t carrying a two's-complement
 * value at a declared width, see fixed.hpp) for the bit-exact datapaths.
 * Containers are templated on the scalar type instead of tagging every
 * sample.
 */
enum class NumericKind { fixed, real };

/// Single-lane sample sequence at a given rate. Index k is the time index.
template <typename T>
struct SerialStream {
    std::vector<T> samples;
    double sample_rate_hz = 0.0;
};

/// Flat index k -> (frame i, lane j) with i = floor(k/L), j = k mod L.
struct LanePos {
    std::int64_t frame = 0;
    int lane = 0;
    friend bool operator==(const LanePos&, const LanePos&) = default;
};

inline LanePos serialize_index(std::int64_t k, int lanes) {
    if (lanes < 1)
        throw Error(Errc::invalid_lane_count, "lane count must be >= 1");
    if (k < 0)
        throw Error(Errc::invalid_frame, "sample index must be >= 0");
    return {k / lanes, static_cast<int>(k % lanes)};
}

inline std::int64_t deserialize_index(LanePos p, int lanes) {
    if (lanes < 1)
        throw Error(Errc::invalid_lane_count, "lane count must be >= 1");
    return p.frame * lanes + p.lane;
}

/*
 * L-lane parallel stream stored frame-major in one flat buffer: frame i
 * occupies [i*L, (i+1)*L), lane j of frame i holds serial sample i*L + j.
 * The final frame may be zero-padded; valid_count() is the number of real
 * samples. Aggregate sample rate is lanes() * lane_rate_hz().
 */
template <typename T>
class ParallelStream {
public:
    ParallelStream() = default;

    ParallelStream(int lanes, double lane_rate_hz) : lanes_(lanes), lane_rate_hz_(lane_rate_hz) {
        if (lanes < 1)
            throw Error(Errc::invalid_lane_count, "lane count must be >= 1");
    }

    /// Adopt a flat buffer of whole frames; `valid` trailing-pad-excluded.
    static ParallelStream from_flat(std::vector<T> flat, int lanes, std::size_t valid,
                                    double lane_rate_hz) {
        ParallelStream p(lanes, lane_rate_hz);
        if (flat.size() % static_cast<std::size_t>(lanes) != 0)
            throw Error(Errc::malformed_stream, "flat buffer is not a whole number of frames");
        if (valid > flat.size())
            throw Error(Errc::malformed_stream, "valid count exceeds buffer size");
        if (!flat.empty() && valid <= flat.size() - static_cast<std::size_t>(lanes))
            throw Error(Errc::malformed_stream, "padding exceeds one trailing frame");
        p.data_ = std::move(flat);
        p.valid_ = valid;
        return p;
    }

    int lanes() const { return lanes_; }
    double lane_rate_hz() const { return lane_rate_hz_; }
    double aggregate_rate_hz() const { return lane_rate_hz_ * lanes_; }
    std::size_t frame_count() const { return data_.size() / static_cast<std::size_t>(lanes_); }
    std::size_t valid_count() const { return valid_; }

    std::span<T> frame(std::size_t i) {
        return {data_.data() + i * static_cast<std::size_t>(lanes_),
                static_cast<std::size_t>(lanes_)};
    }
    std::span<const T> frame(std::size_t i) const {
        return {data_.data() + i * static_cast<std::size_t>(lanes_),
                static_cast<std::size_t>(lanes_)};
    }

    std::vector<T>& flat() { return data_; }
    const std::vector<T>& flat() const { return data_; }

    /// Append one frame; `span.size()` must equal lanes().
    void push_frame(std::span<const T> lanes_in, std::size_t valid_in_frame) {
        if (lanes_in.size() != static_cast<std::size_t>(lanes_))
            throw Error(Errc::invalid_frame, "frame lane count does not match stream");
        data_.insert(data_.end(), lanes_in.begin(), lanes_in.end());
        valid_ += valid_in_frame;
    }

private:
    std::vector<T> data_;
    int lanes_ = 1;
    std::size_t valid_ = 0;
    double lane_rate_hz_ = 0.0;
};

/// Pack a serial stream into L lanes, zero-padding the trailing frame.
template <typename T>
ParallelStream<T> serial_to_parallel(const SerialStream<T>& s, int lanes) {
    if (lanes < 1)
        throw Error(Errc::invalid_lane_count, "lane count must be >= 1");
    const std::size_t n = s.samples.size();
    const std::size_t frames = (n + lanes - 1) / lanes;
    std::vector<T> flat(frames * lanes, T{});
    std::copy(s.samples.begin(), s.samples.end(), flat.begin());
    return ParallelStream<T>::from_flat(std::move(flat), lanes, n, s.sample_rate_hz / lanes);
}

/// Exact inverse of serial_to_parallel, trimming the padded tail.
template <typename T>
SerialStream<T> parallel_to_serial(const ParallelStream<T>& p) {
    SerialStream<T> s;
    s.sample_rate_hz = p.aggregate_rate_hz();
    s.samples.assign(p.flat().begin(), p.flat().begin() + p.valid_count());
    return s;
}

} // namespace psrc

#endif
