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
#ifndef PSRC_ERROR_HPP
#define PSRC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace psrc {

enum class Errc {
    invalid_lane_count,
    malformed_stream,
    invalid_frame,
    invalid_config,
    design_infeasible,
    invalid_scaling,
    unsupported_factor,
    clip_error,
    insufficient_data,
    io_error,
};

/// Library error carrying a machine-checkable code alongside the message.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace psrc

#endif
