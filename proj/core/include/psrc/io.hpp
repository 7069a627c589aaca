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
#ifndef PSRC_IO_HPP
#define PSRC_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>

#include "psrc/analysis.hpp"
#include "psrc/halfband.hpp"
#include "psrc/pipeline.hpp"
#include "psrc/stream.hpp"

namespace psrc {

/*
 * Sample files: raw little-endian signed 16-bit (`.i16`) for bulk data,
 * CSV with one float sample per line for human-scale data. Stream
 * metadata (rate, lanes) travels in a `<file>.json` sidecar.
 */
void write_i16(const std::filesystem::path& path, const SerialStream<std::int64_t>& s,
               int lanes = 1);
SerialStream<std::int64_t> read_i16(const std::filesystem::path& path);

void write_sample_csv(const std::filesystem::path& path, const SerialStream<double>& s);
SerialStream<double> read_sample_csv(const std::filesystem::path& path);

/// Lane count recorded in a sample file's sidecar (1 when absent).
int sidecar_lanes(const std::filesystem::path& path);

/*
 * Coefficient files: CSV of float taps plus a JSON sidecar carrying
 * order, quantization scale/width and the design measurements. Loading
 * re-derives the quantized mirror and enforces the halfband structure.
 */
void write_coeffs(const std::filesystem::path& csv_path, const HalfbandCoeffs& c);
HalfbandCoeffs read_coeffs(const std::filesystem::path& csv_path);

void write_response_csv(const std::filesystem::path& path, const ResponseReport& rep);
void write_response_summary(const std::filesystem::path& path, const ResponseReport& rep);
void write_spectrum_csv(const std::filesystem::path& path, const SpectrumReport& rep);

/*
 * CLI-facing run configuration: everything a command needs to reproduce a
 * run. JSON round-trippable; flags override individual fields.
 */
struct RunConfig {
    std::int64_t factor = 80;
    NumericKind numeric = NumericKind::fixed;
    int input_lanes = 80;
    double sample_rate_hz = 20e6;
    std::uint64_t seed = 1;

    int cic_stages = 5;
    int parallel_cic_r = 20;
    int diff_delay = 1;
    int sample_width = 16;

    int par_hb_order = 122; // FIR order 2N
    double par_hb_transition = 0.03;
    int ser_hb_order = 238;
    double ser_hb_transition = 0.015;
    double hb_atten_db = 70.0;
    int coeff_width = 16;

    std::string input_path;
    std::string output_path;
};

RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const std::filesystem::path& path, const RunConfig& rc);
std::string run_config_json(const RunConfig& rc);

/// Build the SRC cascade configuration (designs the halfbands).
SrcConfig to_src_config(const RunConfig& rc);

} // namespace psrc

#endif
