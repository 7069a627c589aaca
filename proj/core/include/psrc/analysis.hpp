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
#ifndef PSRC_ANALYSIS_HPP
#define PSRC_ANALYSIS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "psrc/pipeline.hpp"
#include "psrc/stream.hpp"

namespace psrc {

struct ToneSpec {
    double frequency_hz = 0.0;
    double amplitude = 1.0; // linear, 1.0 = full scale
    double phase_rad = 0.0;
};

/// Sum of cosines. Tone frequencies must sit below half the rate.
SerialStream<double> gen_multitone(std::span<const ToneSpec> tones, double sample_rate_hz,
                                   std::size_t count);

/*
 * Fixed-point variant: amplitude 1.0 maps to full scale of `width`. If the
 * aggregate amplitude would clip, throws clip_error unless headroom
 * scaling is requested, in which case the peak is scaled headroom_db
 * below full scale.
 */
SerialStream<std::int64_t> gen_multitone_fixed(std::span<const ToneSpec> tones,
                                               double sample_rate_hz, std::size_t count, int width,
                                               std::optional<double> headroom_db = std::nullopt);

enum class Window { rect, hann, blackman_harris4 };

/// Periodic (DFT-even) window of length n.
std::vector<double> make_window(Window w, std::size_t n);

/// Analytic mean of the periodic window (a0 term): rect 1, hann 0.5,
/// 4-term Blackman-Harris 0.35875.
double window_coherent_gain(Window w);

/*
 * Averaged windowed periodogram. Bins are amplitude-normalized: a
 * full-scale tone at a bin center reads 0 dBFS. binsum_power is the
 * window-energy-normalized Parseval estimate of the mean square, which
 * matches time_power for stationary inputs.
 */
struct SpectrumReport {
    double sample_rate_hz = 0.0;
    int fft_size = 0;
    Window window = Window::blackman_harris4;
    int averages = 0;
    double full_scale = 1.0;
    double enbw_bins = 0.0; // equivalent noise bandwidth of the window
    std::vector<double> freq_hz;    // fft_size/2 + 1 bins
    std::vector<double> power_dbfs; // same length
    double time_power = 0.0;
    double binsum_power = 0.0;
};

SpectrumReport spectrum(const SerialStream<double>& s, int fft_size,
                        Window w = Window::blackman_harris4, double full_scale = 1.0);

/// Windowed single-frequency projection: amplitude of a steady tone at
/// `freq_hz` regardless of bin alignment.
double tone_amplitude(std::span<const double> x, double sample_rate_hz, double freq_hz,
                      Window w = Window::blackman_harris4);

/// Frequency the tone lands on after decimating `rate` by `factor`.
double folded_frequency(double freq_hz, double sample_rate_hz, std::int64_t factor);

/// End-to-end group delay of the cascade in input samples.
double cascade_group_delay_samples(const SrcConfig& cfg);

struct AliasExperiment {
    ToneSpec desired{50e3, 1.0, 0.0};
    ToneSpec alias{7.04e6, 1.0, 0.0};
    double sample_rate_hz = 20e6;
    std::size_t output_measure_count = 1 << 16;
};

struct AliasExperimentResult {
    double alias_rejection_db = 0.0;   // measured input -> output attenuation
    double predicted_rejection_db = 0.0; // -cascade_response_db at the alias
    double desired_gain_db = 0.0;        // measured through-chain tone gain
    double predicted_desired_db = 0.0;
    double folded_alias_hz = 0.0;
    double output_rate_hz = 0.0;
};

/*
 * Two-tone anti-aliasing experiment: generate desired + alias, run the
 * float-mode cascade, measure the surviving desired tone and the folded
 * alias residue in the steady-state output. The measurement floor is set
 * by the analysis window (~-140 dB); rejections predicted beyond it come
 * back floor-limited.
 */
AliasExperimentResult alias_attenuation_experiment(const SrcConfig& cfg,
                                                   const AliasExperiment& exp);

} // namespace psrc

#endif
