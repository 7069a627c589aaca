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
#include "psrc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>

#include "psrc/fixed.hpp"

namespace psrc {

namespace {

void check_tones(std::span<const ToneSpec> tones, double rate) {
    if (tones.empty())
        throw Error(Errc::invalid_config, "tone list must not be empty");
    for (const auto& t : tones)
        if (!(t.frequency_hz < rate / 2.0) || t.frequency_hz < 0.0)
            throw Error(Errc::invalid_config, "tone frequency outside [0, rate/2)");
}

double tone_sum(std::span<const ToneSpec> tones, double omega_scale, std::size_t n) {
    double v = 0.0;
    for (const auto& t : tones)
        v += t.amplitude * std::cos(omega_scale * t.frequency_hz * static_cast<double>(n) +
                                    t.phase_rad);
    return v;
}

/// In-place radix-2 FFT with a precomputed twiddle table.
void fft_radix2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1)
            j ^= bit;
        j ^= bit;
        if (i < j)
            std::swap(a[i], a[j]);
    }
    std::vector<std::complex<double>> tw(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k)
        tw[k] = std::polar(1.0, -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n));
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t step = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * tw[j * step];
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
            }
        }
    }
}

} // namespace

SerialStream<double> gen_multitone(std::span<const ToneSpec> tones, double sample_rate_hz,
                                   std::size_t count) {
    check_tones(tones, sample_rate_hz);
    SerialStream<double> s;
    s.sample_rate_hz = sample_rate_hz;
    s.samples.resize(count);
    const double w = 2.0 * M_PI / sample_rate_hz;
    for (std::size_t n = 0; n < count; ++n)
        s.samples[n] = tone_sum(tones, w, n);
    return s;
}

SerialStream<std::int64_t> gen_multitone_fixed(std::span<const ToneSpec> tones,
                                               double sample_rate_hz, std::size_t count, int width,
                                               std::optional<double> headroom_db) {
    check_tones(tones, sample_rate_hz);
    if (width < 2 || width > 32)
        throw Error(Errc::invalid_config, "sample width out of range [2, 32]");
    double aggregate = 0.0;
    for (const auto& t : tones)
        aggregate += std::fabs(t.amplitude);
    double scale = static_cast<double>(fixed_max(width));
    if (headroom_db) {
        scale *= std::pow(10.0, -*headroom_db / 20.0) / std::max(aggregate, 1e-300);
    } else if (aggregate > 1.0) {
        throw Error(Errc::clip_error, "aggregate amplitude " + std::to_string(aggregate) +
                                          " would clip; request headroom scaling");
    }
    SerialStream<std::int64_t> s;
    s.sample_rate_hz = sample_rate_hz;
    s.samples.resize(count);
    const double w = 2.0 * M_PI / sample_rate_hz;
    for (std::size_t n = 0; n < count; ++n) {
        const double v = tone_sum(tones, w, n) * scale;
        s.samples[n] = std::clamp(static_cast<std::int64_t>(std::floor(v + 0.5)),
                                  fixed_min(width), fixed_max(width));
    }
    return s;
}

std::vector<double> make_window(Window w, std::size_t n) {
    std::vector<double> win(n, 1.0);
    const double step = 2.0 * M_PI / static_cast<double>(n);
    switch (w) {
    case Window::rect:
        break;
    case Window::hann:
        for (std::size_t i = 0; i < n; ++i)
            win[i] = 0.5 - 0.5 * std::cos(step * static_cast<double>(i));
        break;
    case Window::blackman_harris4:
        for (std::size_t i = 0; i < n; ++i) {
            const double x = step * static_cast<double>(i);
            win[i] = 0.35875 - 0.48829 * std::cos(x) + 0.14128 * std::cos(2.0 * x) -
                     0.01168 * std::cos(3.0 * x);
        }
        break;
    }
    return win;
}

double window_coherent_gain(Window w) {
    switch (w) {
    case Window::rect:
        return 1.0;
    case Window::hann:
        return 0.5;
    case Window::blackman_harris4:
        return 0.35875;
    }
    return 1.0;
}

SpectrumReport spectrum(const SerialStream<double>& s, int fft_size, Window w,
                        double full_scale) {
    if (fft_size < 2 || (fft_size & (fft_size - 1)) != 0)
        throw Error(Errc::invalid_config, "FFT size must be a power of two >= 2");
    if (s.samples.size() < static_cast<std::size_t>(fft_size))
        throw Error(Errc::insufficient_data, "stream shorter than one FFT frame");

    const auto nfft = static_cast<std::size_t>(fft_size);
    const std::size_t segments = s.samples.size() / nfft;
    const std::vector<double> win = make_window(w, nfft);
    const double wsum = std::accumulate(win.begin(), win.end(), 0.0);
    const double w2sum =
        std::inner_product(win.begin(), win.end(), win.begin(), 0.0);

    std::vector<double> mean_p(nfft / 2 + 1, 0.0);
    std::vector<std::complex<double>> buf(nfft);
    double binsum = 0.0, timesum = 0.0;
    for (std::size_t seg = 0; seg < segments; ++seg) {
        const double* x = s.samples.data() + seg * nfft;
        for (std::size_t i = 0; i < nfft; ++i) {
            buf[i] = {win[i] * x[i], 0.0};
            timesum += x[i] * x[i];
        }
        fft_radix2(buf);
        double total = 0.0;
        for (std::size_t k = 0; k < nfft; ++k)
            total += std::norm(buf[k]);
        binsum += total / (static_cast<double>(nfft) * w2sum);
        for (std::size_t k = 0; k <= nfft / 2; ++k)
            mean_p[k] += std::norm(buf[k]);
    }

    SpectrumReport rep;
    rep.sample_rate_hz = s.sample_rate_hz;
    rep.fft_size = fft_size;
    rep.window = w;
    rep.averages = static_cast<int>(segments);
    rep.full_scale = full_scale;
    rep.enbw_bins = static_cast<double>(nfft) * w2sum / (wsum * wsum);
    rep.freq_hz.resize(nfft / 2 + 1);
    rep.power_dbfs.resize(nfft / 2 + 1);
    rep.time_power = timesum / (static_cast<double>(segments) * static_cast<double>(nfft));
    rep.binsum_power = binsum / static_cast<double>(segments);
    for (std::size_t k = 0; k <= nfft / 2; ++k) {
        const double rms_mag = std::sqrt(mean_p[k] / static_cast<double>(segments));
        const double two = (k == 0 || k == nfft / 2) ? 1.0 : 2.0;
        const double amp = two * rms_mag / wsum;
        rep.freq_hz[k] = s.sample_rate_hz * static_cast<double>(k) / static_cast<double>(nfft);
        rep.power_dbfs[k] =
            std::max(20.0 * std::log10(std::max(amp / full_scale, 1e-300)), -400.0);
    }
    return rep;
}

double tone_amplitude(std::span<const double> x, double sample_rate_hz, double freq_hz,
                      Window w) {
    if (x.empty())
        throw Error(Errc::insufficient_data, "empty measurement span");
    const std::vector<double> win = make_window(w, x.size());
    const double wsum = std::accumulate(win.begin(), win.end(), 0.0);
    const double omega = 2.0 * M_PI * freq_hz / sample_rate_hz;
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t n = 0; n < x.size(); ++n) {
        const double phi = omega * static_cast<double>(n);
        acc += win[n] * x[n] * std::complex<double>(std::cos(phi), -std::sin(phi));
    }
    const double two = freq_hz == 0.0 ? 1.0 : 2.0;
    return two * std::abs(acc) / wsum;
}

double folded_frequency(double freq_hz, double sample_rate_hz, std::int64_t factor) {
    const double out_rate = sample_rate_hz / static_cast<double>(factor);
    double r = std::fmod(freq_hz, out_rate);
    if (r < 0)
        r += out_rate;
    if (r > out_rate / 2.0)
        r = out_rate - r;
    return r;
}

double cascade_group_delay_samples(const SrcConfig& cfg) {
    // linear-phase stages: CIC N(RM-1)/2, FIR (len-1)/2, in own-rate samples
    auto cic_delay = [](const CicConfig& c) {
        return c.stages * (static_cast<double>(c.decimation) * c.diff_delay - 1.0) / 2.0;
    };
    double delay = cic_delay(cfg.parallel_cic);
    double cum = cfg.parallel_cic.decimation;
    for (int i = 0; i < 2; ++i) {
        delay += cum * cfg.parallel_hb[static_cast<std::size_t>(i)].half_order();
        cum *= 2;
    }
    if (cfg.plan.serial_cic_r > 1)
        delay += cum * cic_delay(cfg.serial_cic);
    cum *= cfg.plan.serial_cic_r;
    for (int i = 0; i < cfg.plan.serial_hb_stages; ++i) {
        delay += cum * cfg.serial_hb[static_cast<std::size_t>(i)].half_order();
        cum *= 2;
    }
    return delay;
}

AliasExperimentResult alias_attenuation_experiment(const SrcConfig& cfg,
                                                   const AliasExperiment& exp) {
    cfg.validate();
    const std::int64_t total = cfg.plan.total();
    const double rate = exp.sample_rate_hz;
    const double out_rate = rate / static_cast<double>(total);
    if (!(exp.desired.frequency_hz < out_rate / 2.0))
        throw Error(Errc::invalid_config, "desired tone must sit below the output Nyquist");
    if (!(exp.alias.frequency_hz > out_rate / 2.0))
        throw Error(Errc::invalid_config, "alias tone must sit above the output Nyquist");

    const double folded = folded_frequency(exp.alias.frequency_hz, rate, total);
    const double bin = out_rate / static_cast<double>(exp.output_measure_count);
    if (std::fabs(folded - exp.desired.frequency_hz) < 16.0 * bin)
        throw Error(Errc::invalid_config,
                    "alias folds onto the desired tone; measurements would not separate");

    // steady-state measurement: skip twice the cascade group delay
    const double gd = cascade_group_delay_samples(cfg);
    const std::size_t skip_out = static_cast<std::size_t>(2.0 * gd / static_cast<double>(total)) + 8;
    const std::size_t need_out = skip_out + exp.output_measure_count;
    const std::size_t need_in = (need_out + 1) * static_cast<std::size_t>(total);

    const ToneSpec tones[2] = {exp.desired, exp.alias};
    const SerialStream<double> input = gen_multitone(tones, rate, need_in);
    const SerialStream<double> out =
        run_src(serial_to_parallel(input, cfg.input_lanes), cfg);
    if (out.samples.size() < need_out)
        throw Error(Errc::insufficient_data, "cascade produced fewer samples than planned");

    const std::span<const double> meas{out.samples.data() + skip_out, exp.output_measure_count};
    const double amp_desired = tone_amplitude(meas, out_rate, exp.desired.frequency_hz);
    const double amp_alias = tone_amplitude(meas, out_rate, folded);

    AliasExperimentResult res;
    res.output_rate_hz = out_rate;
    res.folded_alias_hz = folded;
    res.desired_gain_db = 20.0 * std::log10(std::max(amp_desired / exp.desired.amplitude, 1e-300));
    res.alias_rejection_db =
        -20.0 * std::log10(std::max(amp_alias / exp.alias.amplitude, 1e-300));
    res.predicted_desired_db = cascade_response_db(cfg, exp.desired.frequency_hz / rate);
    res.predicted_rejection_db = -cascade_response_db(cfg, exp.alias.frequency_hz / rate);
    return res;
}

} // namespace psrc
