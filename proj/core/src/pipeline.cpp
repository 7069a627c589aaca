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
#include "psrc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace psrc {

bool factor_achievable(std::int64_t total) {
    if (total < FactorPlan::parallel_factor || total % FactorPlan::parallel_factor != 0)
        return false;
    const std::int64_t rest = total / FactorPlan::parallel_factor;
    for (int h = 3; h >= 0; --h) {
        const std::int64_t pow2 = std::int64_t{1} << h;
        if (rest % pow2 == 0 && rest / pow2 >= 1 && rest / pow2 <= 4000)
            return true;
    }
    return false;
}

FactorPlan plan_factor(std::int64_t total) {
    if (!factor_achievable(total)) {
        constexpr std::int64_t kMax = FactorPlan::parallel_factor * 4000 * 8;
        std::int64_t below = 0, above = 0;
        for (std::int64_t t = std::min(total - 1, kMax); t >= FactorPlan::parallel_factor; --t)
            if (factor_achievable(t)) {
                below = t;
                break;
            }
        for (std::int64_t t = std::max(total + 1, FactorPlan::parallel_factor); t <= kMax; ++t)
            if (factor_achievable(t)) {
                above = t;
                break;
            }
        std::string msg = "decimation factor " + std::to_string(total) +
                          " unsupported; nearest achievable:";
        if (below)
            msg += " " + std::to_string(below);
        if (above)
            msg += (below ? " and " : " ") + std::to_string(above);
        throw Error(Errc::unsupported_factor, msg);
    }
    const std::int64_t rest = total / FactorPlan::parallel_factor;
    for (int h = 3; h >= 0; --h) {
        const std::int64_t pow2 = std::int64_t{1} << h;
        if (rest % pow2 == 0 && rest / pow2 <= 4000)
            return {static_cast<int>(rest / pow2), h};
    }
    throw Error(Errc::unsupported_factor, "unreachable"); // factor_achievable said yes
}

SrcConfig SrcConfig::make_default(std::int64_t factor, NumericKind kind) {
    SrcConfig cfg;
    cfg.plan = plan_factor(factor);
    cfg.parallel_cic = CicConfig{5, 20, 1, 16, 16};
    cfg.serial_cic = CicConfig{5, cfg.plan.serial_cic_r, 1, 16, 16};
    const HalfbandCoeffs par = design_halfband(HalfbandSpec{61, 0.03, 70.0, 16});
    const HalfbandCoeffs ser = design_halfband(HalfbandSpec{119, 0.015, 70.0, 16});
    cfg.parallel_hb = {par, par};
    cfg.serial_hb = {ser, ser, ser};
    cfg.numeric = kind;
    return cfg;
}

void SrcConfig::validate() const {
    parallel_cic.validate();
    if (plan.serial_cic_r < 1 || plan.serial_cic_r > 4000)
        throw Error(Errc::invalid_config, "serial CIC ratio out of range [1, 4000]");
    if (plan.serial_hb_stages < 0 || plan.serial_hb_stages > 3)
        throw Error(Errc::invalid_config, "serial halfband stage count out of range [0, 3]");
    if (plan.serial_cic_r > 1) {
        serial_cic.validate();
        if (serial_cic.decimation != plan.serial_cic_r)
            throw Error(Errc::invalid_config, "serial CIC ratio disagrees with the factor plan");
    }
    if (parallel_hb.size() != 2)
        throw Error(Errc::invalid_config, "parallel section needs exactly 2 halfband stages");
    if (serial_hb.size() < static_cast<std::size_t>(plan.serial_hb_stages))
        throw Error(Errc::invalid_config, "missing serial halfband coefficient sets");
    if (input_lanes < 1)
        throw Error(Errc::invalid_lane_count, "input lane count must be >= 1");
    if (stage_output_width < 2 || stage_output_width > 32)
        throw Error(Errc::invalid_config, "stage output width out of range [2, 32]");
}

namespace {

/// Keep every step-th sample starting at phase 0.
template <typename T>
SerialStream<T> decimate_serial(const SerialStream<T>& in, int step) {
    SerialStream<T> out;
    out.sample_rate_hz = in.sample_rate_hz / step;
    out.samples.reserve((in.samples.size() + static_cast<std::size_t>(step) - 1) /
                        static_cast<std::size_t>(step));
    for (std::size_t k = 0; k < in.samples.size(); k += static_cast<std::size_t>(step))
        out.samples.push_back(in.samples[k]);
    return out;
}

/*
 * Float-path CIC: N recursive moving averages of length R*M, then keep
 * every R-th sample. Same transfer function as integrator/comb with the
 * per-stage 1/(R*M) normalization giving exactly unit DC gain, but the
 * bounded running sums keep double precision intact on long streams,
 * which the raw integrator recursion would not.
 */
SerialStream<double> run_serial_cic_float(const SerialStream<double>& in, const CicConfig& cfg) {
    cfg.validate();
    const auto rm =
        static_cast<std::size_t>(cfg.decimation) * static_cast<std::size_t>(cfg.diff_delay);
    const double inv = 1.0 / static_cast<double>(rm);
    std::vector<double> cur = in.samples;
    std::vector<double> ring;
    for (int s = 0; s < cfg.stages; ++s) {
        ring.assign(rm, 0.0);
        double acc = 0.0;
        std::size_t pos = 0;
        for (auto& x : cur) {
            acc += x - ring[pos];
            ring[pos] = x;
            if (++pos == rm)
                pos = 0;
            x = acc * inv;
        }
    }
    SerialStream<double> mid;
    mid.sample_rate_hz = in.sample_rate_hz;
    mid.samples = std::move(cur);
    return decimate_serial(mid, cfg.decimation);
}

SerialStream<std::int64_t> hb_stage_fixed_serial(const SerialStream<std::int64_t>& s,
                                                 const HalfbandCoeffs& c, int width) {
    TwoPathState<std::int64_t> st;
    return halfband_decimate_two_path_fixed(s, c, width, st);
}

ParallelStream<std::int64_t> hb_stage_fixed(const ParallelStream<std::int64_t>& p,
                                            const HalfbandCoeffs& c, int width) {
    if (p.lanes() == 1)
        return serial_to_parallel(hb_stage_fixed_serial(parallel_to_serial(p), c, width), 1);
    TwoPathState<std::int64_t> st;
    return halfband_decimate_two_path_fixed(p, c, width, st);
}

SerialStream<double> hb_stage_float_serial(const SerialStream<double>& s,
                                           const HalfbandCoeffs& c) {
    TwoPathState<double> st;
    return halfband_decimate_two_path(s, c, st);
}

ParallelStream<double> hb_stage_float(const ParallelStream<double>& p, const HalfbandCoeffs& c) {
    if (p.lanes() == 1)
        return serial_to_parallel(hb_stage_float_serial(parallel_to_serial(p), c), 1);
    TwoPathState<double> st;
    return halfband_decimate_two_path(p, c, st);
}

} // namespace

SerialStream<std::int64_t> run_src(const ParallelStream<std::int64_t>& in, const SrcConfig& cfg) {
    cfg.validate();
    if (in.lanes() != cfg.input_lanes)
        throw Error(Errc::invalid_frame, "input lane count does not match configuration");
    ParallelStream<std::int64_t> p = run_parallel_cic(in, cfg.parallel_cic);
    p = hb_stage_fixed(p, cfg.parallel_hb[0], cfg.stage_output_width);
    p = hb_stage_fixed(p, cfg.parallel_hb[1], cfg.stage_output_width);
    SerialStream<std::int64_t> s = parallel_to_serial(p);
    if (cfg.plan.serial_cic_r > 1)
        s = run_serial_cic(s, cfg.serial_cic);
    for (int i = 0; i < cfg.plan.serial_hb_stages; ++i)
        s = hb_stage_fixed_serial(s, cfg.serial_hb[static_cast<std::size_t>(i)],
                                  cfg.stage_output_width);
    return s;
}

SerialStream<double> run_src(const ParallelStream<double>& in, const SrcConfig& cfg) {
    cfg.validate();
    if (in.lanes() != cfg.input_lanes)
        throw Error(Errc::invalid_frame, "input lane count does not match configuration");
    // Float mode carries no bit-exactness claim; the CIC runs in its
    // numerically stable serial-equivalent form on the flattened stream.
    SerialStream<double> s = run_serial_cic_float(parallel_to_serial(in), cfg.parallel_cic);
    ParallelStream<double> p =
        serial_to_parallel(s, std::max(in.lanes() / cfg.parallel_cic.decimation, 1));
    p = hb_stage_float(p, cfg.parallel_hb[0]);
    p = hb_stage_float(p, cfg.parallel_hb[1]);
    s = parallel_to_serial(p);
    if (cfg.plan.serial_cic_r > 1)
        s = run_serial_cic_float(s, cfg.serial_cic);
    for (int i = 0; i < cfg.plan.serial_hb_stages; ++i)
        s = hb_stage_float_serial(s, cfg.serial_hb[static_cast<std::size_t>(i)]);
    return s;
}

SerialStream<std::int64_t> run_src_serial_reference(const SerialStream<std::int64_t>& in,
                                                    const SrcConfig& cfg) {
    cfg.validate();
    SerialStream<std::int64_t> s = run_serial_cic(in, cfg.parallel_cic);
    for (int i = 0; i < 2; ++i) {
        const auto& c = cfg.parallel_hb[static_cast<std::size_t>(i)];
        FirState<std::int64_t> fs;
        s = decimate_serial(
            serial_fir_fixed(s, c.quantized, c.coeff_width, cfg.stage_output_width, fs), 2);
    }
    if (cfg.plan.serial_cic_r > 1)
        s = run_serial_cic(s, cfg.serial_cic);
    for (int i = 0; i < cfg.plan.serial_hb_stages; ++i) {
        const auto& c = cfg.serial_hb[static_cast<std::size_t>(i)];
        FirState<std::int64_t> fs;
        s = decimate_serial(
            serial_fir_fixed(s, c.quantized, c.coeff_width, cfg.stage_output_width, fs), 2);
    }
    return s;
}

SerialStream<double> run_src_serial_reference(const SerialStream<double>& in,
                                              const SrcConfig& cfg) {
    cfg.validate();
    SerialStream<double> s = run_serial_cic_float(in, cfg.parallel_cic);
    for (int i = 0; i < 2; ++i) {
        FirState<double> fs;
        s = decimate_serial(serial_fir(s, cfg.parallel_hb[static_cast<std::size_t>(i)].taps, fs),
                            2);
    }
    if (cfg.plan.serial_cic_r > 1)
        s = run_serial_cic_float(s, cfg.serial_cic);
    for (int i = 0; i < cfg.plan.serial_hb_stages; ++i) {
        FirState<double> fs;
        s = decimate_serial(serial_fir(s, cfg.serial_hb[static_cast<std::size_t>(i)].taps, fs), 2);
    }
    return s;
}

namespace {

struct RespStage {
    bool is_cic = false;
    int cic_stages = 0;
    double rm = 1.0;
    const HalfbandCoeffs* hb = nullptr;
    double cum = 1.0;                 // decimation ahead of this stage
    const std::vector<double>* lut = nullptr; // |A| magnitude table for hb
};

std::vector<RespStage> response_stages(const SrcConfig& cfg) {
    std::vector<RespStage> v;
    v.push_back({true, cfg.parallel_cic.stages,
                 static_cast<double>(cfg.parallel_cic.decimation) * cfg.parallel_cic.diff_delay,
                 nullptr, 1.0, nullptr});
    double cum = cfg.parallel_cic.decimation;
    for (int i = 0; i < 2; ++i) {
        v.push_back({false, 0, 1.0, &cfg.parallel_hb[static_cast<std::size_t>(i)], cum, nullptr});
        cum *= 2;
    }
    if (cfg.plan.serial_cic_r > 1) {
        v.push_back({true, cfg.serial_cic.stages,
                     static_cast<double>(cfg.serial_cic.decimation) * cfg.serial_cic.diff_delay,
                     nullptr, cum, nullptr});
        cum *= cfg.serial_cic.decimation;
    }
    for (int i = 0; i < cfg.plan.serial_hb_stages; ++i) {
        v.push_back({false, 0, 1.0, &cfg.serial_hb[static_cast<std::size_t>(i)], cum, nullptr});
        cum *= 2;
    }
    return v;
}

double cic_mag(int stages, double rm, double f) {
    const double fr = f - std::floor(f);
    if (fr == 0.0)
        return 1.0;
    const double den = rm * std::fabs(std::sin(M_PI * fr));
    if (den == 0.0)
        return 1.0;
    const double ratio = std::fabs(std::sin(M_PI * fr * rm)) / den;
    double m = 1.0;
    for (int i = 0; i < stages; ++i)
        m *= ratio;
    return m;
}

double hb_lut_mag(const std::vector<double>& lut, double f) {
    double fr = f - std::floor(f);
    if (fr > 0.5)
        fr = 1.0 - fr;
    const double x = fr * 2.0 * static_cast<double>(lut.size() - 1);
    const auto i = std::min(static_cast<std::size_t>(x), lut.size() - 2);
    const double t = x - static_cast<double>(i);
    return lut[i] + t * (lut[i + 1] - lut[i]);
}

double stage_mag(const RespStage& st, double f) {
    const double x = f * st.cum;
    if (st.is_cic)
        return cic_mag(st.cic_stages, st.rm, x);
    if (st.lut)
        return hb_lut_mag(*st.lut, x);
    return std::fabs(halfband_amplitude(*st.hb, x));
}

double composite_mag(const std::vector<RespStage>& stages, double f) {
    double m = 1.0;
    for (const auto& st : stages)
        m *= stage_mag(st, f);
    return m;
}

double mag_to_db(double m) {
    return std::max(20.0 * std::log10(std::max(m, 1e-300)), -300.0);
}

/// Exact scan of every alias band; returns the worst composite magnitude.
double exact_band_scan(const std::vector<RespStage>& stages, std::int64_t total, double fp,
                       int pts) {
    double worst = 0.0;
    for (std::int64_t k = 1; k <= total / 2; ++k) {
        const double center = static_cast<double>(k) / static_cast<double>(total);
        const double lo = center - fp;
        const double hi = std::min(center + fp, 0.5);
        if (lo > 0.5)
            break;
        for (int i = 0; i <= pts; ++i) {
            const double f = lo + (hi - lo) * i / pts;
            worst = std::max(worst, composite_mag(stages, f));
        }
    }
    return worst;
}

/*
 * Large factors have up to total/2 alias bands; a full exact scan would
 * be minutes of work. Halfband responses are tabulated once, bands are
 * scanned coarsely, and only bands within 40 dB of the coarse worst case
 * get a dense pass; the winning neighborhood is re-measured exactly.
 */
double lut_band_scan(std::vector<RespStage> stages, std::int64_t total, double fp) {
    constexpr int kLutPoints = 1 << 20;
    std::vector<std::vector<double>> luts;
    luts.reserve(stages.size());
    for (const auto& st : stages) {
        if (st.is_cic)
            continue;
        std::vector<double> lut(kLutPoints + 1);
        for (int i = 0; i <= kLutPoints; ++i)
            lut[static_cast<std::size_t>(i)] =
                std::fabs(halfband_amplitude(*st.hb, 0.5 * i / kLutPoints));
        luts.push_back(std::move(lut));
    }
    std::size_t li = 0;
    for (auto& st : stages)
        if (!st.is_cic)
            st.lut = &luts[li++];

    const auto bands = total / 2;
    constexpr int kCoarse = 8;
    std::vector<double> band_max(static_cast<std::size_t>(bands) + 1, 0.0);
    double global = 0.0;
    for (std::int64_t k = 1; k <= bands; ++k) {
        const double center = static_cast<double>(k) / static_cast<double>(total);
        const double lo = center - fp;
        const double hi = std::min(center + fp, 0.5);
        if (lo > 0.5)
            break;
        double m = 0.0;
        for (int i = 0; i <= kCoarse; ++i)
            m = std::max(m, composite_mag(stages, lo + (hi - lo) * i / kCoarse));
        band_max[static_cast<std::size_t>(k)] = m;
        global = std::max(global, m);
    }
    const double guard = global * 0.01; // 40 dB below the coarse worst
    constexpr int kDense = 512;
    double best = 0.0, best_f = 0.0, best_step = 0.0;
    for (std::int64_t k = 1; k <= bands; ++k) {
        if (band_max[static_cast<std::size_t>(k)] < guard)
            continue;
        const double center = static_cast<double>(k) / static_cast<double>(total);
        const double lo = center - fp;
        const double hi = std::min(center + fp, 0.5);
        for (int i = 0; i <= kDense; ++i) {
            const double f = lo + (hi - lo) * i / kDense;
            const double m = composite_mag(stages, f);
            if (m > best) {
                best = m;
                best_f = f;
                best_step = (hi - lo) / kDense;
            }
        }
    }
    // exact re-measurement around the dense winner
    for (auto& st : stages)
        st.lut = nullptr;
    double worst = 0.0;
    constexpr int kRefine = 256;
    for (int i = -kRefine; i <= kRefine; ++i) {
        const double f = best_f + best_step * 2.0 * i / kRefine;
        if (f <= 0.0 || f > 0.5)
            continue;
        worst = std::max(worst, composite_mag(stages, f));
    }
    return worst;
}

} // namespace

double cascade_response_db(const SrcConfig& cfg, double f) {
    const auto stages = response_stages(cfg);
    double db = 0.0;
    for (const auto& st : stages)
        db += std::max(20.0 * std::log10(std::max(stage_mag(st, f), 1e-300)), -300.0);
    return db;
}

ResponseReport cascade_response(const SrcConfig& cfg, const ResponseOptions& opts) {
    cfg.validate();
    const auto stages = response_stages(cfg);
    const std::int64_t total = cfg.plan.total();
    const double fp = kPassbandFraction * 0.5 / static_cast<double>(total);

    ResponseReport rep;
    rep.decimation_factor = total;
    rep.passband_edge = fp;

    constexpr int kPbPts = 4096;
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i <= kPbPts; ++i) {
        const double db = mag_to_db(composite_mag(stages, fp * i / kPbPts));
        lo = std::min(lo, db);
        hi = std::max(hi, db);
    }
    rep.passband_ripple_db = hi - lo;

    const double worst = total <= 1024 ? exact_band_scan(stages, total, fp, 512)
                                       : lut_band_scan(stages, total, fp);
    rep.stopband_atten_db = -mag_to_db(worst);

    if (opts.plot_points > 1) {
        rep.response.reserve(static_cast<std::size_t>(opts.plot_points));
        for (int i = 0; i < opts.plot_points; ++i) {
            const double f = 0.5 * i / (opts.plot_points - 1);
            rep.response.emplace_back(f, mag_to_db(composite_mag(stages, f)));
        }
    }
    return rep;
}

} // namespace psrc
