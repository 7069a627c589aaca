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

/*
 * psrc - parallel-serial sample rate converter CLI.
 *
 * Subcommands:
 *   design    halfband / CIC design: coefficient files and responses
 *   process   decimate a sample file through the cascade
 *   respond   composite magnitude response and measurements
 *   simulate  anti-aliasing experiments (multitone, two-tone alias)
 *   verify    parallel-vs-serial bit-exactness sweeps
 *
 * Exit codes: 0 ok, 2 usage, 3 I/O, 4 design infeasible, 5 verification
 * failure, 6 unsupported factor, 1 other error.
 */

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "psrc/analysis.hpp"
#include "psrc/cic.hpp"
#include "psrc/halfband.hpp"
#include "psrc/io.hpp"
#include "psrc/pipeline.hpp"
#include "psrc/stream.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using namespace psrc;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitInfeasible = 4;
constexpr int kExitVerify = 5;
constexpr int kExitFactor = 6;
constexpr int kExitOther = 1;

int exit_code_for(const Error& e) {
    switch (e.code()) {
    case Errc::io_error:
        return kExitIo;
    case Errc::design_infeasible:
        return kExitInfeasible;
    case Errc::unsupported_factor:
        return kExitFactor;
    case Errc::invalid_config:
    case Errc::invalid_lane_count:
        return kExitUsage;
    default:
        return kExitOther;
    }
}

/// Bare filenames land in $PSRC_OUTPUT_DIR when it is set.
fs::path out_path(const std::string& name) {
    fs::path p(name);
    if (p.has_parent_path())
        return p;
    if (const char* dir = std::getenv("PSRC_OUTPUT_DIR"))
        return fs::path(dir) / p;
    return p;
}

void write_json_file(const fs::path& path, const json& j) {
    std::ofstream f(path, std::ios::trunc);
    if (!f)
        throw Error(Errc::io_error, "cannot open " + path.string() + " for writing");
    f << j.dump(2) << "\n";
}

// ---------------------------------------------------------------- design

int cmd_design(bool cic_mode, int hb_order, double transition, double atten, int coeff_width,
               int stages, int ratio, int delay, int width, const std::string& output) {
    if (cic_mode) {
        const CicConfig cfg{stages, ratio, delay, width, width};
        cfg.validate();
        std::cout << "CIC design: stages=" << cfg.stages << " decimation=" << cfg.decimation
                  << " diff_delay=" << cfg.diff_delay << " input_width=" << cfg.input_width
                  << " output_width=" << cfg.output_width
                  << " internal_width=" << cfg.internal_width() << "\n";
        const fs::path csv = out_path(output.empty() ? "cic_response.csv" : output);
        std::ofstream f(csv, std::ios::trunc);
        if (!f)
            throw Error(Errc::io_error, "cannot open " + csv.string());
        f << "freq_norm,magnitude_db\n";
        constexpr int kPts = 4096;
        for (int i = 0; i <= kPts; ++i) {
            const double fr = 0.5 * i / kPts;
            f << fr << "," << cic_magnitude_response_db(cfg, fr) << "\n";
        }
        std::cout << "response written to " << csv.string() << "\n";
        return kExitOk;
    }

    if (hb_order < 2 || hb_order % 2 != 0)
        throw Error(Errc::invalid_config, "halfband order must be a positive even number");
    const HalfbandSpec spec{hb_order / 2, transition, atten, coeff_width};
    const HalfbandCoeffs c = design_halfband(spec);
    const fs::path csv =
        out_path(output.empty() ? "hb" + std::to_string(hb_order) + ".csv" : output);
    write_coeffs(csv, c);
    std::cout << "halfband order " << hb_order << ": transition " << transition << ", achieved "
              << c.measured_stopband_db << " dB stopband (target " << atten << "), passband ripple "
              << c.measured_ripple_db << " dB\n"
              << "coefficients written to " << csv.string() << "\n";
    return kExitOk;
}

// --------------------------------------------------------------- process

int cmd_process(const std::string& input, const std::string& output, std::int64_t factor,
                const std::string& config_path, bool use_float, int lanes, double rate_override,
                const std::string& report_path) {
    RunConfig rc;
    if (!config_path.empty())
        rc = load_run_config(config_path);
    rc.factor = factor > 0 ? factor : rc.factor;
    if (use_float)
        rc.numeric = NumericKind::real;
    if (lanes > 0)
        rc.input_lanes = lanes;
    rc.input_path = input;
    rc.output_path = output;

    const SrcConfig cfg = to_src_config(rc);

    SerialStream<std::int64_t> in = read_i16(input);
    if (rate_override > 0)
        in.sample_rate_hz = rate_override;
    if (in.sample_rate_hz <= 0)
        in.sample_rate_hz = rc.sample_rate_hz;

    std::size_t out_count = 0;
    const fs::path out_file = out_path(output);
    if (rc.numeric == NumericKind::fixed) {
        const auto out = run_src(serial_to_parallel(in, rc.input_lanes), cfg);
        write_i16(out_file, out);
        out_count = out.samples.size();
    } else {
        SerialStream<double> fin;
        fin.sample_rate_hz = in.sample_rate_hz;
        fin.samples.assign(in.samples.begin(), in.samples.end());
        const auto out = run_src(serial_to_parallel(fin, rc.input_lanes), cfg);
        SerialStream<std::int64_t> q;
        q.sample_rate_hz = out.sample_rate_hz;
        q.samples.reserve(out.samples.size());
        for (const auto v : out.samples)
            q.samples.push_back(std::clamp<std::int64_t>(
                static_cast<std::int64_t>(std::floor(v + 0.5)), fixed_min(16), fixed_max(16)));
        write_i16(out_file, q);
        out_count = q.samples.size();
    }

    json rep;
    rep["input"] = input;
    rep["output"] = out_file.string();
    rep["input_count"] = in.samples.size();
    rep["output_count"] = out_count;
    rep["input_rate_hz"] = in.sample_rate_hz;
    rep["output_rate_hz"] = in.sample_rate_hz / static_cast<double>(cfg.plan.total());
    rep["factor"] = cfg.plan.total();
    rep["plan"] = {{"parallel", FactorPlan::parallel_factor},
                   {"serial_cic_r", cfg.plan.serial_cic_r},
                   {"serial_hb_stages", cfg.plan.serial_hb_stages}};
    rep["numeric"] = rc.numeric == NumericKind::fixed ? "fixed" : "float";
    rep["config"] = json::parse(run_config_json(rc));
    const fs::path rp =
        report_path.empty() ? fs::path(out_file.string() + ".report.json") : out_path(report_path);
    write_json_file(rp, rep);
    std::cout << "processed " << in.samples.size() << " -> " << out_count << " samples (factor "
              << cfg.plan.total() << "), report " << rp.string() << "\n";
    return kExitOk;
}

// --------------------------------------------------------------- respond

int cmd_respond(std::int64_t factor, int points, const std::string& output,
                const std::string& summary, const std::string& par_coeffs,
                const std::string& ser_coeffs) {
    auto cfg = SrcConfig::make_default(factor, NumericKind::real);
    if (!par_coeffs.empty()) {
        const auto c = read_coeffs(par_coeffs);
        cfg.parallel_hb = {c, c};
    }
    if (!ser_coeffs.empty()) {
        const auto c = read_coeffs(ser_coeffs);
        cfg.serial_hb = {c, c, c};
    }
    ResponseOptions opts;
    opts.plot_points = points;
    const ResponseReport rep = cascade_response(cfg, opts);
    const fs::path csv =
        out_path(output.empty() ? "response_" + std::to_string(factor) + ".csv" : output);
    write_response_csv(csv, rep);
    const fs::path sum = out_path(
        summary.empty() ? "response_" + std::to_string(factor) + ".json" : summary);
    write_response_summary(sum, rep);
    std::cout << "factor " << factor << ": passband ripple " << rep.passband_ripple_db
              << " dB, stopband attenuation " << rep.stopband_atten_db << " dB\n"
              << "response " << csv.string() << ", summary " << sum.string() << "\n";
    return kExitOk;
}

// -------------------------------------------------------------- simulate

int cmd_simulate(bool antialias, bool multitone, std::int64_t factor, double rate,
                 double desired_hz, double alias_hz, const std::string& summary,
                 const std::string& spectrum_prefix) {
    const auto cfg = SrcConfig::make_default(factor, NumericKind::real);
    json j;
    j["factor"] = factor;
    j["sample_rate_hz"] = rate;

    if (multitone) {
        // desk-scale analog of the eight-tone passband check
        std::vector<ToneSpec> tones;
        const double base = rate / 2000.0; // 10 MHz at 20 GSPS
        for (int i = 1; i <= 8; ++i)
            tones.push_back({base * i, 1.0, 0.0});
        const double out_rate = rate / static_cast<double>(factor);
        const double gd = cascade_group_delay_samples(cfg);
        const std::size_t measure = 1 << 15;
        const std::size_t skip =
            static_cast<std::size_t>(2.0 * gd / static_cast<double>(factor)) + 8;
        const std::size_t need_in = (skip + measure + 8) * static_cast<std::size_t>(factor);
        const auto in = gen_multitone(tones, rate, need_in);
        const auto out = run_src(serial_to_parallel(in, cfg.input_lanes), cfg);
        const std::span<const double> meas{out.samples.data() + skip, measure};
        json per_tone = json::array();
        double worst = 0.0;
        for (const auto& t : tones) {
            const double amp = tone_amplitude(meas, out_rate, t.frequency_hz);
            const double err = 20.0 * std::log10(amp / t.amplitude);
            worst = std::max(worst, std::fabs(err));
            per_tone.push_back({{"freq_hz", t.frequency_hz}, {"gain_db", err}});
            std::cout << "tone " << t.frequency_hz << " Hz: gain " << err << " dB\n";
        }
        j["multitone"] = {{"tones", per_tone}, {"worst_abs_gain_db", worst}};
        std::cout << "worst tone amplitude error: " << worst << " dB\n";
        if (!spectrum_prefix.empty()) {
            write_spectrum_csv(out_path(spectrum_prefix + "_multitone_in.csv"),
                               spectrum(in, 1 << 14));
            write_spectrum_csv(out_path(spectrum_prefix + "_multitone_out.csv"),
                               spectrum(out, 1 << 12));
        }
    }

    if (antialias) {
        AliasExperiment exp;
        exp.sample_rate_hz = rate;
        exp.desired = {desired_hz, 1.0, 0.0};
        exp.alias = {alias_hz, 1.0, 0.0};
        const auto res = alias_attenuation_experiment(cfg, exp);
        std::cout << "alias " << alias_hz << " Hz folds to " << res.folded_alias_hz
                  << " Hz: measured rejection " << res.alias_rejection_db
                  << " dB (predicted " << res.predicted_rejection_db << " dB)\n"
                  << "desired " << desired_hz << " Hz: gain " << res.desired_gain_db
                  << " dB (predicted " << res.predicted_desired_db << " dB)\n";
        j["antialias"] = {{"desired_hz", desired_hz},
                          {"alias_hz", alias_hz},
                          {"folded_alias_hz", res.folded_alias_hz},
                          {"measured_rejection_db", res.alias_rejection_db},
                          {"predicted_rejection_db", res.predicted_rejection_db},
                          {"desired_gain_db", res.desired_gain_db},
                          {"predicted_desired_db", res.predicted_desired_db}};
        if (!spectrum_prefix.empty()) {
            const ToneSpec tones[2] = {exp.desired, exp.alias};
            const auto in = gen_multitone(tones, rate, 1 << 18);
            write_spectrum_csv(out_path(spectrum_prefix + "_antialias_in.csv"),
                               spectrum(in, 1 << 14));
            const auto out = run_src(serial_to_parallel(in, cfg.input_lanes), cfg);
            write_spectrum_csv(out_path(spectrum_prefix + "_antialias_out.csv"),
                               spectrum(out, 1 << 10));
        }
    }

    const fs::path sum = out_path(
        summary.empty() ? "simulate_" + std::to_string(factor) + ".json" : summary);
    write_json_file(sum, j);
    std::cout << "summary " << sum.string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- verify

struct VerifyCase {
    int lanes, stages, r, m;
};

int cmd_verify(std::uint64_t seed, std::size_t samples, bool full) {
    std::vector<VerifyCase> grid;
    const auto lanes_set = std::vector<int>{2, 4, 8, 6, 80};
    const auto n_set = std::vector<int>{1, 3, 5};
    const auto r_set = std::vector<int>{1, 2, 20};
    const auto m_set = std::vector<int>{1, 2};
    for (const int l : lanes_set)
        for (const int n : n_set)
            for (const int r : r_set)
                for (const int m : m_set)
                    grid.push_back({l, n, r, m});

    std::cout << "verify: seed=" << seed << " samples=" << samples << "\n";
    int failures = 0;
    for (const auto& vc : grid) {
        const CicConfig cfg{vc.stages, vc.r, vc.m, 16, 16};
        std::mt19937_64 rng(seed ^ (static_cast<std::uint64_t>(vc.lanes) << 40) ^
                            (static_cast<std::uint64_t>(vc.stages) << 24) ^
                            (static_cast<std::uint64_t>(vc.r) << 8) ^
                            static_cast<std::uint64_t>(vc.m));
        SerialStream<std::int64_t> in;
        in.sample_rate_hz = 1e6;
        in.samples.resize(samples);
        std::uniform_int_distribution<std::int64_t> dist(-32768, 32767);
        for (auto& s : in.samples)
            s = dist(rng);
        const auto serial = run_serial_cic(in, cfg);
        const auto parallel = parallel_to_serial(run_parallel_cic(serial_to_parallel(in, vc.lanes), cfg));
        std::size_t diverge = serial.samples.size();
        if (parallel.samples.size() != serial.samples.size()) {
            diverge = std::min(parallel.samples.size(), serial.samples.size());
        } else {
            for (std::size_t i = 0; i < serial.samples.size(); ++i)
                if (parallel.samples[i] != serial.samples[i]) {
                    diverge = i;
                    break;
                }
        }
        if (diverge != serial.samples.size() ||
            parallel.samples.size() != serial.samples.size()) {
            ++failures;
            std::cout << "FAIL cic L=" << vc.lanes << " N=" << vc.stages << " R=" << vc.r
                      << " M=" << vc.m << " first divergence at output index " << diverge;
            if (diverge < std::min(parallel.samples.size(), serial.samples.size()))
                std::cout << " (parallel=" << parallel.samples[diverge]
                          << " serial=" << serial.samples[diverge] << ")";
            std::cout << "\n";
        } else {
            std::cout << "ok cic L=" << vc.lanes << " N=" << vc.stages << " R=" << vc.r
                      << " M=" << vc.m << "\n";
        }
    }

    // end-to-end plans against the all-serial reference chain
    const auto factors =
        full ? std::vector<std::int64_t>{80, 160, 320, 640, 1600, 3200}
             : std::vector<std::int64_t>{80, 160, 320};
    for (const auto factor : factors) {
        const auto cfg = SrcConfig::make_default(factor, NumericKind::fixed);
        std::mt19937_64 rng(seed ^ static_cast<std::uint64_t>(factor));
        SerialStream<std::int64_t> in;
        in.sample_rate_hz = 20e6;
        in.samples.resize(std::max<std::size_t>(samples, static_cast<std::size_t>(factor) * 8));
        std::uniform_int_distribution<std::int64_t> dist(-32768, 32767);
        for (auto& s : in.samples)
            s = dist(rng);
        const auto want = run_src_serial_reference(in, cfg);
        const auto got = run_src(serial_to_parallel(in, cfg.input_lanes), cfg);
        std::size_t diverge = want.samples.size();
        if (got.samples.size() != want.samples.size())
            diverge = std::min(got.samples.size(), want.samples.size());
        else
            for (std::size_t i = 0; i < want.samples.size(); ++i)
                if (got.samples[i] != want.samples[i]) {
                    diverge = i;
                    break;
                }
        if (diverge != want.samples.size() || got.samples.size() != want.samples.size()) {
            ++failures;
            std::cout << "FAIL src factor=" << factor << " first divergence at output index "
                      << diverge << "\n";
        } else {
            std::cout << "ok src factor=" << factor << "\n";
        }
    }

    if (failures) {
        std::cout << failures << " case(s) failed\n";
        return kExitVerify;
    }
    std::cout << "all " << grid.size() + factors.size() << " cases bit-exact\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"psrc: cascaded parallel-serial sample rate converter"};
    app.require_subcommand(1);

    // design
    auto* design = app.add_subcommand("design", "design halfband coefficients or a CIC response");
    bool cic_mode = false;
    int hb_order = 0, coeff_width = 16, stages = 5, ratio = 20, delay = 1, width = 16;
    double transition = 0.03, atten = 70.0;
    std::string output;
    design->add_flag("--cic", cic_mode, "CIC mode: emit the configured response");
    design->add_option("--hb-order", hb_order, "halfband FIR order (even; length order+1)");
    design->add_option("--transition", transition, "one-sided transition width about f=0.25");
    design->add_option("--atten", atten, "target stopband attenuation, dB");
    design->add_option("--coeff-width", coeff_width, "coefficient quantization width, bits");
    design->add_option("--stages", stages, "CIC stages N");
    design->add_option("--ratio", ratio, "CIC decimation R");
    design->add_option("--delay", delay, "CIC differential delay M");
    design->add_option("--width", width, "CIC sample width, bits");
    design->add_option("-o,--output", output, "output file");

    // process
    auto* process = app.add_subcommand("process", "decimate a sample file");
    std::string in_file, out_file, config_path, report_path;
    std::int64_t factor = 0;
    bool use_float = false;
    int lanes = 0;
    double rate_override = 0.0;
    process->add_option("--input,-i", in_file, "input .i16 file")->required();
    process->add_option("--output,-o", out_file, "output .i16 file")->required();
    process->add_option("--factor,-f", factor, "total decimation factor");
    process->add_option("--config,-c", config_path, "run configuration JSON");
    process->add_flag("--float", use_float, "float datapath instead of fixed");
    process->add_option("--lanes", lanes, "input lane count (default 80)");
    process->add_option("--rate", rate_override, "input sample rate, Hz");
    process->add_option("--report", report_path, "run report JSON path");

    // respond
    auto* respond = app.add_subcommand("respond", "composite magnitude response");
    std::int64_t r_factor = 80;
    int points = 4097;
    std::string r_output, r_summary, r_par_coeffs, r_ser_coeffs;
    respond->add_option("--factor,-f", r_factor, "total decimation factor")->required();
    respond->add_option("--points", points, "plot grid points");
    respond->add_option("-o,--output", r_output, "response CSV path");
    respond->add_option("--summary", r_summary, "summary JSON path");
    respond->add_option("--par-coeffs", r_par_coeffs, "parallel-stage halfband coefficient CSV");
    respond->add_option("--ser-coeffs", r_ser_coeffs, "serial-stage halfband coefficient CSV");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "signal-level experiments");
    bool antialias = false, multitone = false;
    std::int64_t s_factor = 80;
    double s_rate = 20e6, desired_hz = 50e3, alias_hz = 7.04e6;
    std::string s_summary, spectrum_prefix;
    simulate->add_flag("--antialias", antialias, "two-tone alias rejection experiment");
    simulate->add_flag("--multitone", multitone, "eight-tone passband experiment");
    simulate->add_option("--factor,-f", s_factor, "total decimation factor");
    simulate->add_option("--rate", s_rate, "sample rate, Hz (desk-scale)");
    simulate->add_option("--desired", desired_hz, "desired tone, Hz");
    simulate->add_option("--alias", alias_hz, "alias tone, Hz");
    simulate->add_option("--summary", s_summary, "summary JSON path");
    simulate->add_option("--spectrum-out", spectrum_prefix, "spectra CSV path prefix");

    // verify
    auto* verify = app.add_subcommand("verify", "parallel-vs-serial bit-exactness sweep");
    std::uint64_t seed = 1;
    std::size_t samples = 20000;
    bool full = false;
    verify->add_option("--seed", seed, "RNG seed");
    verify->add_option("--samples", samples, "samples per case");
    verify->add_flag("--full", full, "extended factor sweep");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (design->parsed())
            return cmd_design(cic_mode, hb_order, transition, atten, coeff_width, stages, ratio,
                              delay, width, output);
        if (process->parsed())
            return cmd_process(in_file, out_file, factor, config_path, use_float, lanes,
                               rate_override, report_path);
        if (respond->parsed())
            return cmd_respond(r_factor, points, r_output, r_summary, r_par_coeffs, r_ser_coeffs);
        if (simulate->parsed()) {
            if (!antialias && !multitone) {
                std::cerr << "simulate: choose --antialias and/or --multitone\n";
                return kExitUsage;
            }
            return cmd_simulate(antialias, multitone, s_factor, s_rate, desired_hz, alias_hz,
                                s_summary, spectrum_prefix);
        }
        if (verify->parsed())
            return cmd_verify(seed, samples, full);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOther;
    }
    return kExitUsage;
}
