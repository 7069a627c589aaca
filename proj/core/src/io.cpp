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
#include "psrc/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "psrc/fixed.hpp"

namespace psrc {

namespace {

using nlohmann::json;

std::filesystem::path sidecar_path(const std::filesystem::path& p) {
    std::filesystem::path s = p;
    s += ".json";
    return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::trunc);
    if (!f)
        throw Error(Errc::io_error, "cannot open " + path.string() + " for writing");
    f << text;
    if (!f)
        throw Error(Errc::io_error, "failed writing " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f)
        throw Error(Errc::io_error, "cannot open " + path.string());
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw Error(Errc::io_error, path.string() + ": " + e.what());
    }
    return j;
}

void write_stream_sidecar(const std::filesystem::path& path, const std::string& format,
                          double rate, int lanes, std::uint64_t count) {
    json j;
    j["format"] = format;
    j["sample_rate_hz"] = rate;
    j["lanes"] = lanes;
    j["count"] = count;
    write_text(sidecar_path(path), j.dump(2) + "\n");
}

} // namespace

void write_i16(const std::filesystem::path& path, const SerialStream<std::int64_t>& s,
               int lanes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw Error(Errc::io_error, "cannot open " + path.string() + " for writing");
    std::string buf;
    buf.reserve(s.samples.size() * 2);
    for (const auto v : s.samples) {
        if (v < fixed_min(16) || v > fixed_max(16))
            throw Error(Errc::invalid_scaling, "sample does not fit 16 bits");
        const auto u = static_cast<std::uint16_t>(static_cast<std::int16_t>(v));
        buf.push_back(static_cast<char>(u & 0xff));
        buf.push_back(static_cast<char>((u >> 8) & 0xff));
    }
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!f)
        throw Error(Errc::io_error, "failed writing " + path.string());
    write_stream_sidecar(path, "i16", s.sample_rate_hz, lanes, s.samples.size());
}

SerialStream<std::int64_t> read_i16(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw Error(Errc::io_error, "cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (bytes.size() % 2 != 0)
        throw Error(Errc::malformed_stream, path.string() + ": odd byte count for i16 data");
    SerialStream<std::int64_t> s;
    s.samples.resize(bytes.size() / 2);
    for (std::size_t i = 0; i < s.samples.size(); ++i) {
        const auto lo = static_cast<std::uint8_t>(bytes[2 * i]);
        const auto hi = static_cast<std::uint8_t>(bytes[2 * i + 1]);
        s.samples[i] = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo) |
                                                 (static_cast<std::uint16_t>(hi) << 8));
    }
    const auto side = sidecar_path(path);
    if (std::filesystem::exists(side)) {
        const json j = read_json_file(side);
        s.sample_rate_hz = j.value("sample_rate_hz", 0.0);
    }
    return s;
}

int sidecar_lanes(const std::filesystem::path& path) {
    const auto side = sidecar_path(path);
    if (!std::filesystem::exists(side))
        return 1;
    return read_json_file(side).value("lanes", 1);
}

void write_sample_csv(const std::filesystem::path& path, const SerialStream<double>& s) {
    std::ostringstream out;
    out.precision(17);
    for (const auto v : s.samples)
        out << v << "\n";
    write_text(path, out.str());
    write_stream_sidecar(path, "f64csv", s.sample_rate_hz, 1, s.samples.size());
}

SerialStream<double> read_sample_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f)
        throw Error(Errc::io_error, "cannot open " + path.string());
    SerialStream<double> s;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty())
            continue;
        try {
            s.samples.push_back(std::stod(line));
        } catch (const std::exception&) {
            throw Error(Errc::malformed_stream, path.string() + ": bad sample '" + line + "'");
        }
    }
    const auto side = sidecar_path(path);
    if (std::filesystem::exists(side))
        s.sample_rate_hz = read_json_file(side).value("sample_rate_hz", 0.0);
    return s;
}

void write_coeffs(const std::filesystem::path& csv_path, const HalfbandCoeffs& c) {
    std::ostringstream out;
    out.precision(17);
    for (const auto v : c.taps)
        out << v << "\n";
    write_text(csv_path, out.str());
    json j;
    j["order"] = 2 * c.half_order();
    j["length"] = c.taps.size();
    j["coeff_width"] = c.coeff_width;
    j["scale"] = c.quant_scale();
    j["transition_width"] = c.transition_width;
    j["measured_stopband_db"] = c.measured_stopband_db;
    j["measured_ripple_db"] = c.measured_ripple_db;
    write_text(sidecar_path(csv_path), j.dump(2) + "\n");
}

HalfbandCoeffs read_coeffs(const std::filesystem::path& csv_path) {
    std::ifstream f(csv_path);
    if (!f)
        throw Error(Errc::io_error, "cannot open " + csv_path.string());
    HalfbandCoeffs c;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty())
            continue;
        try {
            c.taps.push_back(std::stod(line));
        } catch (const std::exception&) {
            throw Error(Errc::malformed_stream, csv_path.string() + ": bad tap '" + line + "'");
        }
    }
    c.coeff_width = 16;
    const auto side = sidecar_path(csv_path);
    if (std::filesystem::exists(side)) {
        const json j = read_json_file(side);
        c.coeff_width = j.value("coeff_width", 16);
        c.transition_width = j.value("transition_width", 0.0);
        c.measured_stopband_db = j.value("measured_stopband_db", 0.0);
        c.measured_ripple_db = j.value("measured_ripple_db", 0.0);
    }
    HalfbandCoeffs q = quantize_coeffs(c, c.coeff_width);
    validate_halfband_structure(q);
    return q;
}

void write_response_csv(const std::filesystem::path& path, const ResponseReport& rep) {
    std::ostringstream out;
    out.precision(12);
    out << "freq_norm,magnitude_db\n";
    for (const auto& [f, db] : rep.response)
        out << f << "," << db << "\n";
    write_text(path, out.str());
}

void write_response_summary(const std::filesystem::path& path, const ResponseReport& rep) {
    json j;
    j["decimation_factor"] = rep.decimation_factor;
    j["passband_ripple_db"] = rep.passband_ripple_db;
    j["stopband_atten_db"] = rep.stopband_atten_db;
    j["passband_edge_norm"] = rep.passband_edge;
    j["plot_points"] = rep.response.size();
    write_text(path, j.dump(2) + "\n");
}

void write_spectrum_csv(const std::filesystem::path& path, const SpectrumReport& rep) {
    std::ostringstream out;
    out.precision(12);
    out << "freq_hz,power_dbfs\n";
    for (std::size_t k = 0; k < rep.freq_hz.size(); ++k)
        out << rep.freq_hz[k] << "," << rep.power_dbfs[k] << "\n";
    write_text(path, out.str());
}

namespace {

RunConfig run_config_from_json(const json& j) {
    RunConfig rc;
    rc.factor = j.value("factor", rc.factor);
    const std::string kind = j.value("numeric", std::string{"fixed"});
    if (kind == "fixed")
        rc.numeric = NumericKind::fixed;
    else if (kind == "float" || kind == "real")
        rc.numeric = NumericKind::real;
    else
        throw Error(Errc::invalid_config, "numeric kind must be 'fixed' or 'float'");
    rc.input_lanes = j.value("input_lanes", rc.input_lanes);
    rc.sample_rate_hz = j.value("sample_rate_hz", rc.sample_rate_hz);
    rc.seed = j.value("seed", rc.seed);
    rc.cic_stages = j.value("cic_stages", rc.cic_stages);
    rc.parallel_cic_r = j.value("parallel_cic_r", rc.parallel_cic_r);
    rc.diff_delay = j.value("diff_delay", rc.diff_delay);
    rc.sample_width = j.value("sample_width", rc.sample_width);
    rc.par_hb_order = j.value("par_hb_order", rc.par_hb_order);
    rc.par_hb_transition = j.value("par_hb_transition", rc.par_hb_transition);
    rc.ser_hb_order = j.value("ser_hb_order", rc.ser_hb_order);
    rc.ser_hb_transition = j.value("ser_hb_transition", rc.ser_hb_transition);
    rc.hb_atten_db = j.value("hb_atten_db", rc.hb_atten_db);
    rc.coeff_width = j.value("coeff_width", rc.coeff_width);
    rc.input_path = j.value("input", rc.input_path);
    rc.output_path = j.value("output", rc.output_path);
    return rc;
}

json run_config_to_json(const RunConfig& rc) {
    json j;
    j["factor"] = rc.factor;
    j["numeric"] = rc.numeric == NumericKind::fixed ? "fixed" : "float";
    j["input_lanes"] = rc.input_lanes;
    j["sample_rate_hz"] = rc.sample_rate_hz;
    j["seed"] = rc.seed;
    j["cic_stages"] = rc.cic_stages;
    j["parallel_cic_r"] = rc.parallel_cic_r;
    j["diff_delay"] = rc.diff_delay;
    j["sample_width"] = rc.sample_width;
    j["par_hb_order"] = rc.par_hb_order;
    j["par_hb_transition"] = rc.par_hb_transition;
    j["ser_hb_order"] = rc.ser_hb_order;
    j["ser_hb_transition"] = rc.ser_hb_transition;
    j["hb_atten_db"] = rc.hb_atten_db;
    j["coeff_width"] = rc.coeff_width;
    if (!rc.input_path.empty())
        j["input"] = rc.input_path;
    if (!rc.output_path.empty())
        j["output"] = rc.output_path;
    return j;
}

} // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
    return run_config_from_json(read_json_file(path));
}

void save_run_config(const std::filesystem::path& path, const RunConfig& rc) {
    write_text(path, run_config_to_json(rc).dump(2) + "\n");
}

std::string run_config_json(const RunConfig& rc) {
    return run_config_to_json(rc).dump(2);
}

SrcConfig to_src_config(const RunConfig& rc) {
    if (rc.par_hb_order % 2 != 0 || rc.ser_hb_order % 2 != 0)
        throw Error(Errc::invalid_config, "halfband FIR order must be even (length 2N+1)");
    SrcConfig cfg;
    cfg.plan = plan_factor(rc.factor);
    cfg.parallel_cic =
        CicConfig{rc.cic_stages, rc.parallel_cic_r, rc.diff_delay, rc.sample_width,
                  rc.sample_width};
    cfg.serial_cic = CicConfig{rc.cic_stages, cfg.plan.serial_cic_r, rc.diff_delay,
                               rc.sample_width, rc.sample_width};
    const HalfbandCoeffs par = design_halfband(
        HalfbandSpec{rc.par_hb_order / 2, rc.par_hb_transition, rc.hb_atten_db, rc.coeff_width});
    const HalfbandCoeffs ser = design_halfband(
        HalfbandSpec{rc.ser_hb_order / 2, rc.ser_hb_transition, rc.hb_atten_db, rc.coeff_width});
    cfg.parallel_hb = {par, par};
    cfg.serial_hb = {ser, ser, ser};
    cfg.numeric = rc.numeric;
    cfg.input_lanes = rc.input_lanes;
    cfg.stage_output_width = rc.sample_width;
    return cfg;
}

} // namespace psrc
