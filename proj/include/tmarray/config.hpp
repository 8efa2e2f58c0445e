#pragma once

#include "tmarray/array.hpp"
#include "tmarray/circuit.hpp"
#include "tmarray/transient.hpp"

#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace tmarray {

/// Resolved run configuration. Values are stored in the boundary units of the
/// config file (GHz / MHz / pF / nH / ohm / degrees); the builder methods
/// convert to SI + radians. Unset keys take the documented defaults, and
/// render_config echoes every resolved value back out.
struct RunConfig {
    struct Element {
        double base_capacitance_pf = 1.0;
        double inductance_nh = 4.398;
        double radiation_resistance_ohm = 100.0;
        double port_resistance_ohm = 50.0;
        std::optional<double> port_inverter_ms;  // empty = critical coupling
        double modulation_index = 0.29;
        double modulation_phase_deg = 0.0;
        double series_loss_ohm = 0.0;
        int desired_harmonic = 1;
        bool operator==(const Element&) const = default;
    } element;

    struct Basis {
        double carrier_ghz = 2.09;
        double modulation_mhz = 310.0;
        int harmonics = 3;
        bool operator==(const Basis&) const = default;
    } basis;

    struct Array {
        int count = 2;
        double spacing_wavelengths = 0.5;
        std::vector<double> positions_m;  // empty = uniform from spacing
        std::vector<double> feed_amplitude{1.0, 1.0};
        std::vector<double> feed_phase_deg{0.0, -90.0};
        std::vector<double> modulation_phase_deg{0.0, 90.0};
        std::string element_pattern = "isotropic";  // or "cos^<q>"
        bool operator==(const Array&) const = default;
    } array;

    struct Scan {
        double start_deg = -180.0;
        double stop_deg = 180.0;
        double step_deg = 5.0;
        bool operator==(const Scan&) const = default;
    } scan;

    struct Sweep {
        int points = 24;
        bool operator==(const Sweep&) const = default;
    } sweep;

    struct Synthesize {
        double target_tx_deg = 20.0;
        double target_rx_deg = -20.0;
        int count = 8;
        double spacing_wavelengths = 0.5;
        bool operator==(const Synthesize&) const = default;
    } synthesize;

    struct Transient {
        int settle_periods = 12;
        int analysis_periods = 4;
        int steps_per_period = 32768;
        bool dump_time_series = false;
        bool operator==(const Transient&) const = default;
    } transient;

    struct Output {
        std::string directory = "out";
        double grid_deg = 0.5;
        bool operator==(const Output&) const = default;
    } output;

    bool operator==(const RunConfig&) const = default;

    // ---- builders -----------------------------------------------------

    [[nodiscard]] ElementCircuit element_circuit() const {
        ElementCircuit c = default_element(deg_to_rad(element.modulation_phase_deg),
                                           element.modulation_index,
                                           basis.modulation_mhz * 1e6);
        c.resonator_1.base_capacitance = element.base_capacitance_pf * 1e-12;
        c.resonator_2.base_capacitance = c.resonator_1.base_capacitance;
        c.resonator_1.inductance = element.inductance_nh * 1e-9;
        c.resonator_2.inductance = c.resonator_1.inductance;
        c.port_conductance = 1.0 / element.port_resistance_ohm;
        c.radiation_conductance = 1.0 / element.radiation_resistance_ohm;
        c.inverter = element.port_inverter_ms
                         ? *element.port_inverter_ms * 1e-3
                         : critical_port_inverter(c.port_conductance, c.radiation_conductance);
        c.series_loss_resistance = element.series_loss_ohm;
        return c;
    }

    [[nodiscard]] HarmonicBasis harmonic_basis() const {
        return HarmonicBasis(basis.carrier_ghz * 1e9, basis.modulation_mhz * 1e6, basis.harmonics);
    }

    /// Free-space wavelength of the radiated wave (carrier + desired harmonic).
    [[nodiscard]] double wavelength_m() const {
        return speed_of_light /
               (basis.carrier_ghz * 1e9 + element.desired_harmonic * basis.modulation_mhz * 1e6);
    }

    [[nodiscard]] ElementPattern pattern() const {
        if (array.element_pattern == "isotropic") return ElementPattern::isotropic();
        if (array.element_pattern.rfind("cos^", 0) == 0)
            return ElementPattern::cosine_power(std::stod(array.element_pattern.substr(4)));
        throw config_error("unknown element pattern: " + array.element_pattern);
    }

    [[nodiscard]] ArrayGeometry array_geometry() const {
        ArrayGeometry g;
        const double spacing = array.spacing_wavelengths * wavelength_m();
        g.elements.resize(array.count);
        for (int p = 0; p < array.count; ++p) {
            ArrayElement& e = g.elements[p];
            e.position_m = array.positions_m.empty() ? p * spacing : array.positions_m[p];
            e.feed_amplitude = array.feed_amplitude[p];
            e.feed_phase_rad = deg_to_rad(array.feed_phase_deg[p]);
            e.modulation_phase_rad = deg_to_rad(array.modulation_phase_deg[p]);
        }
        g.validate();
        return g;
    }

    [[nodiscard]] TransientConfig transient_config() const {
        TransientConfig t;
        t.settle_periods = transient.settle_periods;
        t.total_periods = transient.settle_periods + transient.analysis_periods;
        t.steps_per_period = transient.steps_per_period;
        return t;
    }
};

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += fmt_double(v[i]);
    }
    return out;
}

struct ConfigToken {
    std::string section, key, value;
    int line = 0;
};

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<ConfigToken> tokenize_config(const std::string& text) {
    std::vector<ConfigToken> tokens;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw config_error("line " + std::to_string(lineno) + ": unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw config_error("line " + std::to_string(lineno) + ": empty section name");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw config_error("line " + std::to_string(lineno) +
                               ": expected 'key = value' (no '=' found)");
        if (section.empty())
            throw config_error("line " + std::to_string(lineno) + ": key outside any [section]");
        ConfigToken tok{section, trim(t.substr(0, eq)), trim(t.substr(eq + 1)), lineno};
        if (tok.key.empty())
            throw config_error("line " + std::to_string(lineno) + ": empty key");
        const std::string id = section + "." + tok.key;
        if (!seen.insert(id).second)
            throw config_error("line " + std::to_string(lineno) + ": duplicate key '" + id + "'");
        tokens.push_back(std::move(tok));
    }
    return tokens;
}

inline double parse_double(const ConfigToken& t) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(t.value, &pos);
        if (pos != t.value.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw config_error("line " + std::to_string(t.line) + ": '" + t.value +
                           "' is not a number for key '" + t.key + "'");
    }
}

inline int parse_int(const ConfigToken& t) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(t.value, &pos);
        if (pos != t.value.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw config_error("line " + std::to_string(t.line) + ": '" + t.value +
                           "' is not an integer for key '" + t.key + "'");
    }
}

inline bool parse_bool(const ConfigToken& t) {
    if (t.value == "true" || t.value == "1") return true;
    if (t.value == "false" || t.value == "0") return false;
    throw config_error("line " + std::to_string(t.line) + ": '" + t.value +
                       "' is not a boolean for key '" + t.key + "'");
}

inline std::vector<double> parse_list(const ConfigToken& t) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(t.value);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty())
            throw config_error("line " + std::to_string(t.line) + ": empty list entry");
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw config_error("line " + std::to_string(t.line) + ": '" + item +
                               "' is not a number in list '" + t.key + "'");
        }
    }
    if (out.empty()) throw config_error("line " + std::to_string(t.line) + ": empty list");
    return out;
}

}  // namespace detail

/// Parse the flat key = value format. Unknown sections or keys are rejected
/// with their line number; semantic violations name the broken invariant.
inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::map<std::string, std::vector<double>> pending_lists;
    bool positions_given = false;

    for (const detail::ConfigToken& t : detail::tokenize_config(text)) {
        const std::string id = t.section + "." + t.key;
        if (id == "element.base_capacitance_pf") cfg.element.base_capacitance_pf = detail::parse_double(t);
        else if (id == "element.inductance_nh") cfg.element.inductance_nh = detail::parse_double(t);
        else if (id == "element.radiation_resistance_ohm") cfg.element.radiation_resistance_ohm = detail::parse_double(t);
        else if (id == "element.port_resistance_ohm") cfg.element.port_resistance_ohm = detail::parse_double(t);
        else if (id == "element.port_inverter_ms") {
            if (t.value != "auto") cfg.element.port_inverter_ms = detail::parse_double(t);
        }
        else if (id == "element.modulation_index") cfg.element.modulation_index = detail::parse_double(t);
        else if (id == "element.modulation_phase_deg") cfg.element.modulation_phase_deg = detail::parse_double(t);
        else if (id == "element.series_loss_ohm") cfg.element.series_loss_ohm = detail::parse_double(t);
        else if (id == "element.desired_harmonic") cfg.element.desired_harmonic = detail::parse_int(t);
        else if (id == "basis.carrier_ghz") cfg.basis.carrier_ghz = detail::parse_double(t);
        else if (id == "basis.modulation_mhz") cfg.basis.modulation_mhz = detail::parse_double(t);
        else if (id == "basis.harmonics") cfg.basis.harmonics = detail::parse_int(t);
        else if (id == "array.count") cfg.array.count = detail::parse_int(t);
        else if (id == "array.spacing_wavelengths") cfg.array.spacing_wavelengths = detail::parse_double(t);
        else if (id == "array.positions_m") { cfg.array.positions_m = detail::parse_list(t); positions_given = true; }
        else if (id == "array.feed_amplitude") pending_lists["feed_amplitude"] = detail::parse_list(t);
        else if (id == "array.feed_phase_deg") pending_lists["feed_phase_deg"] = detail::parse_list(t);
        else if (id == "array.modulation_phase_deg") pending_lists["modulation_phase_deg"] = detail::parse_list(t);
        else if (id == "array.element_pattern") cfg.array.element_pattern = t.value;
        else if (id == "scan.start_deg") cfg.scan.start_deg = detail::parse_double(t);
        else if (id == "scan.stop_deg") cfg.scan.stop_deg = detail::parse_double(t);
        else if (id == "scan.step_deg") cfg.scan.step_deg = detail::parse_double(t);
        else if (id == "sweep.points") cfg.sweep.points = detail::parse_int(t);
        else if (id == "synthesize.target_tx_deg") cfg.synthesize.target_tx_deg = detail::parse_double(t);
        else if (id == "synthesize.target_rx_deg") cfg.synthesize.target_rx_deg = detail::parse_double(t);
        else if (id == "synthesize.count") cfg.synthesize.count = detail::parse_int(t);
        else if (id == "synthesize.spacing_wavelengths") cfg.synthesize.spacing_wavelengths = detail::parse_double(t);
        else if (id == "transient.settle_periods") cfg.transient.settle_periods = detail::parse_int(t);
        else if (id == "transient.analysis_periods") cfg.transient.analysis_periods = detail::parse_int(t);
        else if (id == "transient.steps_per_period") cfg.transient.steps_per_period = detail::parse_int(t);
        else if (id == "transient.dump_time_series") cfg.transient.dump_time_series = detail::parse_bool(t);
        else if (id == "output.directory") cfg.output.directory = t.value;
        else if (id == "output.grid_deg") cfg.output.grid_deg = detail::parse_double(t);
        else throw config_error("line " + std::to_string(t.line) + ": unknown key '" + id + "'");
    }

    // Broadcast or size-check the per-element lists.
    auto fit = [&](std::vector<double>& dst, const char* name) {
        auto it = pending_lists.find(name);
        if (it != pending_lists.end()) dst = it->second;
        else if (static_cast<int>(dst.size()) != cfg.array.count) {
            // Defaults were written for the stock two-element array; regrow.
            dst.assign(cfg.array.count, name == std::string("feed_amplitude") ? 1.0 : 0.0);
            return;
        }
        if (dst.size() == 1 && cfg.array.count > 1) dst.assign(cfg.array.count, dst[0]);
        if (static_cast<int>(dst.size()) != cfg.array.count)
            throw config_error(std::string("array.") + name + " needs 1 or count entries (count = " +
                               std::to_string(cfg.array.count) + ", got " +
                               std::to_string(dst.size()) + ")");
    };
    fit(cfg.array.feed_amplitude, "feed_amplitude");
    fit(cfg.array.feed_phase_deg, "feed_phase_deg");
    fit(cfg.array.modulation_phase_deg, "modulation_phase_deg");

    // ---- semantic validation (names the invariant) ---------------------
    auto reject = [](const std::string& msg) { throw config_error("invalid config: " + msg); };
    if (!(cfg.element.base_capacitance_pf > 0.0)) reject("base capacitance must be > 0");
    if (!(cfg.element.inductance_nh > 0.0)) reject("inductance must be > 0");
    if (!(cfg.element.radiation_resistance_ohm > 0.0)) reject("radiation resistance must be > 0");
    if (!(cfg.element.port_resistance_ohm > 0.0)) reject("port resistance must be > 0");
    if (cfg.element.port_inverter_ms && !(*cfg.element.port_inverter_ms > 0.0))
        reject("port inverter must be > 0");
    if (!(cfg.element.modulation_index >= 0.0 && cfg.element.modulation_index < 1.0))
        reject("modulation index must lie in [0, 1)");
    if (!(cfg.element.series_loss_ohm >= 0.0)) reject("series loss resistance must be >= 0");
    if (!(cfg.basis.carrier_ghz > 0.0)) reject("carrier frequency must be > 0");
    if (!(cfg.basis.modulation_mhz > 0.0)) reject("modulation frequency must be > 0");
    if (cfg.basis.harmonics < 0) reject("harmonic truncation order must be >= 0");
    if (cfg.basis.harmonics == 0 && cfg.element.modulation_index > 0.0)
        reject("modulation requires sidebands: harmonics must be >= 1 when modulation index > 0");
    if (cfg.basis.carrier_ghz * 1e9 - cfg.basis.harmonics * cfg.basis.modulation_mhz * 1e6 <= 0.0)
        reject("degenerate basis: carrier - harmonics * modulation frequency must stay positive");
    if (cfg.element.desired_harmonic == 0 ||
        std::abs(cfg.element.desired_harmonic) > std::max(cfg.basis.harmonics, 1))
        reject("desired harmonic must be a nonzero index within the basis");
    if (cfg.array.count < 1) reject("array count must be >= 1");
    if (positions_given && static_cast<int>(cfg.array.positions_m.size()) != cfg.array.count)
        reject("positions_m needs exactly count entries");
    for (std::size_t i = 1; i < cfg.array.positions_m.size(); ++i)
        if (!(cfg.array.positions_m[i] > cfg.array.positions_m[i - 1]))
            reject("positions must be strictly increasing");
    for (double w : cfg.array.feed_amplitude)
        if (!(w >= 0.0)) reject("feed amplitudes must be >= 0");
    if (!(cfg.array.spacing_wavelengths > 0.0)) reject("element spacing must be > 0");
    if (!(cfg.scan.step_deg > 0.0) || cfg.scan.stop_deg < cfg.scan.start_deg)
        reject("scan range must have stop >= start and step > 0");
    if (cfg.sweep.points < 3) reject("sweep needs at least 3 points");
    if (std::abs(cfg.synthesize.target_tx_deg) > 90.0 || std::abs(cfg.synthesize.target_rx_deg) > 90.0)
        reject("synthesis targets must lie in [-90, 90] degrees");
    if (cfg.synthesize.count < 1) reject("synthesis count must be >= 1");
    if (!(cfg.synthesize.spacing_wavelengths > 0.0)) reject("synthesis spacing must be > 0");
    if (cfg.transient.settle_periods < 0) reject("settle periods must be >= 0");
    if (cfg.transient.analysis_periods < 2) reject("analysis needs at least 2 periods");
    if (cfg.transient.steps_per_period < 16) reject("steps per period too small");
    if (!(cfg.output.grid_deg > 0.0)) reject("grid step must be > 0");
    static_cast<void>(cfg.pattern());  // validates the pattern string

    return cfg;
}

/// Canonical text form: every key with its resolved value, in fixed order.
/// parse_config(render_config(cfg)) == cfg.
inline std::string render_config(const RunConfig& c) {
    using detail::fmt_double;
    using detail::fmt_list;
    std::ostringstream o;
    o << "[element]\n";
    o << "base_capacitance_pf = " << fmt_double(c.element.base_capacitance_pf) << "\n";
    o << "inductance_nh = " << fmt_double(c.element.inductance_nh) << "\n";
    o << "radiation_resistance_ohm = " << fmt_double(c.element.radiation_resistance_ohm) << "\n";
    o << "port_resistance_ohm = " << fmt_double(c.element.port_resistance_ohm) << "\n";
    o << "port_inverter_ms = "
      << (c.element.port_inverter_ms ? fmt_double(*c.element.port_inverter_ms) : "auto") << "\n";
    o << "modulation_index = " << fmt_double(c.element.modulation_index) << "\n";
    o << "modulation_phase_deg = " << fmt_double(c.element.modulation_phase_deg) << "\n";
    o << "series_loss_ohm = " << fmt_double(c.element.series_loss_ohm) << "\n";
    o << "desired_harmonic = " << c.element.desired_harmonic << "\n";
    o << "\n[basis]\n";
    o << "carrier_ghz = " << fmt_double(c.basis.carrier_ghz) << "\n";
    o << "modulation_mhz = " << fmt_double(c.basis.modulation_mhz) << "\n";
    o << "harmonics = " << c.basis.harmonics << "\n";
    o << "\n[array]\n";
    o << "count = " << c.array.count << "\n";
    o << "spacing_wavelengths = " << fmt_double(c.array.spacing_wavelengths) << "\n";
    if (!c.array.positions_m.empty())
        o << "positions_m = " << fmt_list(c.array.positions_m) << "\n";
    o << "feed_amplitude = " << fmt_list(c.array.feed_amplitude) << "\n";
    o << "feed_phase_deg = " << fmt_list(c.array.feed_phase_deg) << "\n";
    o << "modulation_phase_deg = " << fmt_list(c.array.modulation_phase_deg) << "\n";
    o << "element_pattern = " << c.array.element_pattern << "\n";
    o << "\n[scan]\n";
    o << "start_deg = " << fmt_double(c.scan.start_deg) << "\n";
    o << "stop_deg = " << fmt_double(c.scan.stop_deg) << "\n";
    o << "step_deg = " << fmt_double(c.scan.step_deg) << "\n";
    o << "\n[sweep]\n";
    o << "points = " << c.sweep.points << "\n";
    o << "\n[synthesize]\n";
    o << "target_tx_deg = " << fmt_double(c.synthesize.target_tx_deg) << "\n";
    o << "target_rx_deg = " << fmt_double(c.synthesize.target_rx_deg) << "\n";
    o << "count = " << c.synthesize.count << "\n";
    o << "spacing_wavelengths = " << fmt_double(c.synthesize.spacing_wavelengths) << "\n";
    o << "\n[transient]\n";
    o << "settle_periods = " << c.transient.settle_periods << "\n";
    o << "analysis_periods = " << c.transient.analysis_periods << "\n";
    o << "steps_per_period = " << c.transient.steps_per_period << "\n";
    o << "dump_time_series = " << (c.transient.dump_time_series ? "true" : "false") << "\n";
    o << "\n[output]\n";
    o << "directory = " << c.output.directory << "\n";
    o << "grid_deg = " << fmt_double(c.output.grid_deg) << "\n";
    return o.str();
}

}  // namespace tmarray
