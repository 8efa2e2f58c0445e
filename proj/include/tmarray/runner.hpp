#pragma once

#include "tmarray/config.hpp"
#include "tmarray/element.hpp"
#include "tmarray/transient.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace tmarray::runner {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Output file with the standard provenance header: tool line, timestamp
/// (the only non-deterministic line), and the fully resolved config.
class OutputFile {
public:
    OutputFile(const std::filesystem::path& dir, const std::string& name,
               const std::string& subcommand, const RunConfig& cfg) {
        std::filesystem::create_directories(dir);
        path_ = dir / name;
        out_.open(path_);
        if (!out_) throw config_error("cannot open output file " + path_.string());
        out_ << "# tmarray " << subcommand << "\n";
        out_ << "# generated_at: " << iso_timestamp() << "\n";
        out_ << "# config:\n";
        std::istringstream cfg_text(render_config(cfg));
        std::string line;
        while (std::getline(cfg_text, line)) out_ << "#   " << line << "\n";
    }

    std::ofstream& stream() { return out_; }
    [[nodiscard]] const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

namespace detail {

inline void write_spectrum_rows(std::ofstream& o, const HarmonicSpectrum& spec,
                                const ElementCircuit& circuit) {
    const HarmonicBasis& basis = spec.basis;
    const PortSpectrum port = port_spectrum(spec, circuit);
    const RadiatedSpectrum rad = radiated_spectrum(spec, circuit);
    double peak = 0.0;
    for (CircuitNode n : {CircuitNode::port_1, CircuitNode::node_1, CircuitNode::node_2,
                          CircuitNode::port_2})
        peak = std::max(peak, spec.at(n).cwiseAbs().maxCoeff());
    peak = std::max({peak, port.amplitude.cwiseAbs().maxCoeff(),
                     rad.amplitude.cwiseAbs().maxCoeff()});

    auto row = [&](const char* name, int k, cplx v) {
        o << k << "," << fmt(basis.frequency(k)) << "," << fmt(amplitude_db(std::abs(v), peak))
          << "," << fmt(wrap_deg(rad_to_deg(std::arg(v)))) << "," << name << "\n";
    };
    for (int k = -basis.order(); k <= basis.order(); ++k) {
        for (CircuitNode n : {CircuitNode::port_1, CircuitNode::node_1, CircuitNode::node_2,
                              CircuitNode::port_2})
            row(node_name(n), k, spec.at(n, k));
        row("port_sum", k, port.amplitude_at(k));
        row("rad_diff", k, rad.amplitude_at(k));
    }
}

}  // namespace detail

/// element-spectrum: harmonic node spectra under both drive types.
inline int run_element_spectrum(const RunConfig& cfg, std::ostream& log) {
    const ElementCircuit circuit = cfg.element_circuit();
    const HarmonicBasis basis = cfg.harmonic_basis();
    const std::filesystem::path dir = cfg.output.directory;

    const HarmonicSpectrum tx = solve_element(circuit, basis, Excitation::port_drive(1.0, 0));
    OutputFile ftx(dir, "element_spectrum_tx.csv", "element-spectrum", cfg);
    ftx.stream() << "harmonic_k,freq_hz,mag_db,phase_deg,node\n";
    detail::write_spectrum_rows(ftx.stream(), tx, circuit);

    const HarmonicSpectrum rx = solve_element(
        circuit, basis, Excitation::differential_drive(1.0, cfg.element.desired_harmonic));
    OutputFile frx(dir, "element_spectrum_rx.csv", "element-spectrum", cfg);
    frx.stream() << "harmonic_k,freq_hz,mag_db,phase_deg,node\n";
    detail::write_spectrum_rows(frx.stream(), rx, circuit);

    const RadiatedSpectrum rad = radiated_spectrum(tx, circuit);
    log << "element-spectrum: radiated power at k=" << cfg.element.desired_harmonic << " is "
        << fmt(rad.power_at(cfg.element.desired_harmonic)) << " (peak-phasor units); wrote "
        << ftx.path().string() << ", " << frx.path().string() << "\n";
    return 0;
}

/// element-phase-sweep: tx/rx response versus the modulation phase.
inline int run_phase_sweep(const RunConfig& cfg, std::ostream& log) {
    const ElementCircuit circuit = cfg.element_circuit();
    const HarmonicBasis basis = cfg.harmonic_basis();
    std::vector<double> grid;
    for (int i = 0; i < cfg.sweep.points; ++i) grid.push_back(360.0 * i / cfg.sweep.points);
    const PhaseConjugationReport rep =
        phase_conjugation_report(circuit, basis, grid, cfg.element.desired_harmonic);

    const std::filesystem::path dir = cfg.output.directory;
    OutputFile f(dir, "phase_sweep.csv", "element-phase-sweep", cfg);
    f.stream() << "phi_m_deg,tx_mag,tx_phase_deg,rx_mag,rx_phase_deg\n";
    for (const PhaseConjugationRow& r : rep.rows) {
        f.stream() << fmt(r.phi_m_deg) << "," << fmt(r.tx_magnitude) << "," << fmt(r.tx_phase_deg)
                   << "," << fmt(r.rx_magnitude) << "," << fmt(r.rx_phase_deg) << "\n";
    }
    OutputFile s(dir, "phase_sweep_summary.txt", "element-phase-sweep", cfg);
    s.stream() << "points = " << rep.rows.size() << "\n";
    s.stream() << "tx_phase_slope_rad_per_rad = " << fmt(rep.tx_slope) << "\n";
    s.stream() << "rx_phase_slope_rad_per_rad = " << fmt(rep.rx_slope) << "\n";
    log << "element-phase-sweep: tx slope " << fmt(rep.tx_slope) << ", rx slope "
        << fmt(rep.rx_slope) << "; wrote " << f.path().string() << "\n";
    return 0;
}

/// oracle-check: harmonic solver vs transient reference, both drive types.
inline int run_oracle_check(const RunConfig& cfg, std::ostream& log) {
    const ElementCircuit circuit = cfg.element_circuit();
    const HarmonicBasis basis = cfg.harmonic_basis();
    const TransientConfig tcfg = cfg.transient_config();
    const std::filesystem::path dir = cfg.output.directory;

    OutputFile f(dir, "oracle_check.csv", "oracle-check", cfg);
    f.stream() << "direction,node,harmonic_k,freq_hz,hb_mag,hb_phase_deg,ref_mag,ref_phase_deg,"
                  "mag_err_pct,phase_err_deg\n";

    double worst_mag = 0.0, worst_phase = 0.0;
    auto check = [&](const char* tag, const Excitation& exc) {
        const HarmonicSpectrum hb = solve_element(circuit, basis, exc);
        TransientResult raw;
        const HarmonicSpectrum ref = transient_reference_spectrum(circuit, exc, basis, tcfg, &raw);
        for (CircuitNode n : {CircuitNode::port_1, CircuitNode::node_1, CircuitNode::node_2,
                              CircuitNode::port_2}) {
            const double node_peak = hb.at(n).cwiseAbs().maxCoeff();
            for (int k = -basis.order(); k <= basis.order(); ++k) {
                const cplx h = hb.at(n, k), r = ref.at(n, k);
                const double mag_err = std::abs(std::abs(r) - std::abs(h)) / node_peak * 100.0;
                const double phase_err = std::abs(h) > 1e-9 * node_peak
                                             ? std::abs(rad_to_deg(std::arg(r / h)))
                                             : 0.0;
                worst_mag = std::max(worst_mag, mag_err);
                worst_phase = std::max(worst_phase, phase_err);
                f.stream() << tag << "," << node_name(n) << "," << k << ","
                           << fmt(basis.frequency(k)) << "," << fmt(std::abs(h)) << ","
                           << fmt(wrap_deg(rad_to_deg(std::arg(h)))) << "," << fmt(std::abs(r))
                           << "," << fmt(wrap_deg(rad_to_deg(std::arg(r)))) << ","
                           << fmt(mag_err) << "," << fmt(phase_err) << "\n";
            }
        }
        if (cfg.transient.dump_time_series) {
            OutputFile ts(dir, std::string("time_series_") + tag + ".csv", "oracle-check", cfg);
            ts.stream() << "time_s,v_p1,v_1,v_2,v_p2\n";
            for (std::size_t i = 0; i < raw.v_node_1.size(); ++i) {
                const double t = raw.time_origin + (i + 1) * raw.dt;
                ts.stream() << fmt(t) << "," << fmt(raw.v_port_1[i]) << "," << fmt(raw.v_node_1[i])
                            << "," << fmt(raw.v_node_2[i]) << "," << fmt(raw.v_port_2[i]) << "\n";
            }
        }
    };
    check("tx", Excitation::port_drive(1.0, 0));
    check("rx", Excitation::differential_drive(1.0, cfg.element.desired_harmonic));

    // Step-size self check: throws accuracy_error when the grid is too coarse.
    const double halving_drift =
        verify_step_convergence(circuit, Excitation::port_drive(1.0, 0), basis, tcfg);

    const bool pass = worst_mag < 1.0 && worst_phase < 1.0;
    log << "oracle-check: worst magnitude error " << fmt(worst_mag)
        << "% of node peak, worst phase error " << fmt(worst_phase)
        << " deg, step-halving drift " << fmt(halving_drift * 100.0) << "% -> "
        << (pass ? "PASS" : "FAIL") << "; wrote " << f.path().string() << "\n";
    if (!pass) throw numerical_error("harmonic solver disagrees with the transient reference");
    return 0;
}

/// array-cut: transmit/receive pattern cut of the configured array.
inline int run_array_cut(const RunConfig& cfg, std::ostream& log) {
    const ArrayGeometry geometry = cfg.array_geometry();
    const std::vector<double> grid = angle_grid(-90.0, 90.0, cfg.output.grid_deg);
    const PatternCut cut = pattern_cut(geometry, cfg.pattern(), grid, cfg.wavelength_m());

    OutputFile f(cfg.output.directory, "array_cut.csv", "array-cut", cfg);
    f.stream() << "theta_deg,tx_db,rx_db,tx_phase_deg,rx_phase_deg\n";
    for (std::size_t i = 0; i < cut.angles_deg.size(); ++i) {
        f.stream() << fmt(cut.angles_deg[i]) << "," << fmt(cut.tx_db[i]) << ","
                   << fmt(cut.rx_db[i]) << ","
                   << fmt(wrap_deg(rad_to_deg(std::arg(cut.tx_field[i])))) << ","
                   << fmt(wrap_deg(rad_to_deg(std::arg(cut.rx_field[i])))) << "\n";
    }
    const IsolationSample broadside = isolation_at(cut, 0.0);
    const auto tx_lobe = main_lobe(cut, LinkDirection::transmit);
    const auto rx_lobe = main_lobe(cut, LinkDirection::receive);
    log << "array-cut: broadside isolation " << fmt(broadside.isolation_db) << " dB, tx lobe "
        << (tx_lobe ? fmt(*tx_lobe) : "none") << " deg, rx lobe "
        << (rx_lobe ? fmt(*rx_lobe) : "none") << " deg; wrote " << f.path().string() << "\n";
    return 0;
}

/// array-scan: progressive modulation-phase sweep, lobe directions per step.
inline int run_array_scan(const RunConfig& cfg, std::ostream& log) {
    const double wavelength = cfg.wavelength_m();
    const double spacing = cfg.array.spacing_wavelengths * wavelength;
    const std::vector<double> grid = angle_grid(-90.0, 90.0, cfg.output.grid_deg);

    OutputFile f(cfg.output.directory, "array_scan.csv", "array-scan", cfg);
    f.stream() << "delta_phi_deg,tx_lobe_deg,rx_lobe_deg,opposite_within_grid\n";
    int ok = 0, total = 0;
    for (double d = cfg.scan.start_deg; d <= cfg.scan.stop_deg + 1e-9; d += cfg.scan.step_deg) {
        ArrayGeometry g = ArrayGeometry::uniform(cfg.array.count, spacing);
        for (int p = 0; p < cfg.array.count; ++p)
            g.elements[p].modulation_phase_rad = deg_to_rad(p * d);
        const PatternCut cut = pattern_cut(g, cfg.pattern(), grid, wavelength);
        const auto tx_lobe = main_lobe(cut, LinkDirection::transmit);
        const auto rx_lobe = main_lobe(cut, LinkDirection::receive);
        bool opposite = false;
        if (tx_lobe && rx_lobe) {
            // The mirrored angle must carry the receive maximum (ties allowed).
            const IsolationSample probe = isolation_at(cut, -*tx_lobe);
            double rx_at_mirror = 0.0, rx_peak = 0.0;
            for (std::size_t i = 0; i < cut.angles_deg.size(); ++i) {
                rx_peak = std::max(rx_peak, std::abs(cut.rx_field[i]));
                if (cut.angles_deg[i] == probe.theta_deg) rx_at_mirror = std::abs(cut.rx_field[i]);
            }
            opposite = rx_at_mirror >= rx_peak * (1.0 - 1e-9);
        }
        ok += opposite;
        ++total;
        f.stream() << fmt(d) << "," << (tx_lobe ? fmt(*tx_lobe) : "nan") << ","
                   << (rx_lobe ? fmt(*rx_lobe) : "nan") << "," << (opposite ? 1 : 0) << "\n";
    }
    log << "array-scan: opposite-lobe property held at " << ok << "/" << total
        << " steps; wrote " << f.path().string() << "\n";
    return ok == total ? 0 : 2;
}

/// table1: the four reference rows of the two-element phase bookkeeping.
inline int run_table1(const RunConfig& cfg, std::ostream& log) {
    OutputFile f(cfg.output.directory, "table1.csv", "table1", cfg);
    f.stream() << "phi_m_deg,tx_left_deg,tx_right_deg,rx_left_deg,rx_right_deg\n";
    for (double phi : {0.0, 90.0, 180.0, 270.0}) {
        const Table1Phases t = table1_phases({0.0, -90.0}, phi);
        f.stream() << fmt(phi) << "," << fmt(t.tx_table_deg[0]) << "," << fmt(t.tx_table_deg[1])
                   << "," << fmt(t.rx_table_deg[0]) << "," << fmt(t.rx_table_deg[1]) << "\n";
    }
    log << "table1: wrote " << f.path().string() << "\n";
    return 0;
}

/// synthesize: closed-form split steering plus a lobe round-trip check.
inline int run_synthesize(const RunConfig& cfg, std::ostream& log) {
    const double wavelength = cfg.wavelength_m();
    const double spacing = cfg.synthesize.spacing_wavelengths * wavelength;
    const ArrayGeometry g =
        synthesize_split_steering(cfg.synthesize.target_tx_deg, cfg.synthesize.target_rx_deg,
                                  spacing, cfg.synthesize.count, wavelength);

    OutputFile f(cfg.output.directory, "synthesize.csv", "synthesize", cfg);
    f.stream() << "element,position_m,feed_phase_deg,modulation_phase_deg\n";
    for (std::size_t p = 0; p < g.elements.size(); ++p) {
        f.stream() << p << "," << fmt(g.elements[p].position_m) << ","
                   << fmt(wrap_deg(rad_to_deg(g.elements[p].feed_phase_rad))) << ","
                   << fmt(wrap_deg(rad_to_deg(g.elements[p].modulation_phase_rad))) << "\n";
    }
    const std::vector<double> grid = angle_grid(-90.0, 90.0, 0.1);
    const PatternCut cut = pattern_cut(g, cfg.pattern(), grid, wavelength);
    const auto tx_lobe = main_lobe(cut, LinkDirection::transmit);
    const auto rx_lobe = main_lobe(cut, LinkDirection::receive);

    OutputFile s(cfg.output.directory, "synthesize_summary.txt", "synthesize", cfg);
    s.stream() << "target_tx_deg = " << fmt(cfg.synthesize.target_tx_deg) << "\n";
    s.stream() << "target_rx_deg = " << fmt(cfg.synthesize.target_rx_deg) << "\n";
    s.stream() << "recovered_tx_deg = " << (tx_lobe ? fmt(*tx_lobe) : "none") << "\n";
    s.stream() << "recovered_rx_deg = " << (rx_lobe ? fmt(*rx_lobe) : "none") << "\n";
    log << "synthesize: tx lobe " << (tx_lobe ? fmt(*tx_lobe) : "none") << " deg (target "
        << fmt(cfg.synthesize.target_tx_deg) << "), rx lobe "
        << (rx_lobe ? fmt(*rx_lobe) : "none") << " deg (target "
        << fmt(cfg.synthesize.target_rx_deg) << "); wrote " << f.path().string() << "\n";

    const bool ok = tx_lobe && rx_lobe &&
                    std::abs(*tx_lobe - cfg.synthesize.target_tx_deg) <= 0.1 + 1e-9 &&
                    std::abs(*rx_lobe - cfg.synthesize.target_rx_deg) <= 0.1 + 1e-9;
    if (!ok) throw numerical_error("synthesized steering did not round-trip through the lobe finder");
    return 0;
}

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = {
        "element-spectrum", "element-phase-sweep", "oracle-check", "array-cut",
        "array-scan",       "table1",              "synthesize"};
    return names;
}

/// Dispatch a subcommand. Exit codes: 0 success, 1 configuration error,
/// 2 numerical/accuracy error.
inline int run_command(const std::string& name, const RunConfig& cfg, std::ostream& log) {
    try {
        if (name == "element-spectrum") return run_element_spectrum(cfg, log);
        if (name == "element-phase-sweep") return run_phase_sweep(cfg, log);
        if (name == "oracle-check") return run_oracle_check(cfg, log);
        if (name == "array-cut") return run_array_cut(cfg, log);
        if (name == "array-scan") return run_array_scan(cfg, log);
        if (name == "table1") return run_table1(cfg, log);
        if (name == "synthesize") return run_synthesize(cfg, log);
        log << "error: unknown subcommand '" << name << "'\n";
        return 1;
    } catch (const config_error& e) {
        log << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        log << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const numerical_error& e) {
        log << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const accuracy_error& e) {
        log << "accuracy error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace tmarray::runner
