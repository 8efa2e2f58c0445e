#pragma once

#include "tmarray/spectrum_ops.hpp"

#include <map>
#include <optional>
#include <vector>

namespace tmarray {

/// Element-level frequency-conversion transfer functions.
///
/// tx: unit in-phase port drive at the carrier -> differential (radiated)
/// amplitude at the desired harmonic. rx: unit differential drive at the
/// desired harmonic -> summed port amplitude at the carrier. These two read
/// patterns are adjoint to each other's drive patterns, so the transfers obey
/// an exact asymmetry law |rx/tx| = f0 / (f0 + n*fm) that tends to 1 as
/// fm/f0 -> 0.
///
/// Both transfers are reported relative to the same reference: the
/// unmodulated element driven through its differential mode at the radiated
/// frequency (the conventional use of the same antenna). 0 dB therefore means
/// "as strong as the unmodulated antenna".
struct ElementResponse {
    cplx tx_transfer{0.0, 0.0};  // normalized; zero when not populated
    cplx rx_transfer{0.0, 0.0};
    cplx tx_raw{0.0, 0.0};  // V_1 - V_2 at the desired harmonic per ampere
    cplx rx_raw{0.0, 0.0};  // V_p1 + V_p2 at the carrier per ampere
    cplx reference{0.0, 0.0};
    int desired_harmonic = 1;
    /// Undesired-harmonic power levels in dB relative to the desired output
    /// (radiated side for tx, port side for rx); the desired index is absent.
    std::map<int, double> spurious_db;
};

/// Unmodulated differential-mode transfer at the given frequency: odd port
/// drive (+I, -I) to differential node amplitude per ampere. By reciprocity
/// this equals the reverse transfer (differential drive to odd port
/// amplitude), so one value normalizes both directions.
inline cplx reference_transfer(const ElementCircuit& circuit, double frequency) {
    LinearSolution s = solve_linear(circuit, frequency, 1.0, -1.0);
    return s.node_1 - s.node_2;
}

namespace detail {

inline std::map<int, double> spurious_levels(const Eigen::VectorXd& power,
                                             const HarmonicBasis& basis, int desired) {
    std::map<int, double> out;
    const double ref = power(basis.index_of(desired));
    for (int k = -basis.order(); k <= basis.order(); ++k) {
        if (k == desired) continue;
        const double p = power(basis.index_of(k));
        out[k] = ref > 0.0 ? (p > 0.0 ? 10.0 * std::log10(p / ref) : -400.0) : 0.0;
    }
    return out;
}

}  // namespace detail

/// Transmit response: drive the ports in phase at the carrier, read the
/// differential amplitude at the desired harmonic.
inline ElementResponse element_tx_response(const ElementCircuit& circuit,
                                           const HarmonicBasis& basis, int desired_harmonic = 1) {
    if (!basis.contains(desired_harmonic) || desired_harmonic == 0)
        throw std::domain_error("desired harmonic must be a nonzero basis index");
    ElementResponse resp;
    resp.desired_harmonic = desired_harmonic;

    const HarmonicSpectrum spec =
        solve_element(circuit, basis, Excitation::port_drive(1.0, 0));
    const RadiatedSpectrum rad = radiated_spectrum(spec, circuit);
    resp.tx_raw = rad.amplitude_at(desired_harmonic);
    resp.reference = reference_transfer(circuit, basis.frequency(desired_harmonic));
    resp.tx_transfer = resp.tx_raw / resp.reference;
    resp.spurious_db = detail::spurious_levels(rad.power, basis, desired_harmonic);
    return resp;
}

/// Receive response: drive the radiation branch differentially at the desired
/// harmonic, read the summed port amplitude at the carrier.
inline ElementResponse element_rx_response(const ElementCircuit& circuit,
                                           const HarmonicBasis& basis, int desired_harmonic = 1) {
    if (!basis.contains(desired_harmonic) || desired_harmonic == 0)
        throw std::domain_error("desired harmonic must be a nonzero basis index");
    ElementResponse resp;
    resp.desired_harmonic = desired_harmonic;

    const HarmonicSpectrum spec =
        solve_element(circuit, basis, Excitation::differential_drive(1.0, desired_harmonic));
    resp.rx_raw = spec.at(CircuitNode::port_1, 0) + spec.at(CircuitNode::port_2, 0);
    resp.reference = reference_transfer(circuit, basis.frequency(desired_harmonic));
    resp.rx_transfer = resp.rx_raw / resp.reference;

    // Spurious outputs on the port side, relative to the carrier line.
    const PortSpectrum port = port_spectrum(spec, circuit);
    resp.spurious_db = detail::spurious_levels(port.power, basis, 0);
    resp.spurious_db.erase(desired_harmonic);  // slot occupied by the drive, not an output
    return resp;
}

/// Copy of the circuit with both resonators' modulation phase replaced
/// (anti-phase offset between the halves preserved).
inline ElementCircuit with_modulation_phase(ElementCircuit circuit, double phase_rad) {
    circuit.resonator_1.modulation_phase = phase_rad;
    circuit.resonator_2.modulation_phase = phase_rad;
    return circuit;
}

struct PhaseConjugationRow {
    double phi_m_deg = 0.0;
    double tx_phase_deg = 0.0;  // unwrapped along the grid
    double rx_phase_deg = 0.0;
    double tx_phase_wrapped_deg = 0.0;  // in (-180, 180]
    double rx_phase_wrapped_deg = 0.0;
    double tx_magnitude = 0.0;
    double rx_magnitude = 0.0;
};

struct PhaseConjugationReport {
    std::vector<PhaseConjugationRow> rows;
    double tx_slope = 0.0;  // d(tx phase)/d(phi_m), rad/rad
    double rx_slope = 0.0;
};

namespace detail {

inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline double unwrap_next(double prev, double value) {
    while (value - prev > 180.0) value -= 360.0;
    while (value - prev < -180.0) value += 360.0;
    return value;
}

}  // namespace detail

/// Transmit / receive phase versus the modulation phase, with least-squares
/// slopes. The tx phase tracks +phi_m and the rx phase tracks -phi_m.
inline PhaseConjugationReport phase_conjugation_report(const ElementCircuit& circuit,
                                                       const HarmonicBasis& basis,
                                                       const std::vector<double>& phase_grid_deg,
                                                       int desired_harmonic = 1) {
    if (phase_grid_deg.size() < 3)
        throw std::domain_error("phase grid needs at least 3 points for a slope fit");
    PhaseConjugationReport report;
    std::vector<double> x, ytx, yrx;
    for (double phi_deg : phase_grid_deg) {
        const ElementCircuit c = with_modulation_phase(circuit, deg_to_rad(phi_deg));
        const ElementResponse tx = element_tx_response(c, basis, desired_harmonic);
        const ElementResponse rx = element_rx_response(c, basis, desired_harmonic);
        PhaseConjugationRow row;
        row.phi_m_deg = phi_deg;
        row.tx_phase_wrapped_deg = wrap_deg(rad_to_deg(std::arg(tx.tx_transfer)));
        row.rx_phase_wrapped_deg = wrap_deg(rad_to_deg(std::arg(rx.rx_transfer)));
        row.tx_magnitude = std::abs(tx.tx_transfer);
        row.rx_magnitude = std::abs(rx.rx_transfer);
        if (report.rows.empty()) {
            row.tx_phase_deg = row.tx_phase_wrapped_deg;
            row.rx_phase_deg = row.rx_phase_wrapped_deg;
        } else {
            row.tx_phase_deg = detail::unwrap_next(report.rows.back().tx_phase_deg,
                                                   row.tx_phase_wrapped_deg);
            row.rx_phase_deg = detail::unwrap_next(report.rows.back().rx_phase_deg,
                                                   row.rx_phase_wrapped_deg);
        }
        x.push_back(deg_to_rad(phi_deg));
        ytx.push_back(deg_to_rad(row.tx_phase_deg));
        yrx.push_back(deg_to_rad(row.rx_phase_deg));
        report.rows.push_back(row);
    }
    report.tx_slope = detail::fit_slope(x, ytx);
    report.rx_slope = detail::fit_slope(x, yrx);
    return report;
}

}  // namespace tmarray
