#pragma once

#include "tmarray/harmonic_system.hpp"

#include <Eigen/Dense>

namespace tmarray {

/// Spectrum seen at the shared physical feed. The two port branches join in
/// one line, so per harmonic the two contributions interfere:
/// amplitude(k) = (V_p1(k) + V_p2(k)) / sqrt(2), which preserves the total
/// dissipated port power G_p*(|V_p1|^2 + |V_p2|^2) for in-phase pairs and
/// cancels anti-phase pairs. Power is in peak-phasor units (G * |V|^2).
struct PortSpectrum {
    HarmonicBasis basis;
    Eigen::VectorXcd amplitude;
    Eigen::VectorXd power;

    [[nodiscard]] cplx amplitude_at(int k) const { return amplitude(basis.index_of(k)); }
    [[nodiscard]] double power_at(int k) const { return power(basis.index_of(k)); }
};

inline PortSpectrum port_spectrum(const HarmonicSpectrum& spec, const ElementCircuit& circuit) {
    const int n = spec.basis.size();
    PortSpectrum out{spec.basis, Eigen::VectorXcd(n), Eigen::VectorXd(n)};
    for (int i = 0; i < n; ++i) {
        out.amplitude(i) = (spec.port_1(i) + spec.port_2(i)) / std::sqrt(2.0);
        out.power(i) = circuit.port_conductance * std::norm(out.amplitude(i));
    }
    return out;
}

/// Differential amplitude across the radiation branch, V_1(k) - V_2(k), and
/// the radiated power G_rad * |V_1 - V_2|^2 per harmonic (peak-phasor units).
struct RadiatedSpectrum {
    HarmonicBasis basis;
    Eigen::VectorXcd amplitude;
    Eigen::VectorXd power;

    [[nodiscard]] cplx amplitude_at(int k) const { return amplitude(basis.index_of(k)); }
    [[nodiscard]] double power_at(int k) const { return power(basis.index_of(k)); }
};

inline RadiatedSpectrum radiated_spectrum(const HarmonicSpectrum& spec,
                                          const ElementCircuit& circuit) {
    const int n = spec.basis.size();
    RadiatedSpectrum out{spec.basis, Eigen::VectorXcd(n), Eigen::VectorXd(n)};
    for (int i = 0; i < n; ++i) {
        out.amplitude(i) = spec.node_1(i) - spec.node_2(i);
        out.power(i) = circuit.radiation_conductance * std::norm(out.amplitude(i));
    }
    return out;
}

/// Node voltages of the unmodulated four-node network at a single frequency,
/// driven by arbitrary port / interior current sources. This is the linear
/// limit of the block system (one harmonic, no conversion).
struct LinearSolution {
    cplx port_1, node_1, node_2, port_2;
};

inline LinearSolution solve_linear(const ElementCircuit& circuit, double frequency,
                                   cplx i_port_1, cplx i_port_2, cplx i_node_1 = 0.0,
                                   cplx i_node_2 = 0.0) {
    circuit.validate();
    if (!(frequency > 0.0)) throw std::domain_error("frequency must be > 0");
    const double w = 2.0 * pi * frequency;
    const cplx yp = resonator_admittance(circuit.resonator_1, w);
    const cplx jj(0.0, circuit.inverter);
    const double gp = circuit.port_conductance;
    const double gr = circuit.radiation_conductance;

    Eigen::Matrix4cd a;
    a << gp, jj, 0, 0,
         jj, yp + gr, -gr, 0,
         0, -gr, yp + gr, jj,
         0, 0, jj, gp;
    Eigen::Vector4cd b;
    b << i_port_1, i_node_1, i_node_2, i_port_2;
    Eigen::Vector4cd x = a.partialPivLu().solve(b);
    return {x(0), x(1), x(2), x(3)};
}

enum class SymmetryMode { even, odd };

/// Driving-point impedance seen from inside the element (at the resonator
/// nodes) with the modulation off.
///
/// Odd mode: differential drive across the radiation branch; the branch
/// contributes its doubled conductance and each port loads the node through
/// the inverter transform J^2/G_p. At the LC resonance with a critically
/// coupled inverter this is purely real and equal to half the radiation
/// resistance. Even mode: common drive; no current crosses the radiation
/// branch, so its conductance drops out entirely.
inline cplx linear_input_impedance(const ElementCircuit& circuit, double frequency,
                                   SymmetryMode mode) {
    circuit.validate();
    if (!(frequency > 0.0)) throw std::domain_error("frequency must be > 0");
    const double w = 2.0 * pi * frequency;
    const cplx yp = resonator_admittance(circuit.resonator_1, w);
    const double port_load = circuit.inverter * circuit.inverter / circuit.port_conductance;
    if (mode == SymmetryMode::odd) {
        return 2.0 / (yp + 2.0 * circuit.radiation_conductance + port_load);
    }
    return 1.0 / (yp + port_load);
}

/// Reflection coefficient at one port of the unmodulated element under
/// differential-mode excitation, referenced to the port conductance.
inline cplx odd_mode_port_reflection(const ElementCircuit& circuit, double frequency) {
    const double w = 2.0 * pi * frequency;
    const cplx yp = resonator_admittance(circuit.resonator_1, w);
    // Inverter loaded by the odd-mode node admittance, seen from the port.
    const cplx y_in = circuit.inverter * circuit.inverter /
                      (yp + 2.0 * circuit.radiation_conductance);
    return (circuit.port_conductance - y_in) / (circuit.port_conductance + y_in);
}

}  // namespace tmarray
