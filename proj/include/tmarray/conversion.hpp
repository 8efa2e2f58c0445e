#pragma once

#include "tmarray/circuit.hpp"

#include <Eigen/Dense>

#include <cstdlib>

namespace tmarray {

/// Conversion coupling between two adjacent harmonics inside one physical
/// resonator, as an admittance-inverter value in siemens (signed real).
///
/// The pumped capacitance transfers current between neighbouring harmonics
/// with strength m*C0/2 scaled by the angular frequency of the *destination*
/// harmonic, so up- and down-conversion through the same pair differ by the
/// ratio of the two harmonic frequencies. The anti-phase resonator carries
/// the opposite sign.
inline double coupling_inverter(int resonator_id, int from_k, int to_k,
                                const ElementCircuit& circuit, const HarmonicBasis& basis) {
    if (resonator_id != 1 && resonator_id != 2)
        throw std::domain_error("resonator id must be 1 or 2");
    if (std::abs(from_k - to_k) != 1)
        throw std::domain_error("conversion couples adjacent harmonics only (in-line topology)");
    if (!basis.contains(from_k) || !basis.contains(to_k))
        throw std::domain_error("harmonic pair outside basis");

    const ModulatedResonator& res =
        resonator_id == 1 ? circuit.resonator_1 : circuit.resonator_2;
    double value = 0.5 * res.modulation_index * res.base_capacitance *
                   basis.angular_frequency(to_k);
    return value * phase_offset_sign(res.phase_offset);
}

/// Admittance of one unmodulated resonator at angular frequency w.
inline cplx resonator_admittance(const ModulatedResonator& res, double w) {
    return cplx(0.0, w * res.base_capacitance) + 1.0 / cplx(0.0, w * res.inductance);
}

/// Harmonic-domain admittance matrix of one time-modulated resonator,
/// (2K+1)x(2K+1) and tridiagonal. Row k is the current balance at harmonic k:
/// the diagonal holds the resonator admittance at f0 + k*fm, and the
/// off-diagonals carry the conversion couplings of coupling_inverter with the
/// modulation phase attached as e^{+j*phase} below and e^{-j*phase} above the
/// diagonal.
inline Eigen::MatrixXcd build_resonator_matrix(const ModulatedResonator& res,
                                               const HarmonicBasis& basis) {
    res.validate();
    const int n = basis.size();
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    const double sign = phase_offset_sign(res.phase_offset);
    const cplx up_phase = std::polar(1.0, res.modulation_phase);
    for (int i = 0; i < n; ++i) {
        const int k = basis.harmonic_at(i);
        const double wk = basis.angular_frequency(k);
        y(i, i) = resonator_admittance(res, wk);
        const cplx coupling = cplx(0.0, 0.5 * res.modulation_index * res.base_capacitance * wk) * sign;
        if (i > 0) y(i, i - 1) = coupling * up_phase;
        if (i < n - 1) y(i, i + 1) = coupling * std::conj(up_phase);
    }
    return y;
}

/// Same matrix with an optional series resistance in the varactor branch.
/// The pumped-capacitor block Yc turns into Yc * (I + Rs*Yc)^{-1}; the
/// inductor leg stays ideal. Rs = 0 reduces to build_resonator_matrix.
inline Eigen::MatrixXcd build_lossy_resonator_matrix(const ModulatedResonator& res,
                                                     const HarmonicBasis& basis,
                                                     double series_resistance) {
    if (series_resistance == 0.0) return build_resonator_matrix(res, basis);
    res.validate();
    const int n = basis.size();
    Eigen::MatrixXcd yc = Eigen::MatrixXcd::Zero(n, n);
    const double sign = phase_offset_sign(res.phase_offset);
    const cplx up_phase = std::polar(1.0, res.modulation_phase);
    for (int i = 0; i < n; ++i) {
        const int k = basis.harmonic_at(i);
        const double wk = basis.angular_frequency(k);
        yc(i, i) = cplx(0.0, wk * res.base_capacitance);
        const cplx coupling = cplx(0.0, 0.5 * res.modulation_index * res.base_capacitance * wk) * sign;
        if (i > 0) yc(i, i - 1) = coupling * up_phase;
        if (i < n - 1) yc(i, i + 1) = coupling * std::conj(up_phase);
    }
    Eigen::MatrixXcd damped =
        (Eigen::MatrixXcd::Identity(n, n) + series_resistance * yc).partialPivLu().solve(yc);
    for (int i = 0; i < n; ++i) {
        const double wk = basis.angular_frequency(basis.harmonic_at(i));
        damped(i, i) += 1.0 / cplx(0.0, wk * res.inductance);
    }
    return damped;
}

}  // namespace tmarray
