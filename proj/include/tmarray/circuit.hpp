#pragma once

#include "tmarray/common.hpp"

#include <cmath>
#include <string>

namespace tmarray {

/// Relative phase of the capacitance modulation tone: the two halves of the
/// element are pumped in anti-phase, which is what routes odd harmonics into
/// the radiating (differential) mode.
enum class PhaseOffset { zero, half_turn };

inline double phase_offset_radians(PhaseOffset o) {
    return o == PhaseOffset::zero ? 0.0 : pi;
}

/// Sign the offset contributes to the conversion couplings: e^{j*offset}.
inline double phase_offset_sign(PhaseOffset o) {
    return o == PhaseOffset::zero ? 1.0 : -1.0;
}

/// One time-modulated LC resonator: C(t) = C0 * (1 + m * cos(2*pi*fm*t + phase + offset)).
struct ModulatedResonator {
    double inductance = 0.0;            // H
    double base_capacitance = 0.0;      // F
    double modulation_index = 0.0;      // fractional capacitance swing, in [0, 1)
    double modulation_frequency = 0.0;  // Hz
    double modulation_phase = 0.0;      // rad
    PhaseOffset phase_offset = PhaseOffset::zero;

    /// LC resonant frequency in Hz.
    [[nodiscard]] double resonant_frequency() const {
        return 1.0 / (2.0 * pi * std::sqrt(inductance * base_capacitance));
    }

    /// Instantaneous capacitance at time t.
    [[nodiscard]] double capacitance_at(double t) const {
        return base_capacitance *
               (1.0 + modulation_index *
                          std::cos(2.0 * pi * modulation_frequency * t + modulation_phase +
                                   phase_offset_radians(phase_offset)));
    }

    void validate() const {
        if (!(inductance > 0.0)) throw std::domain_error("resonator inductance must be > 0");
        if (!(base_capacitance > 0.0)) throw std::domain_error("resonator base capacitance must be > 0");
        if (!(modulation_index >= 0.0 && modulation_index < 1.0))
            throw std::domain_error("modulation index must lie in [0, 1)");
        if (!(modulation_frequency > 0.0)) throw std::domain_error("modulation frequency must be > 0");
        if (!std::isfinite(modulation_phase)) throw std::domain_error("modulation phase must be finite");
    }
};

/// Two-resonator antenna element: each resonator couples to its own port
/// through an admittance inverter, and the resonator nodes are bridged by the
/// radiation conductance.
struct ElementCircuit {
    ModulatedResonator resonator_1;
    ModulatedResonator resonator_2;
    double port_conductance = 0.0;       // S
    double inverter = 0.0;               // port admittance inverter, S
    double radiation_conductance = 0.0;  // S
    double series_loss_resistance = 0.0; // ohm, per varactor branch

    void validate() const {
        resonator_1.validate();
        resonator_2.validate();
        if (!(port_conductance > 0.0)) throw std::domain_error("port conductance must be > 0");
        if (!(inverter > 0.0)) throw std::domain_error("port inverter must be > 0");
        if (!(radiation_conductance > 0.0)) throw std::domain_error("radiation conductance must be > 0");
        if (!(series_loss_resistance >= 0.0))
            throw std::domain_error("series loss resistance must be >= 0");
        // The two halves must be structurally identical; only the modulation
        // phasing may differ.
        if (resonator_1.inductance != resonator_2.inductance ||
            resonator_1.base_capacitance != resonator_2.base_capacitance ||
            resonator_1.modulation_index != resonator_2.modulation_index ||
            resonator_1.modulation_frequency != resonator_2.modulation_frequency) {
            throw std::domain_error(
                "resonators may differ only in modulation phase and phase offset");
        }
    }
};

/// Truncated harmonic basis around the carrier: frequencies f0 + k*fm for
/// k in [-K, K]. All of them must be positive; negative-frequency folding is
/// not modeled.
class HarmonicBasis {
public:
    HarmonicBasis(double carrier_frequency, double modulation_frequency, int truncation_order)
        : carrier_(carrier_frequency), modulation_(modulation_frequency), order_(truncation_order) {
        if (!(carrier_ > 0.0)) throw std::domain_error("carrier frequency must be > 0");
        if (!(modulation_ > 0.0)) throw std::domain_error("modulation frequency must be > 0");
        if (order_ < 0) throw std::domain_error("truncation order must be >= 0");
        if (!(carrier_ - order_ * modulation_ > 0.0))
            throw std::domain_error(
                "degenerate basis: lowest harmonic frequency f0 - K*fm is not positive");
    }

    [[nodiscard]] double carrier_frequency() const { return carrier_; }
    [[nodiscard]] double modulation_frequency() const { return modulation_; }
    [[nodiscard]] int order() const { return order_; }
    [[nodiscard]] int size() const { return 2 * order_ + 1; }

    [[nodiscard]] bool contains(int k) const { return k >= -order_ && k <= order_; }

    /// Array slot of harmonic k (bijective on [-K, K]).
    [[nodiscard]] int index_of(int k) const {
        if (!contains(k))
            throw std::domain_error("harmonic index " + std::to_string(k) + " outside basis");
        return k + order_;
    }

    [[nodiscard]] int harmonic_at(int slot) const { return slot - order_; }

    [[nodiscard]] double frequency(int k) const {
        if (!contains(k))
            throw std::domain_error("harmonic index " + std::to_string(k) + " outside basis");
        return carrier_ + k * modulation_;
    }

    [[nodiscard]] double angular_frequency(int k) const { return 2.0 * pi * frequency(k); }

private:
    double carrier_;
    double modulation_;
    int order_;
};

enum class DriveKind {
    /// Equal in-phase current sources on both ports (transmit-side feed).
    port_drive,
    /// Anti-symmetric current source across the radiation branch (receive-side
    /// stand-in for the incident wave, which excites the differential mode).
    differential_drive,
};

struct Excitation {
    DriveKind kind = DriveKind::port_drive;
    double amplitude = 1.0;  // A
    int drive_harmonic = 0;  // harmonic slot carrying the source

    static Excitation port_drive(double amplitude = 1.0, int harmonic = 0) {
        return {DriveKind::port_drive, amplitude, harmonic};
    }
    static Excitation differential_drive(double amplitude = 1.0, int harmonic = +1) {
        return {DriveKind::differential_drive, amplitude, harmonic};
    }

    void validate() const {
        // Zero amplitude is allowed: it yields the trivial all-zero response.
        if (!(amplitude >= 0.0)) throw std::domain_error("excitation amplitude must be >= 0");
    }
};

/// Port inverter value that makes the unmodulated differential mode present a
/// reflection zero at resonance (source conductance transformed onto the
/// doubled radiation conductance).
inline double critical_port_inverter(double port_conductance, double radiation_conductance) {
    return std::sqrt(2.0 * port_conductance * radiation_conductance);
}

/// Stock element: 1 pF / 4.398 nH halves resonant at 2.4 GHz, 100-ohm
/// radiation resistance, 50-ohm ports with critically coupled inverters,
/// modulation index 0.29 at 310 MHz with the halves pumped in anti-phase.
inline ElementCircuit default_element(double modulation_phase = 0.0,
                                      double modulation_index = 0.29,
                                      double modulation_frequency = 310e6) {
    ModulatedResonator res;
    res.inductance = 4.398e-9;
    res.base_capacitance = 1e-12;
    res.modulation_index = modulation_index;
    res.modulation_frequency = modulation_frequency;
    res.modulation_phase = modulation_phase;

    ElementCircuit c;
    c.resonator_1 = res;
    c.resonator_1.phase_offset = PhaseOffset::zero;
    c.resonator_2 = res;
    c.resonator_2.phase_offset = PhaseOffset::half_turn;
    c.port_conductance = 1.0 / 50.0;
    c.radiation_conductance = 1.0 / 100.0;
    c.inverter = critical_port_inverter(c.port_conductance, c.radiation_conductance);
    return c;
}

/// Basis matching the stock element: carrier 2.09 GHz, modulation 310 MHz, K=3.
inline HarmonicBasis default_basis(int order = 3) {
    return HarmonicBasis(2.09e9, 310e6, order);
}

}  // namespace tmarray
