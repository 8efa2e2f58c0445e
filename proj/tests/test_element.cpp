#include <catch2/catch_amalgamated.hpp>

#include "tmarray/element.hpp"

using namespace tmarray;
using Catch::Approx;

namespace {
const HarmonicBasis kBasis = default_basis();

HarmonicBasis retuned_basis(double ratio) {
    const double f0 = 2.09e9;
    return HarmonicBasis(f0, ratio * f0, 3);
}

ElementCircuit retuned_element(double ratio, double phase = 0.0) {
    ElementCircuit c = default_element(phase, 0.29, ratio * 2.09e9);
    const double fr = 2.09e9 * (1.0 + ratio);  // keep resonance at carrier + modulation
    const double l = 1.0 / (c.resonator_1.base_capacitance * std::pow(2.0 * pi * fr, 2));
    c.resonator_1.inductance = l;
    c.resonator_2.inductance = l;
    return c;
}
}  // namespace

TEST_CASE("transfers vanish without modulation", "[element]") {
    ElementCircuit still = default_element(0.0, 0.0);
    const ElementResponse tx = element_tx_response(still, kBasis);
    const ElementResponse rx = element_rx_response(still, kBasis);
    CHECK(std::abs(tx.tx_transfer) < 1e-12);
    CHECK(std::abs(rx.rx_transfer) < 1e-12);
}

TEST_CASE("frozen raw transfers of the stock element", "[element]") {
    // Independently computed with a prototype of the same network,
    // cross-validated against the transient simulator.
    const ElementCircuit c = default_element();
    const ElementResponse tx = element_tx_response(c, kBasis);
    const ElementResponse rx = element_rx_response(c, kBasis);
    CHECK(tx.tx_raw.real() == Approx(-5.1622369370).epsilon(1e-8));
    CHECK(tx.tx_raw.imag() == Approx(-1.0720301528).epsilon(1e-8));
    CHECK(rx.rx_raw.real() == Approx(-4.4954479993).epsilon(1e-8));
    CHECK(rx.rx_raw.imag() == Approx(-0.9335595914).epsilon(1e-8));
    CHECK(std::abs(tx.reference) == Approx(50.0).epsilon(1e-3));
}

TEST_CASE("up/down conversion obeys the exact frequency-ratio law", "[element]") {
    // Drive/read pairs are adjoint, so rx_raw = (w0/w1) e^{-2j phi} tx_raw.
    for (double phi : {0.0, 0.4, 2.2}) {
        const ElementCircuit c = default_element(phi);
        const cplx tx = element_tx_response(c, kBasis).tx_raw;
        const cplx rx = element_rx_response(c, kBasis).rx_raw;
        const cplx law = (2.09 / 2.40) * std::polar(1.0, -2.0 * phi);
        CHECK(std::abs(rx / tx - law) < 1e-9);
    }
}

TEST_CASE("magnitude reciprocity limit", "[element]") {
    SECTION("at fm/f0 = 0.01 the transfers match within one percent") {
        const ElementCircuit c = retuned_element(0.01);
        const HarmonicBasis b = retuned_basis(0.01);
        const double ratio = std::abs(element_rx_response(c, b).rx_raw) /
                             std::abs(element_tx_response(c, b).tx_raw);
        CHECK(std::abs(ratio - 1.0) < 0.01);
        CHECK(ratio == Approx(1.0 / 1.01).epsilon(1e-9));
    }
    SECTION("the ratio approaches one monotonically as fm/f0 shrinks") {
        double prev = 0.0;
        for (double ratio : {0.1, 0.05, 0.02, 0.01, 0.005, 0.002}) {
            const ElementCircuit c = retuned_element(ratio);
            const HarmonicBasis b = retuned_basis(ratio);
            const double r = std::abs(element_rx_response(c, b).rx_raw) /
                             std::abs(element_tx_response(c, b).tx_raw);
            CHECK(r > prev);
            CHECK(r < 1.0);
            prev = r;
        }
    }
}

TEST_CASE("modulation phase shifts tx by +phi and rx by -phi", "[element]") {
    const ElementResponse tx0 = element_tx_response(default_element(0.0), kBasis);
    const ElementResponse tx90 = element_tx_response(default_element(pi / 2), kBasis);
    const ElementResponse rx0 = element_rx_response(default_element(0.0), kBasis);
    const ElementResponse rx90 = element_rx_response(default_element(pi / 2), kBasis);
    CHECK(rad_to_deg(std::arg(tx90.tx_transfer / tx0.tx_transfer)) == Approx(90.0).margin(1e-6));
    CHECK(rad_to_deg(std::arg(rx90.rx_transfer / rx0.rx_transfer)) == Approx(-90.0).margin(1e-6));
}

TEST_CASE("spurious levels of the stock element", "[element]") {
    // The single-resonance lumped element has a loaded Q of about 0.4, far
    // below the sharp filtering a distributed antenna provides, so the image
    // harmonic k=-1 radiates only 2.8 dB below the desired line. The
    // parity-protected lines stay suppressed regardless.
    const ElementResponse tx = element_tx_response(default_element(), kBasis);
    CHECK(tx.spurious_db.at(-1) == Approx(-2.7727).margin(1e-3));
    CHECK(tx.spurious_db.at(3) == Approx(-41.762).margin(1e-2));
    CHECK(tx.spurious_db.at(-3) == Approx(-61.165).margin(1e-2));
    for (int k : {-2, 0, 2}) CHECK(tx.spurious_db.at(k) < -240.0);
    CHECK(tx.spurious_db.count(1) == 0);  // desired line excluded

    const ElementResponse rx = element_rx_response(default_element(), kBasis);
    for (int k : {-3, -1, 3}) CHECK(rx.spurious_db.at(k) < -240.0);  // odd lines cancel at port
    CHECK(rx.spurious_db.count(0) == 0);
}

TEST_CASE("swapping the anti-phase assignment flips odd radiated amplitudes only", "[element]") {
    ElementCircuit swapped = default_element(0.3);
    std::swap(swapped.resonator_1.phase_offset, swapped.resonator_2.phase_offset);
    const HarmonicSpectrum a =
        solve_element(default_element(0.3), kBasis, Excitation::port_drive(1.0, 0));
    const HarmonicSpectrum b = solve_element(swapped, kBasis, Excitation::port_drive(1.0, 0));
    const ElementCircuit c = default_element(0.3);
    const RadiatedSpectrum ra = radiated_spectrum(a, c);
    const RadiatedSpectrum rb = radiated_spectrum(b, c);
    const double peak = std::abs(ra.amplitude_at(1));
    for (int k = -3; k <= 3; ++k) {
        if (k % 2 != 0)
            CHECK(std::abs(rb.amplitude_at(k) + ra.amplitude_at(k)) < 1e-12 * peak);
        CHECK(rb.power_at(k) == Approx(ra.power_at(k)).margin(1e-20 * peak * peak));
    }
    // Port powers are untouched too.
    const PortSpectrum pa = port_spectrum(a, c), pb = port_spectrum(b, c);
    for (int k = -3; k <= 3; ++k)
        CHECK(pb.power_at(k) == Approx(pa.power_at(k)).margin(1e-18));
}

TEST_CASE("phase conjugation report", "[element]") {
    const std::vector<double> grid = {0.0, 90.0, 180.0, 270.0};
    const PhaseConjugationReport rep =
        phase_conjugation_report(default_element(), kBasis, grid);
    REQUIRE(rep.rows.size() == 4);

    SECTION("tx walks up with the grid, rx walks down") {
        for (std::size_t i = 1; i < rep.rows.size(); ++i) {
            CHECK(rep.rows[i].tx_phase_deg - rep.rows[i - 1].tx_phase_deg ==
                  Approx(90.0).margin(1e-6));
            CHECK(rep.rows[i].rx_phase_deg - rep.rows[i - 1].rx_phase_deg ==
                  Approx(-90.0).margin(1e-6));
        }
    }
    SECTION("tx + rx phase is constant across the grid") {
        const double sum0 = rep.rows[0].tx_phase_deg + rep.rows[0].rx_phase_deg;
        for (const PhaseConjugationRow& r : rep.rows)
            CHECK(r.tx_phase_deg + r.rx_phase_deg == Approx(sum0).margin(1e-6));
    }
    SECTION("fitted slopes are +1 and -1") {
        CHECK(rep.tx_slope == Approx(1.0).margin(1e-6));
        CHECK(rep.rx_slope == Approx(-1.0).margin(1e-6));
    }
    SECTION("wrapped phases stay in (-180, 180]") {
        for (const PhaseConjugationRow& r : rep.rows) {
            CHECK(r.tx_phase_wrapped_deg > -180.0);
            CHECK(r.tx_phase_wrapped_deg <= 180.0);
        }
    }
    SECTION("a two-point grid is rejected") {
        CHECK_THROWS_AS(phase_conjugation_report(default_element(), kBasis, {0.0, 90.0}),
                        std::domain_error);
    }
}

TEST_CASE("desired harmonic must be a nonzero basis index", "[element]") {
    CHECK_THROWS_AS(element_tx_response(default_element(), kBasis, 0), std::domain_error);
    CHECK_THROWS_AS(element_tx_response(default_element(), kBasis, 5), std::domain_error);
    // Higher odd harmonics are reachable as a configuration (smoke level).
    const ElementResponse tx3 = element_tx_response(default_element(), kBasis, 3);
    CHECK(std::abs(tx3.tx_transfer) > 0.0);
}
