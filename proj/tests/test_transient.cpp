#include <catch2/catch_amalgamated.hpp>

#include "tmarray/transient.hpp"

using namespace tmarray;
using Catch::Approx;

namespace {

const ElementCircuit kCircuit = default_element();
const HarmonicBasis kBasis = default_basis();

TransientConfig quick_config() {
    TransientConfig cfg;
    cfg.settle_periods = 8;
    cfg.total_periods = 10;
    cfg.steps_per_period = 16384;
    return cfg;
}

struct Agreement {
    double worst_mag_pct = 0.0;   // relative to the per-node peak
    double worst_phase_deg = 0.0; // significant entries only
};

Agreement compare(const HarmonicSpectrum& hb, const HarmonicSpectrum& ref) {
    Agreement a;
    for (CircuitNode n : {CircuitNode::port_1, CircuitNode::node_1, CircuitNode::node_2,
                          CircuitNode::port_2}) {
        const double peak = hb.at(n).cwiseAbs().maxCoeff();
        for (int k = -hb.basis.order(); k <= hb.basis.order(); ++k) {
            const cplx h = hb.at(n, k), r = ref.at(n, k);
            a.worst_mag_pct =
                std::max(a.worst_mag_pct, std::abs(std::abs(r) - std::abs(h)) / peak * 100.0);
            if (std::abs(h) > 1e-9 * peak)
                a.worst_phase_deg =
                    std::max(a.worst_phase_deg, std::abs(rad_to_deg(std::arg(r / h))));
        }
    }
    return a;
}

}  // namespace

TEST_CASE("common period rationalization", "[transient]") {
    const CommonPeriod p = common_period(2.09e9, 310e6);
    CHECK(p.seconds == Approx(100e-9).epsilon(1e-12));
    CHECK(p.carrier_cycles == 209);
    CHECK(p.modulation_cycles == 31);

    const CommonPeriod integer_ratio = common_period(2.09e9, 2.09e7);
    CHECK(integer_ratio.carrier_cycles == 100);
    CHECK(integer_ratio.modulation_cycles == 1);

    // An irrational ratio has no short common period.
    CHECK_THROWS_AS(common_period(2.09e9, 310e6 * std::sqrt(2.0)), config_error);
}

TEST_CASE("projection of a synthetic pure tone", "[transient]") {
    TransientResult series;
    series.period = common_period(2.09e9, 310e6);
    series.steps_per_period = 4096;
    series.analysis_periods = 1;
    series.dt = series.period.seconds / series.steps_per_period;
    series.time_origin = 0.0;
    const double w1 = kBasis.angular_frequency(1);
    for (int i = 0; i < series.steps_per_period; ++i) {
        const double t = (i + 1) * series.dt;
        series.v_port_1.push_back(std::cos(w1 * t));
        series.v_node_1.push_back(std::cos(w1 * t));
        series.v_node_2.push_back(0.0);
        series.v_port_2.push_back(0.0);
    }
    const HarmonicSpectrum spec = project_spectrum(series, kBasis);
    CHECK(std::abs(spec.at(CircuitNode::node_1, 1) - cplx(1.0, 0.0)) < 1e-10);
    for (int k = -3; k <= 3; ++k) {
        if (k == 1) continue;
        CHECK(std::abs(spec.at(CircuitNode::node_1, k)) < 1e-10);
    }

    SECTION("window truncation is detected as leakage") {
        series.v_node_1.resize(series.v_node_1.size() - 7);
        series.v_node_2.resize(series.v_node_1.size());
        series.v_port_1.resize(series.v_node_1.size());
        series.v_port_2.resize(series.v_node_1.size());
        CHECK_THROWS_AS(project_spectrum(series, kBasis), config_error);
    }
}

TEST_CASE("zero excitation stays identically zero", "[transient]") {
    TransientConfig cfg = quick_config();
    cfg.steps_per_period = 1024;
    cfg.settle_periods = 0;
    cfg.total_periods = 2;
    const TransientResult r =
        simulate_transient(kCircuit, Excitation::port_drive(0.0, 0), kBasis, cfg);
    for (double v : r.v_node_1) CHECK(v == 0.0);
    for (double v : r.v_port_2) CHECK(v == 0.0);
}

TEST_CASE("unmodulated transient matches the linear phasor solution", "[transient]") {
    ElementCircuit lti = kCircuit;
    lti.resonator_1.modulation_index = 0.0;
    lti.resonator_2.modulation_index = 0.0;
    const HarmonicSpectrum ref = transient_reference_spectrum(
        lti, Excitation::port_drive(1.0, 0), kBasis, quick_config());
    const HarmonicSpectrum hb = solve_element(lti, kBasis, Excitation::port_drive(1.0, 0));
    const Agreement a = compare(hb, ref);
    CHECK(a.worst_mag_pct < 0.05);
    CHECK(a.worst_phase_deg < 0.05);
}

TEST_CASE("modulated transient agrees with the harmonic solver", "[transient]") {
    const ElementCircuit c = default_element(0.4);
    const Excitation tx = Excitation::port_drive(1.0, 0);
    const HarmonicSpectrum hb = solve_element(c, kBasis, tx);
    const HarmonicSpectrum ref = transient_reference_spectrum(c, tx, kBasis, quick_config());
    const Agreement a = compare(hb, ref);
    CHECK(a.worst_mag_pct < 1.0);
    CHECK(a.worst_phase_deg < 1.0);

    SECTION("parity structure shows up in the time-domain run too") {
        const double peak = ref.node_1.cwiseAbs().maxCoeff();
        for (int k : {-2, 0, 2})
            CHECK(std::abs(ref.at(CircuitNode::node_1, k) - ref.at(CircuitNode::node_2, k)) <
                  1e-6 * peak);
    }
}

TEST_CASE("receive-side transient agrees with the harmonic solver", "[transient]") {
    const ElementCircuit c = default_element(1.1);
    const Excitation rx = Excitation::differential_drive(1.0, 1);
    const HarmonicSpectrum hb = solve_element(c, kBasis, rx);
    const HarmonicSpectrum ref = transient_reference_spectrum(c, rx, kBasis, quick_config());
    const Agreement a = compare(hb, ref);
    CHECK(a.worst_mag_pct < 1.0);
    CHECK(a.worst_phase_deg < 1.0);
}

TEST_CASE("series loss is modeled consistently in both domains", "[transient]") {
    ElementCircuit lossy = default_element(0.2);
    lossy.series_loss_resistance = 5.0;
    const Excitation tx = Excitation::port_drive(1.0, 0);
    const HarmonicSpectrum hb = solve_element(lossy, kBasis, tx);
    const HarmonicSpectrum ref = transient_reference_spectrum(lossy, tx, kBasis, quick_config());
    const Agreement a = compare(hb, ref);
    CHECK(a.worst_mag_pct < 1.0);
    CHECK(a.worst_phase_deg < 1.0);
    // Loss must actually bite: the radiated line drops relative to the ideal element.
    const HarmonicSpectrum ideal = solve_element(default_element(0.2), kBasis, tx);
    CHECK(std::abs(hb.at(CircuitNode::node_1, 1)) <
          0.999 * std::abs(ideal.at(CircuitNode::node_1, 1)));
}

TEST_CASE("halving the step changes extracted amplitudes by less than 0.1%", "[transient]") {
    const ElementCircuit c = default_element(0.4);
    const Excitation tx = Excitation::port_drive(1.0, 0);
    TransientConfig coarse = quick_config();
    TransientConfig fine = coarse;
    fine.steps_per_period *= 2;
    const HarmonicSpectrum a = transient_reference_spectrum(c, tx, kBasis, coarse);
    const HarmonicSpectrum b = transient_reference_spectrum(c, tx, kBasis, fine);
    for (CircuitNode n : {CircuitNode::port_1, CircuitNode::node_1, CircuitNode::node_2,
                          CircuitNode::port_2}) {
        const double peak = b.at(n).cwiseAbs().maxCoeff();
        for (int k = -3; k <= 3; ++k) {
            const double va = std::abs(a.at(n, k)), vb = std::abs(b.at(n, k));
            if (vb < 1e-6 * peak) continue;
            CHECK(std::abs(va - vb) / vb < tol::step_halving_drift);
        }
    }
}

TEST_CASE("step convergence verification", "[transient]") {
    SECTION("the default budget converges") {
        const double drift = verify_step_convergence(
            default_element(0.4), Excitation::port_drive(1.0, 0), kBasis, quick_config());
        CHECK(drift < tol::step_halving_drift);
    }
    SECTION("a coarse grid is rejected as an accuracy error") {
        TransientConfig coarse = quick_config();
        coarse.steps_per_period = 4096;  // ~17 samples per carrier cycle: RK4 drifts
        CHECK_THROWS_AS(verify_step_convergence(default_element(0.4),
                                                Excitation::port_drive(1.0, 0), kBasis, coarse),
                        accuracy_error);
    }
}

TEST_CASE("steady state is reached and reported", "[transient]") {
    const TransientResult r =
        simulate_transient(kCircuit, Excitation::port_drive(1.0, 0), kBasis, quick_config());
    CHECK(r.steady_state_drift < tol::steady_state_drift);
    CHECK_FALSE(r.settle_extended);
    CHECK(r.period.carrier_cycles == 209);
}

TEST_CASE("energy balances without modulation", "[transient]") {
    ElementCircuit lti = kCircuit;
    lti.resonator_1.modulation_index = 0.0;
    lti.resonator_2.modulation_index = 0.0;
    const TransientResult r =
        simulate_transient(lti, Excitation::port_drive(1.0, 0), kBasis, quick_config());
    const PowerBalance pb = average_power_balance(lti, r, kBasis);
    CHECK(pb.source > 0.0);
    CHECK(pb.mismatch() < 5e-3);
}
