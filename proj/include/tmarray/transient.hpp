#pragma once

#include "tmarray/harmonic_system.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace tmarray {

/// Smallest common period of the carrier and modulation tones, found by
/// rationalizing f0/fm with a continued fraction. Incommensurate pairs (no
/// rational fit within rel_tol below the cycle bound) are rejected.
struct CommonPeriod {
    double seconds = 0.0;
    std::int64_t carrier_cycles = 0;
    std::int64_t modulation_cycles = 0;
};

inline CommonPeriod common_period(double carrier, double modulation,
                                  std::int64_t max_carrier_cycles = 4096,
                                  double rel_tol = 1e-9) {
    if (!(carrier > 0.0) || !(modulation > 0.0))
        throw config_error("common_period: frequencies must be positive");
    const double ratio = carrier / modulation;  // = carrier_cycles / modulation_cycles
    double x = ratio;
    std::int64_t p_prev = 1, q_prev = 0, p = static_cast<std::int64_t>(std::floor(x)), q = 1;
    double frac = x - std::floor(x);
    while (std::abs(ratio - static_cast<double>(p) / static_cast<double>(q)) > rel_tol * ratio) {
        if (frac < 1e-15) break;
        x = 1.0 / frac;
        const std::int64_t a = static_cast<std::int64_t>(std::floor(x));
        frac = x - std::floor(x);
        const std::int64_t p_next = a * p + p_prev;
        const std::int64_t q_next = a * q + q_prev;
        p_prev = p; q_prev = q; p = p_next; q = q_next;
        if (p > max_carrier_cycles) break;
    }
    if (p <= 0 || p > max_carrier_cycles ||
        std::abs(ratio - static_cast<double>(p) / static_cast<double>(q)) > rel_tol * ratio) {
        throw config_error(
            "carrier and modulation frequencies are not commensurate within " +
            std::to_string(max_carrier_cycles) + " carrier cycles");
    }
    return CommonPeriod{static_cast<double>(q) / modulation, p, q};
}

struct TransientConfig {
    int total_periods = 16;        // settle + analysis, in common periods
    int settle_periods = 12;       // discarded before spectral extraction
    int steps_per_period = 32768;  // fixed RK4 step count per common period
    int max_settle_extensions = 3; // settle doublings tried on drift
    std::int64_t max_carrier_cycles = 4096;  // commensurability bound

    [[nodiscard]] int analysis_periods() const { return total_periods - settle_periods; }

    void validate() const {
        if (settle_periods < 0 || total_periods <= settle_periods)
            throw config_error("transient: need total_periods > settle_periods >= 0");
        if (analysis_periods() < 2)
            throw config_error("transient: need at least 2 analysis periods for drift detection");
        if (steps_per_period < 16) throw config_error("transient: steps_per_period too small");
    }
};

/// Sampled steady-state node voltages over the analysis window.
/// Sample i sits at time_origin + (i+1)*dt.
struct TransientResult {
    CommonPeriod period;
    double dt = 0.0;
    double time_origin = 0.0;  // absolute time of the sample *before* the first stored one
    int analysis_periods = 0;
    int steps_per_period = 0;
    Excitation excitation;
    std::vector<double> v_port_1, v_node_1, v_node_2, v_port_2;
    double steady_state_drift = 0.0;  // relative amplitude drift over trailing periods
    bool settle_extended = false;
};

namespace detail {

struct TransientRig {
    // Cached circuit constants.
    double c0, dm, wm, phase1, phase2, l, gp, grad, jp, rs;
    double wd, amp;
    bool port_drive;

    explicit TransientRig(const ElementCircuit& c, const Excitation& exc,
                          const HarmonicBasis& basis)
        : c0(c.resonator_1.base_capacitance),
          dm(c.resonator_1.modulation_index),
          wm(2.0 * pi * c.resonator_1.modulation_frequency),
          phase1(c.resonator_1.modulation_phase + phase_offset_radians(c.resonator_1.phase_offset)),
          phase2(c.resonator_2.modulation_phase + phase_offset_radians(c.resonator_2.phase_offset)),
          l(c.resonator_1.inductance),
          gp(c.port_conductance),
          grad(c.radiation_conductance),
          jp(c.inverter),
          rs(c.series_loss_resistance),
          wd(basis.angular_frequency(exc.drive_harmonic)),
          amp(exc.amplitude),
          port_drive(exc.kind == DriveKind::port_drive) {}

    [[nodiscard]] double cap1(double t) const { return c0 * (1.0 + dm * std::cos(wm * t + phase1)); }
    [[nodiscard]] double cap2(double t) const { return c0 * (1.0 + dm * std::cos(wm * t + phase2)); }

    // State y = (q1, q2, iL1, iL2). The port couplings are realized as
    // gyrators (i_out_port = J*v_node, i_into_node = J*v_port), which have the
    // same driving-point behaviour as the frequency-domain inverters and keep
    // the port branches purely algebraic.
    struct Nodes {
        double v1, v2, vp1, vp2, ic1, ic2;
    };

    [[nodiscard]] Nodes nodes_at(double t, const std::array<double, 4>& y) const {
        const double c1 = cap1(t), c2 = cap2(t);
        double is1 = 0.0, is2 = 0.0, id1 = 0.0, id2 = 0.0;
        const double drive = amp * std::cos(wd * t);
        if (port_drive) { is1 = drive; is2 = drive; }
        else { id1 = drive; id2 = -drive; }

        Nodes n{};
        if (rs == 0.0) {
            n.v1 = y[0] / c1;
            n.v2 = y[1] / c2;
            n.vp1 = (is1 - jp * n.v1) / gp;
            n.vp2 = (is2 - jp * n.v2) / gp;
            n.ic1 = id1 - y[2] - grad * (n.v1 - n.v2) + jp * n.vp1;
            n.ic2 = id2 - y[3] - grad * (n.v2 - n.v1) + jp * n.vp2;
        } else {
            // With series loss the capacitor hides behind Rs, so the node
            // voltages obey a 2x2 algebraic system coupled by G_rad.
            const double g_self = 1.0 / rs + grad + jp * jp / gp;
            const double r1 = id1 + y[0] / (c1 * rs) - y[2] + (jp / gp) * is1;
            const double r2 = id2 + y[1] / (c2 * rs) - y[3] + (jp / gp) * is2;
            const double det = g_self * g_self - grad * grad;
            n.v1 = (g_self * r1 + grad * r2) / det;
            n.v2 = (grad * r1 + g_self * r2) / det;
            n.vp1 = (is1 - jp * n.v1) / gp;
            n.vp2 = (is2 - jp * n.v2) / gp;
            n.ic1 = (n.v1 - y[0] / c1) / rs;
            n.ic2 = (n.v2 - y[1] / c2) / rs;
        }
        return n;
    }

    [[nodiscard]] std::array<double, 4> rhs(double t, const std::array<double, 4>& y) const {
        const Nodes n = nodes_at(t, y);
        return {n.ic1, n.ic2, n.v1 / l, n.v2 / l};
    }
};

inline std::array<double, 4> rk4_step(const TransientRig& rig, double t, double dt,
                                      const std::array<double, 4>& y) {
    auto add = [](const std::array<double, 4>& a, const std::array<double, 4>& b, double s) {
        return std::array<double, 4>{a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2],
                                     a[3] + s * b[3]};
    };
    const auto k1 = rig.rhs(t, y);
    const auto k2 = rig.rhs(t + 0.5 * dt, add(y, k1, 0.5 * dt));
    const auto k3 = rig.rhs(t + 0.5 * dt, add(y, k2, 0.5 * dt));
    const auto k4 = rig.rhs(t + dt, add(y, k3, dt));
    std::array<double, 4> out;
    for (int i = 0; i < 4; ++i)
        out[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

/// Peak amplitude drift of the basis harmonics between the last two stored
/// periods (used for steady-state detection).
inline double trailing_drift(const TransientResult& r, const HarmonicBasis& basis) {
    const int spp = r.steps_per_period;
    const auto window_amp = [&](const std::vector<double>& v, int period, int k) {
        const int begin = period * spp;
        cplx acc = 0.0;
        const double w = basis.angular_frequency(k);
        for (int i = 0; i < spp; ++i) {
            const double t = r.time_origin + (begin + i + 1) * r.dt;
            acc += v[begin + i] * std::polar(1.0, -w * t);
        }
        return std::abs(2.0 * acc / static_cast<double>(spp));
    };
    const int last = r.analysis_periods - 1;
    double worst = 0.0;
    double peak = 0.0;
    std::vector<std::pair<double, double>> amps;
    for (const auto* v : {&r.v_node_1, &r.v_node_2}) {
        for (int k = -basis.order(); k <= basis.order(); ++k) {
            const double a1 = window_amp(*v, last - 1, k);
            const double a2 = window_amp(*v, last, k);
            amps.emplace_back(a1, a2);
            peak = std::max(peak, a2);
        }
    }
    for (auto [a1, a2] : amps) {
        if (a2 < 1e-9 * peak) continue;  // drift of a null is meaningless
        worst = std::max(worst, std::abs(a2 - a1) / a2);
    }
    return worst;
}

}  // namespace detail

/// Integrate the time-varying circuit with fixed-step RK4 and return the
/// steady-state node voltages over the analysis window. Capacitor charge
/// (not voltage) is the state, so the pumped-branch current i = d(Cv)/dt is
/// handled exactly. If the trailing-window amplitudes still drift by more
/// than tol::steady_state_drift the settle time is doubled and the run is
/// repeated, up to max_settle_extensions times.
inline TransientResult simulate_transient(const ElementCircuit& circuit, const Excitation& exc,
                                          const HarmonicBasis& basis,
                                          const TransientConfig& cfg = {}) {
    circuit.validate();
    exc.validate();
    cfg.validate();
    if (!basis.contains(exc.drive_harmonic))
        throw std::domain_error("drive harmonic outside basis");
    const CommonPeriod period =
        common_period(basis.carrier_frequency(), basis.modulation_frequency(),
                      cfg.max_carrier_cycles);

    const detail::TransientRig rig(circuit, exc, basis);
    int settle = cfg.settle_periods;
    const int analysis = cfg.analysis_periods();
    const int spp = cfg.steps_per_period;
    const double dt = period.seconds / spp;

    for (int attempt = 0;; ++attempt) {
        TransientResult r;
        r.period = period;
        r.dt = dt;
        r.analysis_periods = analysis;
        r.steps_per_period = spp;
        r.excitation = exc;
        r.time_origin = static_cast<double>(settle) * period.seconds;
        r.settle_extended = attempt > 0;

        const std::size_t n_analysis = static_cast<std::size_t>(analysis) * spp;
        r.v_port_1.resize(n_analysis);
        r.v_node_1.resize(n_analysis);
        r.v_node_2.resize(n_analysis);
        r.v_port_2.resize(n_analysis);

        std::array<double, 4> y{0.0, 0.0, 0.0, 0.0};
        const std::int64_t settle_steps = static_cast<std::int64_t>(settle) * spp;
        const std::int64_t total_steps = settle_steps + static_cast<std::int64_t>(n_analysis);
        for (std::int64_t i = 0; i < total_steps; ++i) {
            // Keep t on the exact step grid; accumulating t += dt drifts.
            const double t = static_cast<double>(i) * dt;
            y = detail::rk4_step(rig, t, dt, y);
            const std::int64_t j = i - settle_steps;
            if (j >= 0) {
                const double t1 = static_cast<double>(i + 1) * dt;
                const auto nodes = rig.nodes_at(t1, y);
                r.v_port_1[j] = nodes.vp1;
                r.v_node_1[j] = nodes.v1;
                r.v_node_2[j] = nodes.v2;
                r.v_port_2[j] = nodes.vp2;
            }
        }
        r.steady_state_drift = detail::trailing_drift(r, basis);
        if (r.steady_state_drift < tol::steady_state_drift) return r;
        if (attempt >= cfg.max_settle_extensions) {
            throw accuracy_error("transient did not reach steady state: drift " +
                                 std::to_string(r.steady_state_drift) + " after " +
                                 std::to_string(settle) + " settle periods");
        }
        settle *= 2;
    }
}

/// Project the stored window onto the basis harmonics. The window spans an
/// integer number of common periods and every basis frequency is an exact
/// multiple of 1/T, so the uniform-grid sum is an exact discrete projection.
/// Returns raw phasors of the transient network (gyrator port realization).
inline HarmonicSpectrum project_spectrum(const TransientResult& result,
                                         const HarmonicBasis& basis) {
    const std::size_t n = result.v_node_1.size();
    if (n == 0) throw config_error("project_spectrum: empty series");
    const double span = static_cast<double>(n) * result.dt;
    const double periods = span / result.period.seconds;
    if (std::abs(periods - std::round(periods)) > 1e-9 * periods)
        throw config_error("project_spectrum: window does not cover an integer number of periods");
    // Basis tones must land on exact bins of the window.
    const double carrier_cycles = basis.carrier_frequency() * result.period.seconds;
    if (std::abs(carrier_cycles - std::round(carrier_cycles)) > 1e-6)
        throw config_error("project_spectrum: carrier is not periodic over the window");

    HarmonicSpectrum spec{basis, Eigen::VectorXcd(basis.size()), Eigen::VectorXcd(basis.size()),
                          Eigen::VectorXcd(basis.size()), Eigen::VectorXcd(basis.size())};
    const std::vector<double>* series[4] = {&result.v_port_1, &result.v_node_1, &result.v_node_2,
                                            &result.v_port_2};
    Eigen::VectorXcd* out[4] = {&spec.port_1, &spec.node_1, &spec.node_2, &spec.port_2};
    for (int s = 0; s < 4; ++s) {
        for (int k = -basis.order(); k <= basis.order(); ++k) {
            const double w = basis.angular_frequency(k);
            cplx acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double t = result.time_origin + static_cast<double>(i + 1) * result.dt;
                acc += (*series[s])[i] * std::polar(1.0, -w * t);
            }
            (*out[s])(basis.index_of(k)) = 2.0 * acc / static_cast<double>(n);
        }
    }
    return spec;
}

/// Rotate raw transient phasors into the convention of the frequency-domain
/// block system. The transient model realizes the ideal port inverters as
/// gyrators; the two networks are related by a diagonal similarity that
/// multiplies the interior nodes by -j under port drive and the port nodes
/// by +j under differential drive, uniformly over all harmonics.
inline HarmonicSpectrum align_port_coupling_phase(HarmonicSpectrum spec, const Excitation& exc) {
    if (exc.kind == DriveKind::port_drive) {
        spec.node_1 *= cplx(0.0, -1.0);
        spec.node_2 *= cplx(0.0, -1.0);
    } else {
        spec.port_1 *= cplx(0.0, 1.0);
        spec.port_2 *= cplx(0.0, 1.0);
    }
    return spec;
}

/// One-shot reference spectrum, directly comparable with solve_harmonics.
inline HarmonicSpectrum transient_reference_spectrum(const ElementCircuit& circuit,
                                                     const Excitation& exc,
                                                     const HarmonicBasis& basis,
                                                     const TransientConfig& cfg = {},
                                                     TransientResult* raw = nullptr) {
    TransientResult r = simulate_transient(circuit, exc, basis, cfg);
    HarmonicSpectrum spec = align_port_coupling_phase(project_spectrum(r, basis), exc);
    if (raw) *raw = std::move(r);
    return spec;
}

/// Run the simulation at the configured step and again at half the step and
/// compare every significant extracted amplitude. Throws accuracy_error when
/// the change reaches tol::step_halving_drift; returns the worst change.
inline double verify_step_convergence(const ElementCircuit& circuit, const Excitation& exc,
                                      const HarmonicBasis& basis, const TransientConfig& cfg = {}) {
    TransientConfig fine = cfg;
    fine.steps_per_period *= 2;
    const HarmonicSpectrum coarse =
        project_spectrum(simulate_transient(circuit, exc, basis, cfg), basis);
    const HarmonicSpectrum refined =
        project_spectrum(simulate_transient(circuit, exc, basis, fine), basis);
    double worst = 0.0;
    for (CircuitNode n : {CircuitNode::port_1, CircuitNode::node_1, CircuitNode::node_2,
                          CircuitNode::port_2}) {
        const double peak = refined.at(n).cwiseAbs().maxCoeff();
        for (int k = -basis.order(); k <= basis.order(); ++k) {
            const double a = std::abs(coarse.at(n, k)), b = std::abs(refined.at(n, k));
            if (b < 1e-6 * peak) continue;
            worst = std::max(worst, std::abs(a - b) / b);
        }
    }
    if (!(worst < tol::step_halving_drift)) {
        throw accuracy_error("transient step size not converged: halving the step moved "
                             "amplitudes by " +
                             std::to_string(worst * 100.0) + "%");
    }
    return worst;
}

/// Time-averaged source power vs power dissipated in the resistive elements
/// over the analysis window. With the modulation off the two must balance;
/// with pumping on they legitimately differ. Powers are true averages of
/// v(t)*i(t) (half the peak-phasor products).
struct PowerBalance {
    double source = 0.0;
    double dissipated = 0.0;
    [[nodiscard]] double mismatch() const {
        return std::abs(source - dissipated) / std::max(std::abs(source), 1e-300);
    }
};

inline PowerBalance average_power_balance(const ElementCircuit& circuit,
                                          const TransientResult& r,
                                          const HarmonicBasis& basis) {
    PowerBalance pb;
    const std::size_t n = r.v_node_1.size();
    const double wd = basis.angular_frequency(r.excitation.drive_harmonic);
    double src = 0.0, diss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = r.time_origin + static_cast<double>(i + 1) * r.dt;
        const double drive = r.excitation.amplitude * std::cos(wd * t);
        if (r.excitation.kind == DriveKind::port_drive) {
            src += drive * (r.v_port_1[i] + r.v_port_2[i]);
        } else {
            src += drive * (r.v_node_1[i] - r.v_node_2[i]);
        }
        const double vd = r.v_node_1[i] - r.v_node_2[i];
        diss += circuit.port_conductance *
                    (r.v_port_1[i] * r.v_port_1[i] + r.v_port_2[i] * r.v_port_2[i]) +
                circuit.radiation_conductance * vd * vd;
    }
    pb.source = src / static_cast<double>(n);
    pb.dissipated = diss / static_cast<double>(n);
    return pb;
}

}  // namespace tmarray
