#pragma once

#include "tmarray/common.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <utility>
#include <vector>

namespace tmarray {

/// One radiator in a linear array: position along the array axis, feed
/// amplitude/phase at the carrier, and the phase of its modulation tone.
struct ArrayElement {
    double position_m = 0.0;
    double feed_amplitude = 1.0;        // w_p
    double feed_phase_rad = 0.0;        // psi_p
    double modulation_phase_rad = 0.0;  // phi_mp
};

struct ArrayGeometry {
    std::vector<ArrayElement> elements;

    void validate() const {
        if (elements.empty()) throw std::domain_error("array needs at least one element");
        for (std::size_t i = 0; i < elements.size(); ++i) {
            if (!(elements[i].feed_amplitude >= 0.0))
                throw std::domain_error("feed amplitudes must be >= 0");
            if (i > 0 && !(elements[i].position_m > elements[i - 1].position_m))
                throw std::domain_error("element positions must be strictly increasing");
        }
    }

    /// Uniformly spaced array with unit amplitudes and zero phases.
    static ArrayGeometry uniform(int count, double spacing_m) {
        if (count < 1) throw std::domain_error("array needs at least one element");
        ArrayGeometry g;
        g.elements.resize(count);
        for (int p = 0; p < count; ++p) g.elements[p].position_m = p * spacing_m;
        return g;
    }
};

/// Per-element radiation pattern factor. Isotropic by default; cos^q(theta)
/// approximates a broadside element cut.
class ElementPattern {
public:
    static ElementPattern isotropic() { return ElementPattern{false, 0.0}; }
    static ElementPattern cosine_power(double exponent) {
        if (!(exponent >= 0.0)) throw std::domain_error("cosine exponent must be >= 0");
        return ElementPattern{true, exponent};
    }

    [[nodiscard]] double evaluate(double theta_rad) const {
        if (!cosine_) return 1.0;
        const double c = std::cos(theta_rad);
        return c <= 0.0 ? 0.0 : std::pow(c, exponent_);
    }

    [[nodiscard]] bool is_isotropic() const { return !cosine_; }
    [[nodiscard]] double exponent() const { return exponent_; }

private:
    ElementPattern(bool cosine, double exponent) : cosine_(cosine), exponent_(exponent) {}
    bool cosine_;
    double exponent_;
};

enum class LinkDirection { transmit, receive };

/// Array field at elevation angle theta. Each element contributes
/// w_p * exp(j(psi_p +/- phi_mp)) * exp(j 2 pi x_p sin(theta) / lambda),
/// with + for transmit and - for receive: up-conversion imprints the
/// modulation phase, down-conversion imprints its negative. The free-space
/// wave oscillates at the up-converted frequency in both directions, so one
/// wavelength serves both patterns.
inline cplx array_field(const ArrayGeometry& geometry, const ElementPattern& pattern,
                        double theta_deg, LinkDirection direction, double wavelength_m) {
    if (!(wavelength_m > 0.0)) throw std::domain_error("wavelength must be > 0");
    const double theta = deg_to_rad(theta_deg);
    const double spatial = 2.0 * pi * std::sin(theta) / wavelength_m;
    const double mod_sign = direction == LinkDirection::transmit ? 1.0 : -1.0;
    cplx sum = 0.0;
    for (const ArrayElement& e : geometry.elements) {
        sum += e.feed_amplitude *
               std::polar(1.0, e.feed_phase_rad + mod_sign * e.modulation_phase_rad +
                                   spatial * e.position_m);
    }
    return pattern.evaluate(theta) * sum;
}

enum class Normalization { per_pattern, joint };

/// Transmit and receive cuts over a common angle grid. dB columns are
/// normalized per the chosen mode: per_pattern puts each pattern's own peak
/// at 0 dB (how cuts are usually plotted); joint uses the common peak so
/// levels stay comparable across the two patterns.
struct PatternCut {
    std::vector<double> angles_deg;
    std::vector<cplx> tx_field, rx_field;
    std::vector<double> tx_db, rx_db;
    Normalization normalization = Normalization::per_pattern;
};

inline std::vector<double> angle_grid(double start_deg = -90.0, double stop_deg = 90.0,
                                      double step_deg = 0.5) {
    if (!(step_deg > 0.0) || stop_deg < start_deg) throw std::domain_error("bad angle grid");
    std::vector<double> grid;
    const int n = static_cast<int>(std::round((stop_deg - start_deg) / step_deg));
    grid.reserve(n + 1);
    for (int i = 0; i <= n; ++i) grid.push_back(start_deg + i * step_deg);
    return grid;
}

inline PatternCut pattern_cut(const ArrayGeometry& geometry, const ElementPattern& pattern,
                              const std::vector<double>& grid_deg, double wavelength_m,
                              Normalization normalization = Normalization::per_pattern) {
    geometry.validate();
    if (grid_deg.empty()) throw std::domain_error("pattern cut needs a nonempty grid");
    PatternCut cut;
    cut.normalization = normalization;
    cut.angles_deg = grid_deg;
    cut.tx_field.reserve(grid_deg.size());
    cut.rx_field.reserve(grid_deg.size());
    double tx_peak = 0.0, rx_peak = 0.0;
    for (double th : grid_deg) {
        cut.tx_field.push_back(array_field(geometry, pattern, th, LinkDirection::transmit, wavelength_m));
        cut.rx_field.push_back(array_field(geometry, pattern, th, LinkDirection::receive, wavelength_m));
        tx_peak = std::max(tx_peak, std::abs(cut.tx_field.back()));
        rx_peak = std::max(rx_peak, std::abs(cut.rx_field.back()));
    }
    const double joint_peak = std::max(tx_peak, rx_peak);
    const double tx_ref = normalization == Normalization::joint ? joint_peak : tx_peak;
    const double rx_ref = normalization == Normalization::joint ? joint_peak : rx_peak;
    cut.tx_db.reserve(grid_deg.size());
    cut.rx_db.reserve(grid_deg.size());
    for (std::size_t i = 0; i < grid_deg.size(); ++i) {
        cut.tx_db.push_back(amplitude_db(std::abs(cut.tx_field[i]), tx_ref));
        cut.rx_db.push_back(amplitude_db(std::abs(cut.rx_field[i]), rx_ref));
    }
    return cut;
}

struct IsolationSample {
    double isolation_db = 0.0;  // positive favors transmission
    double theta_deg = 0.0;     // grid angle actually used
    bool off_grid = false;      // requested angle was not a grid sample
};

/// Transmit-over-receive level at an angle, computed from the fields directly
/// (equivalent to the dB difference under joint normalization). Falls back to
/// the nearest grid sample when theta is off the grid.
inline IsolationSample isolation_at(const PatternCut& cut, double theta_deg) {
    if (cut.angles_deg.empty()) throw std::domain_error("isolation_at: empty cut");
    std::size_t best = 0;
    double best_dist = std::abs(cut.angles_deg[0] - theta_deg);
    for (std::size_t i = 1; i < cut.angles_deg.size(); ++i) {
        const double d = std::abs(cut.angles_deg[i] - theta_deg);
        if (d < best_dist) { best_dist = d; best = i; }
    }
    IsolationSample s;
    s.theta_deg = cut.angles_deg[best];
    s.off_grid = best_dist > 1e-9;
    const double tx = std::abs(cut.tx_field[best]);
    const double rx = std::abs(cut.rx_field[best]);
    if (rx == 0.0 && tx == 0.0) s.isolation_db = 0.0;
    else if (rx == 0.0) s.isolation_db = std::numeric_limits<double>::infinity();
    else if (tx == 0.0) s.isolation_db = -std::numeric_limits<double>::infinity();
    else s.isolation_db = 20.0 * std::log10(tx / rx);
    return s;
}

/// Best transmit-over-receive level anywhere on the cut (the isolation the
/// array achieves at its preferred direction).
inline IsolationSample peak_isolation(const PatternCut& cut) {
    IsolationSample best = isolation_at(cut, cut.angles_deg.front());
    for (double th : cut.angles_deg) {
        IsolationSample s = isolation_at(cut, th);
        if (s.isolation_db > best.isolation_db) best = s;
    }
    return best;
}

/// Phases imparted by a two-element array (left element as reference) for a
/// given modulation phase difference. Standard values are wrapped into
/// (-180, 180]. The *_table values follow the reference-table display: the
/// transmit column as-is, the receive column accumulated negatively and shown
/// in (-360, 0].
struct Table1Phases {
    std::array<double, 2> tx_deg{};        // standard wrap
    std::array<double, 2> rx_deg{};
    std::array<double, 2> tx_table_deg{};  // reference-table display
    std::array<double, 2> rx_table_deg{};
};

inline Table1Phases table1_phases(std::pair<double, double> feed_phase_deg, double phi_m_deg) {
    const auto wrap_neg = [](double deg) {
        // into (-360, 0]
        double w = std::fmod(deg, 360.0);
        if (w > 0.0) w -= 360.0;
        if (w <= -360.0) w += 360.0;
        return w == -0.0 ? 0.0 : w;
    };
    Table1Phases t;
    const double tx_l = feed_phase_deg.first;
    const double tx_r = feed_phase_deg.second + phi_m_deg;
    const double rx_l = feed_phase_deg.first;
    const double rx_r = feed_phase_deg.second - phi_m_deg;
    t.tx_deg = {wrap_deg(tx_l), wrap_deg(tx_r)};
    t.rx_deg = {wrap_deg(rx_l), wrap_deg(rx_r)};
    t.tx_table_deg = {wrap_deg(tx_l), wrap_deg(tx_r)};
    t.rx_table_deg = {wrap_neg(rx_l), wrap_neg(rx_r)};
    return t;
}

/// Angle of the strongest lobe. Returns nothing for a flat pattern (all
/// samples equal within 1e-12 relative). Ties within the same tolerance are
/// broken toward the smallest |theta|; an exact +/-theta tie resolves to the
/// negative angle.
inline std::optional<double> main_lobe(const PatternCut& cut, LinkDirection direction) {
    const std::vector<cplx>& field =
        direction == LinkDirection::transmit ? cut.tx_field : cut.rx_field;
    if (field.empty()) throw std::domain_error("main_lobe: empty cut");
    double peak = 0.0, low = std::numeric_limits<double>::infinity();
    for (const cplx& f : field) {
        peak = std::max(peak, std::abs(f));
        low = std::min(low, std::abs(f));
    }
    if (peak - low <= 1e-12 * std::max(peak, 1e-300)) return std::nullopt;
    std::optional<double> best;
    for (std::size_t i = 0; i < field.size(); ++i) {
        if (std::abs(field[i]) < peak * (1.0 - 1e-12)) continue;
        const double th = cut.angles_deg[i];
        if (!best || std::abs(th) < std::abs(*best) - 1e-12 ||
            (std::abs(std::abs(th) - std::abs(*best)) <= 1e-12 && th < *best)) {
            best = th;
        }
    }
    return best;
}

/// Feed and modulation phase profiles that steer the transmit lobe to one
/// angle and the receive lobe to another. With beta(theta) = 2 pi d
/// sin(theta)/lambda, element p gets psi_p = -p (beta_t + beta_r)/2 and
/// phi_mp = -p (beta_t - beta_r)/2, so psi_p + phi_mp = -p beta_t and
/// psi_p - phi_mp = -p beta_r.
inline ArrayGeometry synthesize_split_steering(double target_tx_deg, double target_rx_deg,
                                               double spacing_m, int count,
                                               double wavelength_m) {
    if (count < 1) throw std::domain_error("array needs at least one element");
    if (!(spacing_m > 0.0) || !(wavelength_m > 0.0))
        throw std::domain_error("spacing and wavelength must be > 0");
    if (std::abs(target_tx_deg) > 90.0 || std::abs(target_rx_deg) > 90.0)
        throw std::domain_error("steering targets must lie in the visible range [-90, 90] deg");
    const double beta_t = 2.0 * pi * spacing_m * std::sin(deg_to_rad(target_tx_deg)) / wavelength_m;
    const double beta_r = 2.0 * pi * spacing_m * std::sin(deg_to_rad(target_rx_deg)) / wavelength_m;
    ArrayGeometry g = ArrayGeometry::uniform(count, spacing_m);
    for (int p = 0; p < count; ++p) {
        g.elements[p].feed_phase_rad = -p * 0.5 * (beta_t + beta_r);
        g.elements[p].modulation_phase_rad = -p * 0.5 * (beta_t - beta_r);
    }
    return g;
}

}  // namespace tmarray
