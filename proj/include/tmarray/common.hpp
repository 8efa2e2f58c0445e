#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tmarray {

using cplx = std::complex<double>;

inline constexpr double speed_of_light = 299792458.0;  // m/s

/// Thrown when a configuration (file or programmatic setup) is inconsistent.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Thrown when a linear solve or spectral extraction is numerically unreliable.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Thrown when a transient run fails its own convergence checks.
class accuracy_error : public std::runtime_error {
public:
    explicit accuracy_error(const std::string& msg) : std::runtime_error(msg) {}
};

namespace tol {
// Pinned numeric thresholds used across the library.
inline constexpr double solver_residual = 1e-10;      // relative ||Ax-b||/||b||
inline constexpr double condition_limit = 1e12;       // 1-norm condition estimate
inline constexpr double parity_floor = 1e-12;         // symmetry-forbidden amplitude level
inline constexpr double step_halving_drift = 1e-3;    // transient dt convergence
inline constexpr double steady_state_drift = 1e-3;    // trailing-window amplitude drift
}  // namespace tol

inline constexpr double pi = std::numbers::pi;

inline double deg_to_rad(double deg) { return deg * pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / pi; }

/// Wrap an angle in degrees into (-180, 180].
inline double wrap_deg(double deg) {
    double w = std::fmod(deg, 360.0);
    if (w <= -180.0) w += 360.0;
    if (w > 180.0) w -= 360.0;
    return w == -180.0 ? 180.0 : w;
}

/// Amplitude ratio in dB with a -400 dB floor so zero fields stay plottable.
inline double amplitude_db(double amplitude, double reference) {
    if (reference <= 0.0) return 0.0;
    double r = amplitude / reference;
    if (r < 1e-20) return -400.0;
    return 20.0 * std::log10(r);
}

}  // namespace tmarray
