#pragma once

#include "tmarray/conversion.hpp"

#include <Eigen/Dense>

#include <optional>
#include <sstream>

namespace tmarray {

/// The four circuit nodes, in block order.
enum class CircuitNode { port_1, node_1, node_2, port_2 };

inline const char* node_name(CircuitNode n) {
    switch (n) {
        case CircuitNode::port_1: return "port_1";
        case CircuitNode::node_1: return "node_1";
        case CircuitNode::node_2: return "node_2";
        case CircuitNode::port_2: return "port_2";
    }
    return "?";
}

/// Assembled frequency-domain block system. Unknown ordering is
/// [port_1; node_1; node_2; port_2], one (2K+1) harmonic block per node.
struct BlockSystem {
    HarmonicBasis basis;
    Eigen::MatrixXcd matrix;
    Eigen::VectorXcd rhs;
    Excitation excitation;
};

/// Node voltages per harmonic, one complex amplitude per (node, k).
/// Phasor convention: v(t) = Re(V e^{j w t}), amplitudes are peak values.
struct HarmonicSpectrum {
    HarmonicBasis basis;
    Eigen::VectorXcd port_1, node_1, node_2, port_2;

    [[nodiscard]] const Eigen::VectorXcd& at(CircuitNode n) const {
        switch (n) {
            case CircuitNode::port_1: return port_1;
            case CircuitNode::node_1: return node_1;
            case CircuitNode::node_2: return node_2;
            default: return port_2;
        }
    }
    [[nodiscard]] cplx at(CircuitNode n, int k) const { return at(n)(basis.index_of(k)); }
};

struct SolveReport {
    double residual = 0.0;            // ||A x - b|| / ||b||
    double condition_estimate = 0.0;  // 1-norm condition of the block matrix
};

/// Build the 4x4 block current-balance system of the modulated element.
/// Port blocks are diagonal (the ports and inverters are frequency-flat over
/// the basis); the interior blocks hold the tridiagonal resonator matrices
/// bridged by the radiation conductance. The right-hand side places the
/// source current in a single harmonic slot per driven node.
inline BlockSystem assemble_system(const ElementCircuit& circuit, const HarmonicBasis& basis,
                                   const Excitation& exc) {
    circuit.validate();
    exc.validate();
    if (circuit.resonator_1.modulation_frequency != basis.modulation_frequency())
        throw std::domain_error("basis modulation frequency must match the resonators");
    if (!basis.contains(exc.drive_harmonic))
        throw std::domain_error("drive harmonic outside basis");

    const int n = basis.size();
    const Eigen::MatrixXcd ident = Eigen::MatrixXcd::Identity(n, n);
    const Eigen::MatrixXcd y1 =
        build_lossy_resonator_matrix(circuit.resonator_1, basis, circuit.series_loss_resistance);
    const Eigen::MatrixXcd y2 =
        build_lossy_resonator_matrix(circuit.resonator_2, basis, circuit.series_loss_resistance);
    const cplx j_inv(0.0, circuit.inverter);

    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(4 * n, 4 * n);
    auto block = [&](int r, int c) { return a.block(r * n, c * n, n, n); };
    block(0, 0) = circuit.port_conductance * ident;
    block(0, 1) = j_inv * ident;
    block(1, 0) = j_inv * ident;
    block(1, 1) = y1 + circuit.radiation_conductance * ident;
    block(1, 2) = -circuit.radiation_conductance * ident;
    block(2, 1) = -circuit.radiation_conductance * ident;
    block(2, 2) = y2 + circuit.radiation_conductance * ident;
    block(2, 3) = j_inv * ident;
    block(3, 2) = j_inv * ident;
    block(3, 3) = circuit.port_conductance * ident;

    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(4 * n);
    const int slot = basis.index_of(exc.drive_harmonic);
    if (exc.kind == DriveKind::port_drive) {
        b(0 * n + slot) = exc.amplitude;
        b(3 * n + slot) = exc.amplitude;
    } else {
        b(1 * n + slot) = exc.amplitude;
        b(2 * n + slot) = -exc.amplitude;
    }
    return BlockSystem{basis, std::move(a), std::move(b), exc};
}

/// Solve the block system by dense LU. Refuses solutions whose relative
/// residual exceeds tol::solver_residual or whose condition estimate exceeds
/// tol::condition_limit.
inline HarmonicSpectrum solve_harmonics(const BlockSystem& system, SolveReport* report = nullptr) {
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(system.matrix);
    const double rcond = lu.rcond();
    const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (!(cond < tol::condition_limit)) {
        std::ostringstream msg;
        msg << "block system is ill-conditioned: condition estimate " << cond
            << " exceeds " << tol::condition_limit;
        throw numerical_error(msg.str());
    }
    Eigen::VectorXcd x = lu.solve(system.rhs);
    const double rhs_norm = system.rhs.norm();
    const double residual = rhs_norm > 0.0 ? (system.matrix * x - system.rhs).norm() / rhs_norm
                                           : (system.matrix * x).norm();
    if (!(residual < tol::solver_residual)) {
        std::ostringstream msg;
        msg << "solve residual " << residual << " exceeds " << tol::solver_residual
            << " (condition estimate " << cond << ")";
        throw numerical_error(msg.str());
    }
    if (report) *report = SolveReport{residual, cond};
    if (!x.allFinite()) throw numerical_error("solve produced non-finite amplitudes");

    const int n = system.basis.size();
    HarmonicSpectrum spec{system.basis, x.segment(0, n), x.segment(n, n), x.segment(2 * n, n),
                          x.segment(3 * n, n)};
    return spec;
}

/// Convenience: assemble and solve in one step.
inline HarmonicSpectrum solve_element(const ElementCircuit& circuit, const HarmonicBasis& basis,
                                      const Excitation& exc, SolveReport* report = nullptr) {
    return solve_harmonics(assemble_system(circuit, basis, exc), report);
}

}  // namespace tmarray
