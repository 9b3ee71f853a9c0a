#pragma once

// Momentum grid and equilibrium Bogoliubov modes of the transverse-field
// Ising chain
//
//   H = -sum_i (sigma^x_i sigma^x_{i+1} + g sigma^z_i),   periodic, N even.
//
// In the positive-parity sector the Jordan-Wigner fermions obey anti-periodic
// boundary conditions, selecting the N/2 positive quasi-momenta
//
//   k = (2j+1) pi / N,   j = 0 .. N/2 - 1.
//
// The instantaneous ground state at field g factorizes over modes,
//
//   u_k = cos(theta_k/2),  v_k = sin(theta_k/2),
//   theta_k = atan2(sin k, g - cos k)  in (0, pi),
//
// with quasiparticle energy eps_k(g) = 2 sqrt(g^2 - 2 g cos k + 1).
// At the critical point g = 1 these reduce to the closed forms
// v_k = cos(k/4 + pi/4), u_k = sin(k/4 + pi/4).

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace kzising {

struct MomentumGrid {
    int n_spins = 0;              // N
    std::vector<double> momenta;  // strictly increasing, all in (0, pi)
};

inline MomentumGrid build_grid(int n_spins) {
    if (n_spins < 4 || n_spins % 2 != 0)
        throw std::invalid_argument("build_grid: N must be an even integer >= 4, got " +
                                    std::to_string(n_spins));
    MomentumGrid grid;
    grid.n_spins = n_spins;
    grid.momenta.resize(static_cast<std::size_t>(n_spins / 2));
    for (int j = 0; j < n_spins / 2; ++j)
        grid.momenta[static_cast<std::size_t>(j)] =
            (2.0 * j + 1.0) * std::numbers::pi / n_spins;
    return grid;
}

// eps_k(g) = 2 sqrt(g^2 - 2 g cos k + 1), the quasiparticle energy at field g.
inline double mode_energy(double k, double g) {
    return 2.0 * std::sqrt(g * g - 2.0 * g * std::cos(k) + 1.0);
}

// Critical-point (g = 1) ground-state pair in closed form.
inline double critical_v(double k) { return std::cos(0.25 * k + 0.25 * std::numbers::pi); }
inline double critical_u(double k) { return std::sin(0.25 * k + 0.25 * std::numbers::pi); }

struct EquilibriumModes {
    double g = 0.0;
    std::vector<double> u;  // cos(theta_k/2), in [0, 1]
    std::vector<double> v;  // sin(theta_k/2), in [0, 1]
};

// The atan2 branch keeps theta_k in (0, pi), hence u, v >= 0; it gives
// u -> 1, v -> 0 deep in the paramagnet and the closed forms above at g = 1.
inline EquilibriumModes equilibrium_modes(const MomentumGrid& grid, double g) {
    EquilibriumModes eq;
    eq.g = g;
    eq.u.reserve(grid.momenta.size());
    eq.v.reserve(grid.momenta.size());
    for (double k : grid.momenta) {
        const double theta = std::atan2(std::sin(k), g - std::cos(k));
        eq.u.push_back(std::cos(0.5 * theta));
        eq.v.push_back(std::sin(0.5 * theta));
    }
    return eq;
}

// Kibble-Zurek scales with unit prefactors: t_hat = xi_hat = sqrt(tau_Q),
// tau_c = N. Used for sanity ratios only; fits determine prefactors.
struct KzScales {
    double tau_q = 0.0;
    double t_hat = 0.0;
    double xi_hat = 0.0;
    double tau_c = 0.0;
    double z = 1.0;
    double nu = 1.0;
    double ratio = 0.0;           // N / sqrt(tau_Q)
    bool finite_size_ok = false;  // ratio >= 20, the scan-grid threshold
};

inline KzScales kz_scales(int n_spins, double tau_q) {
    if (!(tau_q > 0.0))
        throw std::invalid_argument("kz_scales: tau_Q must be positive");
    KzScales s;
    s.tau_q = tau_q;
    s.t_hat = std::sqrt(tau_q);
    s.xi_hat = std::sqrt(tau_q);
    s.tau_c = static_cast<double>(n_spins);
    s.ratio = n_spins / std::sqrt(tau_q);
    s.finite_size_ok = (s.ratio >= 20.0);
    return s;
}

}  // namespace kzising
