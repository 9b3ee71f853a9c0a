#pragma once

// Exact free evolution at the critical point g = 1.
//
// For t >= 0 the Hamiltonian is time independent and each mode propagates
// with the closed-form unitary
//
//   U_k(t) = [ [ c - i s S,  i C S ],
//              [ i C S,      c + i s S ] ],
//
//   c = cos(eps_k t),  S = sin(eps_k t),  s = sin(k/2),  C = cos(k/2),
//   eps_k = 4 sin(k/2).
//
// Evaluation cost is independent of t, so series can be sampled at
// arbitrary times without step error. A linearized-dispersion variant
// replaces eps_k by 2k inside the trigonometric arguments only (s and C
// keep the exact k), which makes every mode exactly periodic in N/2.

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "kzising/quench.hpp"

namespace kzising {

enum class Dispersion { exact, linearized };

// eps_k = 4 sin(k/2); strictly increasing on (0, pi), range (0, 4).
inline double dispersion(double k) { return 4.0 * std::sin(0.5 * k); }

inline double dispersion_of(double k, Dispersion kind) {
    return kind == Dispersion::exact ? dispersion(k) : 2.0 * k;
}

// Apply U_k(t) to every mode; stamps the state forward by t.
inline ModeAmplitudes evolve(const ModeAmplitudes& state, double t,
                             Dispersion kind = Dispersion::exact) {
    if (t < 0.0)
        throw std::invalid_argument("evolve: t must be non-negative");
    ModeAmplitudes out = state;
    out.time_stamp = state.time_stamp + t;
    const std::size_t n = state.grid.momenta.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double k = state.grid.momenta[i];
        const double phase = dispersion_of(k, kind) * t;
        const double c = std::cos(phase);
        const double S = std::sin(phase);
        const double s = std::sin(0.5 * k);
        const double C = std::cos(0.5 * k);
        const std::complex<double> v0 = state.v[i];
        const std::complex<double> u0 = state.u[i];
        const std::complex<double> i_unit(0.0, 1.0);
        out.v[i] = (c - i_unit * s * S) * v0 + i_unit * C * S * u0;
        out.u[i] = i_unit * C * S * v0 + (c + i_unit * s * S) * u0;
    }
    return out;
}

}  // namespace kzising
