#pragma once

// Closed-form approximations for the slow ramp, valid in the scaling
// regime x = k sqrt(tau_Q) = O(1), tau_Q >> 1.
//
// End-of-ramp amplitudes, with Gaussian cutoff G = exp(-pi tau_Q k^2/4):
//
//   v_k(0) ~ sqrt(tau_Q) k sqrt(pi/2) G
//   u_k(0) ~ G e^{-i pi/4} [1 + (i/2) tau_Q k^2 (gamma + ln 2)]
//
// Excitation probability in the scaling variable (equal to |u - v|^2 / 2,
// the small-k limit of |v_eq u - u_eq v|^2 on the forms above):
//
//   p(x) = (1/8) e^{-pi x^2/2} [(x sqrt(pi) - 2)^2 + (x sqrt(pi) - x^2 (gamma + ln2))^2]
//
// Ground-state probability p_GS ~ exp(-C N / sqrt(tau_Q)) with
//
//   C = -(1/2pi) Int_0^inf ln(1 - p(x)) dx ~ 0.0339.
//
// Transverse magnetization at the critical point, time-dependent part:
//
//   series:  -(4/N) sum_k [sin^2(e_k t) + (sqrt(pi)/2) k sqrt(tau_Q) sin(2 e_k t)
//                          + (pi/2) k^2 tau_Q cos^2(e_k t)] e^{-pi tau_Q k^2/2}
//   train:   (1/(pi sqrt(2 tau_Q))) sum_{s>=0} (-1)^s e^{-8 (t - s N/4)^2/(pi tau_Q)}
//
// with peak amplitude A = 1/(pi sqrt(2 tau_Q)) and full width at half
// amplitude W = sqrt(pi ln2 / 2) sqrt(tau_Q); A W is tau_Q independent.
//
// Loschmidt echo:
//
//   product:  log L = sum_k ln(1 - sin^2(e_k t) e^{-pi tau_Q k^2})
//   revivals: L = exp(-(N/(8 pi sqrt(tau_Q))) (1 - sum_{s>=0} e^{-4 (t - s N/2)^2/(pi tau_Q)}))
//
// with predicted revival width 2 pi sqrt(2 ln2) tau_Q^{3/4} / sqrt(N).

#include <cmath>
#include <complex>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kzising/observables.hpp"

namespace kzising {

inline constexpr double euler_gamma = 0.5772156649015329;

// Closed-form critical amplitudes. v is real nonnegative and |u| <= 1;
// both carry the Gaussian factor exp(-pi tau_Q k^2/4).
struct ApproxAmplitudes {
    MomentumGrid grid;
    std::vector<std::complex<double>> v;
    std::vector<std::complex<double>> u;
    double tau_q = 0.0;
};

inline ApproxAmplitudes approx_amplitudes(const MomentumGrid& grid, double tau_q) {
    if (!(tau_q > 0.0))
        throw std::invalid_argument("approx_amplitudes: tau_Q must be positive");
    if (tau_q < 10.0)
        std::cerr << "approx_amplitudes: tau_Q = " << tau_q
                  << " is below 10; the closed forms assume tau_Q >> 1\n";
    ApproxAmplitudes out;
    out.grid = grid;
    out.tau_q = tau_q;
    out.v.reserve(grid.momenta.size());
    out.u.reserve(grid.momenta.size());
    constexpr double pi = std::numbers::pi;
    const std::complex<double> phase{std::cos(0.25 * pi), -std::sin(0.25 * pi)};
    for (double k : grid.momenta) {
        const double cutoff = std::exp(-0.25 * pi * tau_q * k * k);
        out.v.emplace_back(std::sqrt(0.5 * pi * tau_q) * k * cutoff, 0.0);
        out.u.push_back(cutoff * phase *
                        std::complex<double>{1.0, 0.5 * tau_q * k * k * (euler_gamma + std::numbers::ln2)});
    }
    return out;
}

// p(x): excitation probability of the closed-form amplitudes as a function
// of x = k sqrt(tau_Q) alone. Also the integrand kernel of constant_C.
inline double approx_excitation_probability(double x) {
    const double sp = std::sqrt(std::numbers::pi) * x;
    const double poly = x * x * (euler_gamma + std::numbers::ln2);
    return 0.125 * std::exp(-0.5 * std::numbers::pi * x * x) *
           ((sp - 2.0) * (sp - 2.0) + (sp - poly) * (sp - poly));
}

// C = -(1/2pi) Int_0^inf ln(1 - p(x)) dx. The integrand decays like
// e^{-pi x^2/2} times a polynomial, so truncation at x = 10 contributes
// below 1e-12; the Gauss-Kronrod error estimate is required under 1e-8.
inline double constant_C() {
    static const double value = [] {
        const auto integrand = [](double x) {
            return std::log1p(-approx_excitation_probability(x));
        };
        double abs_err = 0.0;
        const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            integrand, 0.0, 10.0, 12, 1e-12, &abs_err);
        if (!(abs_err < 1e-8))
            throw std::runtime_error("constant_C: quadrature error estimate " +
                                     std::to_string(abs_err) + " exceeds 1e-8");
        return -integral / (2.0 * std::numbers::pi);
    }();
    return value;
}

// p_GS ~ exp(-C N / sqrt(tau_Q)) with the quadrature value of C.
inline double approx_ground_state_probability(int n_spins, double tau_q) {
    if (!(tau_q > 0.0))
        throw std::invalid_argument("approx_ground_state_probability: tau_Q must be positive");
    return std::exp(-constant_C() * n_spins / std::sqrt(tau_q));
}

// Leading-order series for the time-dependent part of S^z at g = 1,
// with the exact dispersion e_k = 4 sin(k/2) inside the trig arguments.
inline double sz_leading_series(const MomentumGrid& grid, double tau_q, double t) {
    if (!(tau_q > 0.0))
        throw std::invalid_argument("sz_leading_series: tau_Q must be positive");
    constexpr double pi = std::numbers::pi;
    const double sqrt_tau = std::sqrt(tau_q);
    detail::KahanSum acc;
    for (double k : grid.momenta) {
        const double arg = dispersion(k) * t;
        const double s = std::sin(arg);
        const double c = std::cos(arg);
        const double cutoff = std::exp(-0.5 * pi * tau_q * k * k);
        acc.add((s * s + 0.5 * std::sqrt(pi) * k * sqrt_tau * std::sin(2.0 * arg) +
                 0.5 * pi * k * k * tau_q * c * c) *
                cutoff);
    }
    return -4.0 / grid.n_spins * acc.value();
}

namespace detail {

// Sum_{s>=0} (+-1)^s exp(-(t - s period)^2 / denom), keeping only terms
// whose Gaussian factor is at least 1e-16.
inline double gaussian_comb(double t, double period, double denom, bool alternating) {
    const double width = std::sqrt(denom * 16.0 * std::numbers::ln10);
    long s_lo = static_cast<long>(std::ceil((t - width) / period));
    long s_hi = static_cast<long>(std::floor((t + width) / period));
    if (s_lo < 0) s_lo = 0;
    double acc = 0.0;
    for (long s = s_lo; s <= s_hi; ++s) {
        const double d = t - period * static_cast<double>(s);
        const double term = std::exp(-d * d / denom);
        acc += (alternating && (s & 1L)) ? -term : term;
    }
    return acc;
}

}  // namespace detail

// Peak amplitude and full width at half amplitude of the Gaussian train.
inline double sz_train_amplitude(double tau_q) {
    return 1.0 / (std::numbers::pi * std::sqrt(2.0 * tau_q));
}
inline double sz_train_fwhm(double tau_q) {
    return std::sqrt(0.5 * std::numbers::pi * std::numbers::ln2 * tau_q);
}

// Anti-periodic Gaussian train for the time-dependent part of S^z:
// peaks of alternating sign at t = s N/4, amplitude A, width W.
inline double sz_gaussian_train(int n_spins, double tau_q, double t) {
    if (n_spins <= 0 || !(tau_q > 0.0))
        throw std::invalid_argument("sz_gaussian_train: need n_spins > 0 and tau_Q > 0");
    constexpr double pi = std::numbers::pi;
    return sz_train_amplitude(tau_q) *
           detail::gaussian_comb(t, 0.25 * n_spins, 0.125 * pi * tau_q, true);
}

// log L as a product over modes, exact at t = 0 and accurate between
// revivals; the linearized toggle makes it exactly N/2-periodic.
inline double echo_product_approx(const MomentumGrid& grid, double tau_q, double t,
                                  Dispersion kind = Dispersion::exact) {
    if (!(tau_q > 0.0))
        throw std::invalid_argument("echo_product_approx: tau_Q must be positive");
    detail::KahanSum acc;
    for (double k : grid.momenta) {
        const double s = std::sin(dispersion_of(k, kind) * t);
        acc.add(std::log1p(-s * s * std::exp(-std::numbers::pi * tau_q * k * k)));
    }
    return acc.value();
}

// Baseline of the echo between revivals, exp(-N / (8 pi sqrt(tau_Q))).
inline double echo_revival_baseline(int n_spins, double tau_q) {
    return std::exp(-n_spins / (8.0 * std::numbers::pi * std::sqrt(tau_q)));
}

// Thermodynamic revival form: Gaussian peaks of L at t = s N/2 on top of
// the flat baseline. Valid for N >> sqrt(tau_Q).
inline double echo_gaussian_revivals(int n_spins, double tau_q, double t) {
    if (n_spins <= 0 || !(tau_q > 0.0))
        throw std::invalid_argument("echo_gaussian_revivals: need n_spins > 0 and tau_Q > 0");
    constexpr double pi = std::numbers::pi;
    const double comb = detail::gaussian_comb(t, 0.5 * n_spins, 0.25 * pi * tau_q, false);
    return std::exp(-n_spins / (8.0 * pi * std::sqrt(tau_q)) * (1.0 - comb));
}

// Predicted full width at half amplitude of a revival,
// 2 pi sqrt(2 ln2) tau_Q^{3/4} / sqrt(N) ~ 7.4 tau_Q^{3/4} / sqrt(N).
inline double predicted_echo_fwhm(int n_spins, double tau_q) {
    if (n_spins <= 0 || !(tau_q > 0.0))
        throw std::invalid_argument("predicted_echo_fwhm: need n_spins > 0 and tau_Q > 0");
    return 2.0 * std::numbers::pi * std::sqrt(2.0 * std::numbers::ln2) *
           std::pow(tau_q, 0.75) / std::sqrt(static_cast<double>(n_spins));
}

// Sample an approximation curve on the uniform grid t = 0, dt, ..., in the
// same schema as the exact series. The echo forms fill both the value and
// the log column. g_start has no meaning for closed forms; it is recorded
// as NaN.
inline TimeSeries approx_timeseries(Observable id, const MomentumGrid& grid, double tau_q,
                                    double t_max, double dt) {
    if (id != Observable::SzSeries && id != Observable::SzTrain &&
        id != Observable::EchoProduct && id != Observable::EchoRevivals)
        throw std::invalid_argument(
            "approx_timeseries: id must be SzSeries, SzTrain, EchoProduct or EchoRevivals");
    TimeSeries out;
    out.observable = id;
    out.n_spins = grid.n_spins;
    out.tau_q = tau_q;
    out.g_start = std::numeric_limits<double>::quiet_NaN();
    out.dt = dt;
    const std::size_t m = detail::sample_count(t_max, dt);
    out.t.reserve(m);
    out.value.reserve(m);
    if (id == Observable::EchoProduct || id == Observable::EchoRevivals) out.logvalue.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double t = dt * static_cast<double>(i);
        out.t.push_back(t);
        switch (id) {
            case Observable::SzSeries:
                out.value.push_back(sz_leading_series(grid, tau_q, t));
                break;
            case Observable::SzTrain:
                out.value.push_back(sz_gaussian_train(grid.n_spins, tau_q, t));
                break;
            case Observable::EchoProduct: {
                const double logl = echo_product_approx(grid, tau_q, t);
                out.value.push_back(std::exp(logl));
                out.logvalue.push_back(logl);
                break;
            }
            default: {
                const double l = echo_gaussian_revivals(grid.n_spins, tau_q, t);
                out.value.push_back(l);
                out.logvalue.push_back(std::log(l));
                break;
            }
        }
    }
    return out;
}

}  // namespace kzising
