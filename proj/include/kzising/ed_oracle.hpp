#pragma once

// Brute-force cross-check of the mode pipeline: the full 2^N chain
//
//   H(g) = -sum_i (sigma^x_i sigma^x_{i+1} + g sigma^z_i),  sigma^x_{N+1} = sigma^x_1,
//
// diagonalized exactly and integrated through the same ramp-plus-hold
// protocol. Basis: sigma^z product states; bit i set means spin i points
// down, so sum_i sigma^z_i = N - 2 popcount(s) and each bond flips two
// adjacent bits with amplitude -1. The Hamiltonian is applied on the fly
// (diagonal vector plus N two-bit masks); only the eigensolver builds the
// dense matrix. Parity prod_i sigma^z_i = (-1)^popcount commutes with H,
// so a positive-parity start stays positive-parity; its recorded drift is
// an integrator-error monitor, not physics. Dimension is capped at N = 10
// to keep any single run under a minute.

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "kzising/observables.hpp"
#include "kzising/quench.hpp"
#include "kzising/timeseries.hpp"

namespace kzising {

inline constexpr int ed_min_sites = 4;
inline constexpr int ed_max_sites = 10;

// Full many-body state over the 2^N sigma^z product basis.
struct SpinState {
    int n_spins = 0;
    std::vector<std::complex<double>> amplitudes;  // dimension 2^N
    double time_stamp = 0.0;
};

// H(g) in applicable form: (H psi)_s = -g z_sum[s] psi_s - sum_b psi_{s ^ mask_b}.
struct SpinHamiltonian {
    int n_spins = 0;
    double g = 0.0;
    std::vector<double> z_sum;            // N - 2 popcount(s), per basis state
    std::vector<std::uint32_t> bond_mask;  // two adjacent bits per ring bond

    void apply(const std::complex<double>* psi, std::complex<double>* out) const {
        const std::size_t dim = z_sum.size();
        for (std::size_t s = 0; s < dim; ++s) {
            std::complex<double> acc = -g * z_sum[s] * psi[s];
            for (std::uint32_t mask : bond_mask) acc -= psi[s ^ mask];
            out[s] = acc;
        }
    }

    Eigen::MatrixXd dense() const {
        const auto dim = static_cast<Eigen::Index>(z_sum.size());
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
        for (Eigen::Index s = 0; s < dim; ++s) {
            h(s, s) = -g * z_sum[static_cast<std::size_t>(s)];
            for (std::uint32_t mask : bond_mask)
                h(static_cast<Eigen::Index>(static_cast<std::uint32_t>(s) ^ mask), s) -= 1.0;
        }
        return h;
    }
};

inline SpinHamiltonian build_hamiltonian(int n_spins, double g) {
    if (n_spins < ed_min_sites || n_spins > ed_max_sites || n_spins % 2 != 0)
        throw std::invalid_argument("build_hamiltonian: N must be even and in [4, 10], got " +
                                    std::to_string(n_spins));
    SpinHamiltonian h;
    h.n_spins = n_spins;
    h.g = g;
    const std::uint32_t dim = 1u << n_spins;
    h.z_sum.resize(dim);
    for (std::uint32_t s = 0; s < dim; ++s)
        h.z_sum[s] = n_spins - 2.0 * std::popcount(s);
    h.bond_mask.reserve(static_cast<std::size_t>(n_spins));
    for (int i = 0; i < n_spins; ++i)
        h.bond_mask.push_back((1u << i) | (1u << ((i + 1) % n_spins)));
    return h;
}

inline double state_norm(const SpinState& state) {
    detail::KahanSum acc;
    for (const auto& a : state.amplitudes) acc.add(std::norm(a));
    return acc.value();
}

// <prod_i sigma^z_i>; conserved at +1 on the positive-parity sector.
inline double parity_expectation(const SpinState& state) {
    detail::KahanSum acc;
    for (std::size_t s = 0; s < state.amplitudes.size(); ++s) {
        const double sign = (std::popcount(static_cast<std::uint32_t>(s)) & 1) ? -1.0 : 1.0;
        acc.add(sign * std::norm(state.amplitudes[s]));
    }
    return acc.value();
}

// Site-averaged <sigma^z> (translation invariance makes per-site equal).
inline double transverse_magnetization(const SpinState& state) {
    detail::KahanSum acc;
    for (std::size_t s = 0; s < state.amplitudes.size(); ++s)
        acc.add((state.n_spins - 2.0 * std::popcount(static_cast<std::uint32_t>(s))) *
                std::norm(state.amplitudes[s]));
    return acc.value() / state.n_spins;
}

// |<a|b>|^2
inline double overlap_probability(const SpinState& a, const SpinState& b) {
    if (a.amplitudes.size() != b.amplitudes.size())
        throw std::invalid_argument("overlap_probability: dimension mismatch");
    std::complex<double> ov = 0.0;
    for (std::size_t s = 0; s < a.amplitudes.size(); ++s)
        ov += std::conj(a.amplitudes[s]) * b.amplitudes[s];
    return std::norm(ov);
}

struct EdGroundState {
    double energy = 0.0;
    SpinState state;
};

// Dense symmetric diagonalization; the eigenvector comes back unit-norm
// with an arbitrary global sign (irrelevant: it enters only via |.|^2 or
// as an initial condition).
inline EdGroundState ed_ground_state(int n_spins, double g) {
    const SpinHamiltonian h = build_hamiltonian(n_spins, g);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.dense());
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("ed_ground_state: eigensolver failed");
    EdGroundState gs;
    gs.energy = solver.eigenvalues()(0);
    gs.state.n_spins = n_spins;
    gs.state.time_stamp = 0.0;
    const auto& vec = solver.eigenvectors().col(0);
    gs.state.amplitudes.resize(h.z_sum.size());
    for (std::size_t s = 0; s < h.z_sum.size(); ++s)
        gs.state.amplitudes[s] = vec(static_cast<Eigen::Index>(s));
    return gs;
}

namespace detail {

// i dpsi/dt = H(g(t)) psi on stacked real components [Re psi | Im psi];
// g(t) = 1 - t/tau_Q on the ramp (t <= 0), held at g_c = 1 afterwards.
struct ed_rhs {
    const SpinHamiltonian* ham;  // z_sum and bond masks; its g field is ignored
    double tau_q;

    void operator()(const std::vector<double>& y, std::vector<double>& dydt, double t) const {
        const double g = (t <= 0.0) ? 1.0 - t / tau_q : 1.0;
        const std::size_t dim = ham->z_sum.size();
        const double* re = y.data();
        const double* im = y.data() + dim;
        double* dre = dydt.data();
        double* dim_ = dydt.data() + dim;
        for (std::size_t s = 0; s < dim; ++s) {
            const double d = -g * ham->z_sum[s];
            double h_re = d * re[s];
            double h_im = d * im[s];
            for (std::uint32_t mask : ham->bond_mask) {
                h_re -= re[s ^ mask];
                h_im -= im[s ^ mask];
            }
            dre[s] = h_im;    // d(Re)/dt =  Im(H psi)
            dim_[s] = -h_re;  // d(Im)/dt = -Re(H psi)
        }
    }
};

}  // namespace detail

struct OracleRun {
    TimeSeries sz;    // site-averaged <sigma^z>, observable id Sz_ed
    TimeSeries echo;  // |<psi(0)|psi(t)>|^2, observable id LoschmidtEcho_ed
    SpinState state_at_critical;          // psi at t = 0, the echo reference
    double ground_state_probability = 0;  // overlap^2 with the critical ED ground state
    double max_parity_error = 0.0;        // max |<parity> - 1| over samples
    double max_norm_drift = 0.0;          // max | ||psi||^2 - 1 | over samples
};

// Ramp the full chain from the g_start ground state to the critical point,
// then hold, sampling both observables every dt. Same tolerance semantics
// as the mode drive (end-to-end target; controller runs at tol/100), but
// the default is two decades tighter: this module is the referee, so its
// own error must sit well below the 1e-7 agreement it certifies.
inline OracleRun oracle_run(int n_spins, double tau_q, double g_start, double t_max,
                            double dt = 0.25, double tol = 1e-12) {
    namespace odeint = boost::numeric::odeint;
    const SpinHamiltonian ham = build_hamiltonian(n_spins, 1.0);
    if (!(tau_q > 0.0)) throw std::invalid_argument("oracle_run: tau_Q must be positive");
    if (!(g_start > 1.0))
        throw std::invalid_argument("oracle_run: g_start must exceed g_c = 1");
    if (!(tol > 0.0) || tol > 1e-4)
        throw std::invalid_argument("oracle_run: tol must be in (0, 1e-4]");
    const std::size_t n_samples = detail::sample_count(t_max, dt);
    const std::size_t dim = ham.z_sum.size();

    const EdGroundState initial = ed_ground_state(n_spins, g_start);
    std::vector<double> y(2 * dim);
    for (std::size_t s = 0; s < dim; ++s) {
        y[s] = initial.state.amplitudes[s].real();
        y[dim + s] = initial.state.amplitudes[s].imag();
    }

    const detail::ed_rhs rhs{&ham, tau_q};
    const double eps = 1e-2 * tol;
    auto stepper =
        odeint::make_controlled(eps, eps, odeint::runge_kutta_fehlberg78<std::vector<double>>());
    const double nan_k = std::numeric_limits<double>::quiet_NaN();  // no mode label here
    auto integrate_span = [&](double t_from, double t_to) {
        try {
            odeint::integrate_adaptive(stepper, rhs, y, t_from, t_to, 1e-3);
        } catch (const std::exception& e) {
            throw IntegrationError(nan_k, "full-chain integration failed on [" +
                                              std::to_string(t_from) + ", " +
                                              std::to_string(t_to) + "]: " + e.what());
        }
    };
    integrate_span(-(g_start - 1.0) * tau_q, 0.0);

    OracleRun out;
    out.state_at_critical.n_spins = n_spins;
    out.state_at_critical.time_stamp = 0.0;
    out.state_at_critical.amplitudes.resize(dim);
    for (std::size_t s = 0; s < dim; ++s)
        out.state_at_critical.amplitudes[s] = {y[s], y[dim + s]};
    out.ground_state_probability =
        overlap_probability(ed_ground_state(n_spins, 1.0).state, out.state_at_critical);

    auto series_shell = [&](Observable id) {
        TimeSeries s;
        s.observable = id;
        s.n_spins = n_spins;
        s.tau_q = tau_q;
        s.g_start = g_start;
        s.dt = dt;
        s.t.reserve(n_samples);
        s.value.reserve(n_samples);
        return s;
    };
    out.sz = series_shell(Observable::SzEd);
    out.echo = series_shell(Observable::LoschmidtEchoEd);
    out.echo.logvalue.reserve(n_samples);

    const std::vector<std::complex<double>> psi0 = out.state_at_critical.amplitudes;
    SpinState probe;  // scratch view for the per-sample observables
    probe.n_spins = n_spins;
    probe.amplitudes.resize(dim);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double t = static_cast<double>(i) * dt;
        if (i > 0) integrate_span(static_cast<double>(i - 1) * dt, t);
        probe.time_stamp = t;
        for (std::size_t s = 0; s < dim; ++s) probe.amplitudes[s] = {y[s], y[dim + s]};

        const double drift = std::abs(state_norm(probe) - 1.0);
        if (drift > out.max_norm_drift) out.max_norm_drift = drift;
        if (drift > 1e-6)
            throw IntegrationError(nan_k, "norm drift " + std::to_string(drift) +
                                              " exceeds 1e-6 at t = " + std::to_string(t));
        const double parity_err = std::abs(parity_expectation(probe) - 1.0);
        if (parity_err > out.max_parity_error) out.max_parity_error = parity_err;

        std::complex<double> ov = 0.0;
        for (std::size_t s = 0; s < dim; ++s) ov += std::conj(psi0[s]) * probe.amplitudes[s];
        const double l = std::norm(ov);

        out.sz.t.push_back(t);
        out.sz.value.push_back(transverse_magnetization(probe));
        out.echo.t.push_back(t);
        out.echo.value.push_back(l);
        out.echo.logvalue.push_back(std::log(l));
    }
    return out;
}

}  // namespace kzising
