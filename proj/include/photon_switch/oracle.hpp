#pragma once

// Frequency-domain scattering: the monochromatic steady state of the same
// generator used by the time-domain integrator, plus the closed-form
// single-resonator switch.
//
// For a drive e^{-i omega t} of unit photon flux on the input port the
// steady state solves (Delta I - M_q) psi = sqrt(kappa_1) e_{-N}, Delta = omega - omega_r,
// and the outgoing amplitude in the output port is t = -i sqrt(kappa_2) psi_N.
// With psi scaled by 1/sqrt(2pi) this is t = -i sqrt(kappa_2/2pi) 2pi psi_N for
// the right-hand side sqrt(kappa_1/2pi). The normalisation is pinned by the
// uniform symmetric chain, which transmits perfectly at band centre.

#include <photon_switch/dynamics.hpp>
#include <photon_switch/errors.hpp>
#include <photon_switch/model.hpp>
#include <photon_switch/pulse.hpp>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace photon_switch {

inline constexpr double singular_rcond = 1e-13;

namespace detail {

// No range check; used by quadratures that sweep the whole real line.
inline cplx stationary_transmission_unchecked(const Generator& gen, double omega) {
  if (gen.kappa_2 == 0.0 || gen.kappa_1 == 0.0) return {0.0, 0.0};
  // a decoupled qutrit (q = g) drops out of the solve
  const bool decoupled = gen.matrix(gen.center_index, gen.qutrit_index) == 0.0 &&
                         gen.matrix(gen.qutrit_index, gen.center_index) == 0.0;
  const auto n = decoupled ? gen.chain_length() : gen.dim();
  Eigen::MatrixXcd a = -gen.matrix.topLeftCorner(n, n);
  a.diagonal().array() += omega - gen.frame;
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  rhs(gen.drive_index) = std::sqrt(gen.kappa_1 / two_pi);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  const double rc = lu.rcond();
  if (!(rc > singular_rcond))
    throw SingularSystem(fmt::format("steady-state system is singular at omega = {:.12g} (rcond {:.3g})",
                                     omega, rc));
  const Eigen::VectorXcd psi = lu.solve(rhs);
  return cplx(0.0, -1.0) * std::sqrt(gen.kappa_2 / two_pi) * two_pi * psi(gen.output_index);
}

} // namespace detail

inline cplx stationary_transmission(const DeviceParams& p, const OperatingPoint& op, QubitState q,
                                    double omega) {
  if (std::abs(omega - p.omega_r) > 100.0 * p.J && p.J > 0.0)
    throw InvalidParameters(fmt::format(
        "omega is {:.6g} rad/us from omega_r, outside the +/-100 J validity window",
        omega - p.omega_r));
  return detail::stationary_transmission_unchecked(assemble_generator(p, op, q), omega);
}

// Second route that does not touch assemble_generator: the qutrit is folded
// into a self-energy on the central site and the chain is solved with the
// Thomas recursion. Frequencies are taken from the operating point directly.
inline cplx chain_transmission_recursive(const DeviceParams& p, const OperatingPoint& op,
                                         QubitState q, double omega) {
  const int n = p.n_res;
  if (n < 1 || n % 2 == 0) throw InvalidParameters("chain length must be odd");
  if (p.kappa_1 == 0.0 || p.kappa_2 == 0.0) return {0.0, 0.0};
  const double eta = excitation(q);
  const int center = n / 2;
  const double dressed_center = op.omega_c + (2.0 * eta - 1.0) * op.chi;

  std::vector<cplx> diag(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) diag[static_cast<std::size_t>(i)] = omega - p.omega_r;
  diag[static_cast<std::size_t>(center)] = omega - dressed_center;
  if (eta > 0.0 && p.g_ef > 0.0) {
    const double detuning = omega - op.omega_a;
    if (detuning == 0.0) return {0.0, 0.0};  // the qutrit pins A_0 to zero
    diag[static_cast<std::size_t>(center)] -= eta * p.g_ef * p.g_ef / detuning;
  }
  diag.front() += cplx(0.0, 0.5 * p.kappa_1);
  diag.back() += cplx(0.0, 0.5 * p.kappa_2);

  // (diag_i) x_i - J x_{i-1} - J x_{i+1} = rhs_i, rhs = sqrt(kappa_1) e_0
  std::vector<cplx> cprime(static_cast<std::size_t>(n)), dprime(static_cast<std::size_t>(n));
  const double off = -p.J;
  cprime[0] = off / diag[0];
  dprime[0] = std::sqrt(p.kappa_1) / diag[0];
  for (int i = 1; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const cplx denom = diag[k] - off * cprime[k - 1];
    if (std::abs(denom) == 0.0) throw SingularSystem("zero pivot in chain recursion");
    cprime[k] = off / denom;
    dprime[k] = (0.0 - off * dprime[k - 1]) / denom;
  }
  const cplx last = dprime.back();  // back substitution is not needed for x_{n-1}
  return cplx(0.0, -1.0) * std::sqrt(p.kappa_2) * last;
}

// Closed-form transmission of one resonator between two waveguides, optionally
// with a resonant two-level transition (the bare switch without the array).
inline cplx single_cell_transmission(double omega, double omega_c, double omega_a, double g,
                                     double kappa_1, double kappa_2, bool qubit_on) {
  cplx denom(0.5 * (kappa_1 + kappa_2), omega_c - omega);
  if (qubit_on && g != 0.0) {
    if (omega == omega_a) return {0.0, 0.0};
    denom += g * g / cplx(0.0, omega_a - omega);
  }
  return std::sqrt(kappa_1 * kappa_2) / denom;
}

enum class SpectralQuadrature {
  full_line,      ///< adaptive Gauss-Kronrod over the whole real line
  standard_grid,  ///< trapezoid on the truncated uniform grid
};

// int |t(omega)|^2 |xi(omega)|^2 d omega, the steady-state prediction of T_q(t_inf).
inline double expected_transmission(const DeviceParams& p, const OperatingPoint& op, QubitState q,
                                    const Pulse& pulse,
                                    SpectralQuadrature mode = SpectralQuadrature::full_line,
                                    const GridSpec& grid_spec = {}) {
  validate(pulse);
  const Generator gen = assemble_generator(p, op, q);
  if (mode == SpectralQuadrature::standard_grid) {
    const auto grid = make_grid(pulse, grid_spec);
    std::vector<double> f(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
      f[k] = std::norm(detail::stationary_transmission_unchecked(gen, grid.omega(k))) *
             spectral_density_at_offset(pulse, grid.offsets[k]);
    return grid.integrate(f);
  }
  // omega = omega_0 + tan(theta) / (2 tau_p) turns |xi|^2 d omega into d theta / pi.
  const double scale = 0.5 / pulse.tau_p;
  auto integrand = [&](double theta) {
    const double omega = pulse.omega_0 + scale * std::tan(theta);
    return std::norm(detail::stationary_transmission_unchecked(gen, omega)) / std::numbers::pi;
  };
  const double half = 0.5 * std::numbers::pi;
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, -half, half, 20,
                                                                        1e-11, &error);
}

} // namespace photon_switch
