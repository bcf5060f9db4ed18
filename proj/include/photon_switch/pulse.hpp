#pragma once

// Single-photon input wave packet with a Lorentzian spectrum.
//
// Conventions: the drive seen by the first chain site is
//   Xi(t) = sqrt(2 pi / tau_p) exp(-t / (2 tau_p) - i omega_0 t) theta(t),
// and the spectral amplitude is its Fourier partner
//   xi(omega) = (1 / 2pi) int dt e^{i omega t} Xi(t)
//             = i sqrt(1 / (2 pi tau_p)) / ((omega - omega_0) + i / (2 tau_p)),
// so Xi(t) = int domega e^{-i omega t} xi(omega) holds exactly. The factor i is
// a global phase; it matters only where the input interferes with re-emitted
// light (the reflected spectrum).

#include <photon_switch/config.hpp>
#include <photon_switch/errors.hpp>
#include <photon_switch/units.hpp>

#include <fmt/format.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

namespace photon_switch {

using cplx = std::complex<double>;

struct Pulse {
  double omega_0 = 0.0;  ///< carrier [rad/us]
  double tau_p = 1.0;    ///< duration [us]; bandwidth gamma_0 = 1 / tau_p

  double bandwidth() const noexcept { return 1.0 / tau_p; }
  bool narrowband() const noexcept { return bandwidth() / omega_0 < 1e-2; }
};

inline void validate(const Pulse& pulse) {
  if (!(pulse.tau_p > 0.0) || !std::isfinite(pulse.tau_p))
    throw InvalidParameters(fmt::format("pulse duration must be positive, got {}", pulse.tau_p));
  if (!std::isfinite(pulse.omega_0))
    throw InvalidParameters("pulse carrier must be finite");
}

// xi as a function of the offset delta = omega - omega_0.
inline cplx spectrum_at_offset(const Pulse& pulse, double delta) {
  const double amp = std::sqrt(1.0 / (two_pi * pulse.tau_p));
  return amp / cplx(0.5 / pulse.tau_p, -delta);
}

inline cplx spectrum(const Pulse& pulse, double omega) {
  return spectrum_at_offset(pulse, omega - pulse.omega_0);
}

// |xi|^2, a normalised Lorentzian of full width 1 / tau_p.
inline double spectral_density_at_offset(const Pulse& pulse, double delta) {
  const double half = 0.5 / pulse.tau_p;
  return half / (std::numbers::pi * (delta * delta + half * half));
}

inline cplx drive(const Pulse& pulse, double t) {
  if (t < 0.0) return {0.0, 0.0};
  const double amp = std::sqrt(two_pi / pulse.tau_p) * std::exp(-t / (2.0 * pulse.tau_p));
  return std::polar(amp, -pulse.omega_0 * t);
}

// Xi(t) e^{i omega_frame t}: the drive in a frame rotating at omega_frame.
inline cplx drive_in_frame(const Pulse& pulse, double t, double omega_frame) {
  if (t < 0.0) return {0.0, 0.0};
  const double amp = std::sqrt(two_pi / pulse.tau_p) * std::exp(-t / (2.0 * pulse.tau_p));
  return std::polar(amp, -(pulse.omega_0 - omega_frame) * t);
}

// Probability that has reached the chain by time t: int_0^t |Xi|^2 / 2pi.
inline double injected_probability(const Pulse& pulse, double t) {
  return t <= 0.0 ? 0.0 : -std::expm1(-t / pulse.tau_p);
}

// Uniform grid omega_0 +/- W / tau_p used by every spectral quadrature.
struct FrequencyGrid {
  double center = 0.0;
  std::vector<double> offsets;  ///< omega - center
  std::vector<double> weights;  ///< trapezoid weights

  std::size_t size() const noexcept { return offsets.size(); }
  double omega(std::size_t k) const noexcept { return center + offsets[k]; }
  double step() const noexcept { return offsets.size() > 1 ? offsets[1] - offsets[0] : 0.0; }

  template <class Range>
  double integrate(const Range& values) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < offsets.size(); ++k) sum += weights[k] * values[k];
    return sum;
  }
};

struct GridSpec {
  double halfwidth = 40.0;  ///< W, in units of 1 / tau_p
  int points = 4001;
};

inline FrequencyGrid make_grid(const Pulse& pulse, const GridSpec& spec = {}) {
  if (spec.points < 3) throw InvalidParameters("frequency grid needs at least 3 points");
  if (!(spec.halfwidth > 0.0)) throw InvalidParameters("grid half-width must be positive");
  FrequencyGrid grid;
  grid.center = pulse.omega_0;
  const auto n = static_cast<std::size_t>(spec.points);
  const double half = spec.halfwidth / pulse.tau_p;
  const double h = 2.0 * half / static_cast<double>(n - 1);
  grid.offsets.resize(n);
  grid.weights.assign(n, h);
  for (std::size_t k = 0; k < n; ++k) grid.offsets[k] = -half + h * static_cast<double>(k);
  grid.offsets[n - 1] = half;
  grid.weights.front() = grid.weights.back() = 0.5 * h;
  return grid;
}

// Nodes for int_{-inf}^{inf} f(omega) d omega through omega = omega_0 + tan(theta) / (2 tau_p).
// The input Lorentzian becomes uniform in theta, so integrands that fall off like
// the pulse spectrum are smooth on the mapped interval. Midpoint rule in theta.
inline FrequencyGrid make_full_line_grid(const Pulse& pulse, int points = 8001) {
  if (points < 3) throw InvalidParameters("full-line grid needs at least 3 points");
  FrequencyGrid grid;
  grid.center = pulse.omega_0;
  const auto n = static_cast<std::size_t>(points);
  const double dtheta = std::numbers::pi / static_cast<double>(n);
  const double scale = 0.5 / pulse.tau_p;
  grid.offsets.resize(n);
  grid.weights.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double theta = -0.5 * std::numbers::pi + (static_cast<double>(k) + 0.5) * dtheta;
    const double c = std::cos(theta);
    grid.offsets[k] = scale * std::tan(theta);
    grid.weights[k] = scale * dtheta / (c * c);
  }
  return grid;
}

struct PulseConfig {
  Pulse pulse;
  GridSpec grid;
};

// `omega0_mhz` is the absolute carrier f/2pi in MHz; defaults to omega_r.
inline PulseConfig pulse_from_config(const KeyValueConfig& cfg, double omega_r) {
  PulseConfig out;
  out.pulse.tau_p = cfg.require_double("tau_p_us");
  const auto carrier = cfg.get_double("omega0_mhz");
  out.pulse.omega_0 = carrier ? from_mhz(*carrier) : omega_r;
  out.grid.halfwidth = cfg.get_double_or("grid_halfwidth", out.grid.halfwidth);
  if (auto n = cfg.get_int("grid_points")) out.grid.points = static_cast<int>(*n);
  validate(out.pulse);
  return out;
}

} // namespace photon_switch
