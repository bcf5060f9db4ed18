#pragma once

// Device parameters, the derived dispersive operating point and the validity
// diagnostics of the qutrit-controlled switch.
//
// The switch is a chain of n_res = 2N+1 resonators (frequency omega_r, hopping
// J) whose central resonator (bare frequency omega_c) couples to a ladder
// qutrit g-e-f. The g-e transition sits far from the chain passband and only
// shifts the central resonator by +/-chi; the e-f transition is resonant with
// the dressed central resonator when the qubit is in |e>.
//
// Tuning: omega_c - chi = omega_r (qubit in |g>: uniform chain) and
// omega_c + chi = omega_a = omega_ef - chi (qubit in |e>: resonant JC pair).
// Together with chi = g_ge^2 / (omega_ge - omega_c) these fix
//
//   chi      = root of chi^2 - d chi + g_ge^2 = 0,  d = omega_ge - omega_r,
//   omega_c  = omega_r + chi,
//   omega_ef = omega_r + 3 chi.
//
// Note: the closed form sometimes quoted for omega_ef with a denominator
// (omega_r - omega_ge + sqrt(...)) changes sign for omega_ge > omega_r and does
// not reproduce realistic transmon numbers; omega_r + 3 chi is what the two
// tuning conditions force.

#include <photon_switch/config.hpp>
#include <photon_switch/errors.hpp>
#include <photon_switch/log.hpp>
#include <photon_switch/units.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace photon_switch {

enum class QubitState { g, e };

// |<e|q>|^2
constexpr double excitation(QubitState q) noexcept { return q == QubitState::e ? 1.0 : 0.0; }

constexpr const char* to_string(QubitState q) noexcept { return q == QubitState::e ? "e" : "g"; }

struct DeviceParams {
  double omega_r = 0.0;   ///< chain resonator frequency [rad/us]
  double omega_ge = 0.0;  ///< qubit g-e transition [rad/us]
  double g_ef = 0.0;      ///< resonator coupling to the e-f transition [rad/us]
  std::optional<double> g_ge_override;  ///< g-e coupling; defaults to g_ef/sqrt(2)
  double J = 0.0;         ///< nearest-neighbour hopping [rad/us]
  double kappa_1 = 0.0;   ///< input waveguide exchange rate [rad/us]
  double kappa_2 = 0.0;   ///< output waveguide exchange rate [rad/us]
  int n_res = 7;          ///< number of resonators, odd
  double gamma_res = 0.0; ///< per-resonator loss rate [rad/us], diagnostics only
  double tau_coh = 100.0; ///< qubit coherence time [us], diagnostics only

  // Transmon relation g_ef = sqrt(2) g_ge unless overridden.
  double g_ge() const noexcept { return g_ge_override.value_or(g_ef / std::numbers::sqrt2); }

  // Index N of the chain n = -N..N.
  int half_length() const noexcept { return (n_res - 1) / 2; }
};

// Throws InvalidParameters unless the parameters describe a buildable device.
inline void validate(const DeviceParams& p) {
  auto fail = [](const std::string& msg) { throw InvalidParameters(msg); };
  const double values[] = {p.omega_r, p.omega_ge, p.g_ef, p.J, p.kappa_1,
                           p.kappa_2, p.gamma_res, p.tau_coh};
  for (double v : values)
    if (!std::isfinite(v)) fail("device parameters must be finite");
  if (p.g_ge_override && !std::isfinite(*p.g_ge_override)) fail("g_ge must be finite");
  if (p.n_res < 3 || p.n_res % 2 == 0)
    fail(fmt::format("n_res must be odd and >= 3, got {}", p.n_res));
  if (p.omega_r <= 0.0 || p.omega_ge <= 0.0) fail("omega_r and omega_ge must be positive");
  if (p.g_ef < 0.0 || p.J < 0.0 || p.kappa_1 < 0.0 || p.kappa_2 < 0.0 || p.gamma_res < 0.0 ||
      p.tau_coh < 0.0 || p.g_ge() < 0.0)
    fail("rates and couplings must be non-negative");
}

struct OperatingPoint {
  double omega_c = 0.0;   ///< bare central-resonator frequency [rad/us]
  double omega_ef = 0.0;  ///< e-f transition frequency [rad/us]
  double chi = 0.0;       ///< dispersive shift [rad/us]
  double lambda = 0.0;    ///< g_ge / (omega_ge - omega_c)
  double omega_a = 0.0;   ///< dressed e-f transition, omega_ef - chi
  double alpha = 0.0;     ///< anharmonicity omega_ef - omega_ge [rad/us]
  double alpha_rel = 0.0; ///< (omega_ef - omega_ge) / omega_ge
  double delta_plus = 0.0;   ///< JC detuning chi + g_ef from omega_r
  double delta_minus = 0.0;  ///< JC detuning chi - g_ef from omega_r

  bool dispersive_valid = false;  ///< |lambda| < 0.1
  bool rwa_valid = false;         ///< all couplings and detunings below 5% of the carrier scale
};

inline constexpr double dispersive_threshold = 0.1;
inline constexpr double rwa_threshold = 0.05;
inline constexpr double cra_loss_threshold = 0.05;
inline constexpr double coherence_margin = 10.0;

// chi for the tuning omega_c - chi = omega_r, taking the root that vanishes
// with g_ge (the minus branch for omega_ge > omega_r). The rationalised form
// avoids cancellation when g_ge << |omega_ge - omega_r|.
inline OperatingPoint derive_operating_point(const DeviceParams& p) {
  const double g = p.g_ge();
  const double d = p.omega_ge - p.omega_r;
  const double disc = d * d - 4.0 * g * g;
  if (!(disc > 0.0) && g != 0.0)
    throw DetuningTooSmall(fmt::format(
        "no dispersive solution: (omega_ge - omega_r)^2 = {:.6g} must exceed 4 g_ge^2 = {:.6g} "
        "(2 g_ef^2 for a transmon)",
        d * d, 4.0 * g * g));

  OperatingPoint op;
  if (g == 0.0) {
    op.chi = 0.0;
  } else {
    const double root = std::sqrt(disc);
    op.chi = 2.0 * g * g / (d + std::copysign(root, d));
  }
  op.omega_c = p.omega_r + op.chi;
  op.omega_ef = p.omega_r + 3.0 * op.chi;
  op.omega_a = p.omega_r + 2.0 * op.chi;
  op.lambda = (g == 0.0) ? 0.0 : g / (d - op.chi);
  op.alpha = op.omega_ef - p.omega_ge;
  op.alpha_rel = op.alpha / p.omega_ge;
  op.delta_plus = op.chi + p.g_ef;
  op.delta_minus = op.chi - p.g_ef;

  op.dispersive_valid = std::abs(op.lambda) < dispersive_threshold;

  const double scale = std::min(p.omega_r, op.omega_c);
  const double coupling = std::max({p.J, g, p.g_ef, p.kappa_1, p.kappa_2});
  const double freq_r = std::abs(p.omega_r - op.omega_c) / (p.omega_r + op.omega_c);
  const double freq_ge = std::abs(p.omega_ge - op.omega_c) / (p.omega_ge + op.omega_c);
  const double freq_ef = std::abs(op.omega_ef - op.omega_c) / (op.omega_ef + op.omega_c);
  op.rwa_valid = coupling / scale < rwa_threshold && freq_r < rwa_threshold &&
                 freq_ge < rwa_threshold && freq_ef < rwa_threshold;
  return op;
}

struct BandReport {
  double lower_edge = 0.0;  ///< omega_r - 2J
  double upper_edge = 0.0;  ///< omega_r + 2J
  std::vector<double> modes;         ///< E_n, n = 1..n_res
  std::vector<double> mode_offsets;  ///< E_n - omega_r, exactly antisymmetric
  bool qubit_in_gap = false;         ///< |omega_ge - omega_r| > 2J
  bool dressed_in_band = false;      ///< |omega_a - omega_r| <= 2J

  double width() const noexcept { return upper_edge - lower_edge; }
};

// Tight-binding modes E_n = omega_r - 2J cos(n pi / (n_res + 1)).
inline BandReport passband_diagnostics(const DeviceParams& p, const OperatingPoint& op) {
  BandReport r;
  r.lower_edge = p.omega_r - 2.0 * p.J;
  r.upper_edge = p.omega_r + 2.0 * p.J;
  const int m = p.n_res + 1;
  r.mode_offsets.resize(static_cast<std::size_t>(p.n_res));
  for (int n = 1; n <= p.n_res; ++n) {
    // mirror the upper half so E_n + E_{m-n} = 2 omega_r holds exactly in the offsets
    const int k = std::min(n, m - n);
    const double off = -2.0 * p.J * std::cos(std::numbers::pi * k / m);
    r.mode_offsets[static_cast<std::size_t>(n - 1)] = (n == k) ? off : -off;
  }
  if (m % 2 == 0) r.mode_offsets[static_cast<std::size_t>(m / 2 - 1)] = 0.0;
  r.modes.reserve(r.mode_offsets.size());
  for (double off : r.mode_offsets) r.modes.push_back(p.omega_r + off);
  r.qubit_in_gap = std::abs(p.omega_ge - p.omega_r) > 2.0 * p.J;
  r.dressed_in_band = std::abs(op.omega_a - p.omega_r) <= 2.0 * p.J;
  return r;
}

struct LossReport {
  double cra_loss = 0.0;     ///< n_res gamma_res / (2J)
  double travel_time = 0.0;  ///< tau_p + n_res / (2J) [us]
  bool loss_negligible = false;      ///< cra_loss < 0.05
  bool coherence_sufficient = false; ///< tau_coh >= 10 travel_time
};

inline LossReport loss_diagnostics(const DeviceParams& p, double tau_p) {
  if (!(p.J > 0.0)) throw InvalidParameters("loss diagnostics need J > 0");
  LossReport r;
  r.cra_loss = p.n_res * p.gamma_res / (2.0 * p.J);
  r.travel_time = tau_p + p.n_res / (2.0 * p.J);
  r.loss_negligible = r.cra_loss < cra_loss_threshold;
  r.coherence_sufficient = p.tau_coh >= coherence_margin * r.travel_time;
  return r;
}

// Reads the device keys of a config file; frequencies are f/2pi in MHz.
// `kappa_mhz` sets both exchange rates (symmetric coupling).
inline DeviceParams device_params_from_config(const KeyValueConfig& cfg) {
  DeviceParams p;
  p.omega_r = from_mhz(cfg.require_double("omega_r_mhz"));
  p.omega_ge = from_mhz(cfg.require_double("omega_ge_mhz"));
  p.g_ef = from_mhz(cfg.require_double("g_ef_mhz"));
  if (auto g = cfg.get_double("g_ge_mhz")) {
    p.g_ge_override = from_mhz(*g);
    log::info(fmt::format("g_ge overridden to {} MHz (transmon default would be {:.6g} MHz)", *g,
                          to_mhz(p.g_ef) / std::numbers::sqrt2));
  }
  p.J = from_mhz(cfg.require_double("j_mhz"));
  const auto sym = cfg.get_double("kappa_mhz");
  const auto k1 = cfg.get_double("kappa1_mhz");
  const auto k2 = cfg.get_double("kappa2_mhz");
  if (sym && (k1 || k2)) throw ConfigError("give either kappa_mhz or kappa1_mhz/kappa2_mhz, not both");
  if (sym) {
    p.kappa_1 = p.kappa_2 = from_mhz(*sym);
  } else {
    if (!k1 || !k2) throw ConfigError("missing required keys 'kappa1_mhz' and 'kappa2_mhz'");
    p.kappa_1 = from_mhz(*k1);
    p.kappa_2 = from_mhz(*k2);
  }
  const auto n = cfg.get_int("n_res");
  if (!n) throw ConfigError("missing required key 'n_res'");
  p.n_res = static_cast<int>(*n);
  p.gamma_res = from_mhz(cfg.get_double_or("gamma_res_mhz", 0.0));
  p.tau_coh = cfg.get_double_or("tau_coh_us", 100.0);
  return p;
}

} // namespace photon_switch
