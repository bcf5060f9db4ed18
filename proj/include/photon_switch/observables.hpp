#pragma once

// Transmission, reflection, switching contrast and spectral distortion.
//
// T_q(t) = kappa_2 int_0^t |A_N|^2. Outgoing spectral amplitudes at t_inf, with
// Delta = omega - omega_r and the trajectory in the omega_r frame:
//
//   B_2(omega) = -i sqrt(kappa_2 / 2pi) int_0^t_inf e^{i Delta tau} A_N(tau) d tau
//   B_1(omega) = xi(omega) - i sqrt(kappa_1 / 2pi) int_0^t_inf e^{i Delta tau} A_{-N}(tau) d tau
//
// The reflected amplitude keeps the interference between the part of the input
// that is turned back at the first site and the re-emitted light.
//
// Distortion: Y_q = 1 - int S_out^q S_in / int S_in^2 on the standard grid, with
// the transmitted spectrum for q = g and the reflected one for q = e; Y = max.

#include <photon_switch/dynamics.hpp>
#include <photon_switch/errors.hpp>
#include <photon_switch/model.hpp>
#include <photon_switch/pulse.hpp>

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <vector>

namespace photon_switch {

struct TransmissionCurve {
  std::vector<double> times;
  std::vector<double> values;

  double final() const { return values.empty() ? 0.0 : values.back(); }
};

// T_q on the adaptive step grid of the trajectory.
inline TransmissionCurve transmission(const Trajectory& traj, double kappa_2) {
  TransmissionCurve c;
  c.times.reserve(traj.steps.size());
  c.values.reserve(traj.steps.size());
  for (const auto& r : traj.steps) {
    c.times.push_back(r.t);
    c.values.push_back(kappa_2 * r.output_integral);
  }
  return c;
}

inline double transmission_at(const Trajectory& traj, double kappa_2, double t) {
  return kappa_2 * traj.record_interpolated(t).output_integral;
}

// int_0^t_max e^{i Delta_k tau} A(tau) d tau for the input-site and output-site
// amplitudes at every offset Delta_k (relative to the trajectory frame).
//
// Offsets up to a few times the amplitude bandwidth use uniform panels with
// 8-point Gauss-Legendre nodes on the continuous extension; the phase advances
// by a per-offset recurrence. Larger offsets integrate the quartic extension
// of every step exactly against e^{i Delta tau}.
struct FourierIntegrals {
  std::vector<cplx> input_site;
  std::vector<cplx> output_site;
};

namespace detail {

// m_k = int_0^1 s^k e^{i w s} ds, k = 0..4.
inline std::array<cplx, 5> oscillatory_moments(double w) {
  std::array<cplx, 5> m{};
  if (std::abs(w) < 4.0) {
    const cplx iw(0.0, w);
    cplx term(1.0, 0.0);
    for (int j = 0; j < 40; ++j) {
      for (int k = 0; k < 5; ++k) m[static_cast<std::size_t>(k)] += term / static_cast<double>(k + j + 1);
      term *= iw / static_cast<double>(j + 1);
      if (std::abs(term) < 1e-18) break;
    }
    return m;
  }
  const cplx e = std::polar(1.0, w);
  const cplx inv = 1.0 / cplx(0.0, w);
  m[0] = (e - 1.0) * inv;
  for (std::size_t k = 1; k < 5; ++k) m[k] = (e - static_cast<double>(k) * m[k - 1]) * inv;
  return m;
}

} // namespace detail

inline FourierIntegrals fourier_integrals(const Trajectory& traj, std::span<const double> offsets,
                                          double t_max) {
  if (traj.segments.empty())
    throw InvalidParameters("spectra need a trajectory integrated with keep_dense");
  t_max = std::min(t_max, traj.t_end);
  constexpr std::array<double, 8> x = {-0.9602898564975363, -0.7966664774136267,
                                       -0.5255324099163290, -0.1834346424956498,
                                       0.1834346424956498,  0.5255324099163290,
                                       0.7966664774136267,  0.9602898564975363};
  constexpr std::array<double, 8> w = {0.1012285362903763, 0.2223810344533745,
                                       0.3137066253678148, 0.3626837833783620,
                                       0.3626837833783620, 0.3137066253678148,
                                       0.2223810344533745, 0.1012285362903763};
  const std::size_t m = offsets.size();
  FourierIntegrals out;
  out.input_site.assign(m, cplx{});
  out.output_site.assign(m, cplx{});
  if (m == 0 || t_max <= 0.0) return out;

  const auto d = static_cast<std::size_t>(traj.drive_index);
  const auto o = static_cast<std::size_t>(traj.output_index);
  const double rate = std::max(traj.rate, 1.0 / traj.pulse.tau_p);
  const double panel_limit = std::max(2.0 * rate, 40.0 / traj.pulse.tau_p);

  std::vector<std::size_t> near, far;
  double near_max = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    if (std::abs(offsets[k]) <= panel_limit) {
      near.push_back(k);
      near_max = std::max(near_max, std::abs(offsets[k]));
    } else {
      far.push_back(k);
    }
  }

  if (!near.empty()) {
    // GL8 stays near machine precision for (frequency * width) up to ~4
    double width = 2.0 / (near_max + rate);
    const auto panels = static_cast<std::size_t>(std::ceil(t_max / width));
    width = t_max / static_cast<double>(panels);
    const std::size_t nn = near.size();
    std::vector<cplx> node_phase(nn * x.size());
    std::vector<cplx> advance(nn), running(nn, cplx(1.0, 0.0));
    for (std::size_t k = 0; k < nn; ++k) {
      const double delta = offsets[near[k]];
      for (std::size_t j = 0; j < x.size(); ++j)
        node_phase[k * x.size() + j] = std::polar(1.0, delta * 0.5 * width * (1.0 + x[j]));
      advance[k] = std::polar(1.0, delta * width);
    }
    std::array<cplx, 8> a_in{}, a_out{};
    auto seg = traj.segments.begin();
    for (std::size_t p = 0; p < panels; ++p) {
      const double t0 = width * static_cast<double>(p);
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double t = t0 + 0.5 * width * (1.0 + x[j]);
        while (seg + 1 != traj.segments.end() && (seg + 1)->t0 <= t) ++seg;
        const double hw = 0.5 * width * w[j];
        a_in[j] = hw * seg->eval(d, t);
        a_out[j] = hw * seg->eval(o, t);
      }
      for (std::size_t k = 0; k < nn; ++k) {
        cplx si{}, so{};
        const cplx* ph = &node_phase[k * x.size()];
        for (std::size_t j = 0; j < x.size(); ++j) {
          si += ph[j] * a_in[j];
          so += ph[j] * a_out[j];
        }
        out.input_site[near[k]] += running[k] * si;
        out.output_site[near[k]] += running[k] * so;
        running[k] *= advance[k];
      }
      if (p % 256 == 255)
        for (auto& r : running) r /= std::abs(r);
    }
  }

  for (const auto& seg : traj.segments) {
    if (far.empty() || seg.t0 >= t_max) break;
    const double h = std::min(seg.h, t_max - seg.t0);
    const double frac = h / seg.h;
    // monomial coefficients of the extension in s = (t - t0) / seg.h
    auto monomials = [&](std::size_t i) {
      const auto& c = seg.coeff;
      std::array<cplx, 5> p = {c[0][i], c[1][i] + c[2][i], c[3][i] + c[4][i] - c[2][i],
                               -(c[3][i] + 2.0 * c[4][i]), c[4][i]};
      double f = 1.0;
      for (auto& v : p) {  // rescale to u = (t - t0) / h when the step is clipped
        v *= f;
        f *= frac;
      }
      return p;
    };
    const auto pin = monomials(d);
    const auto pout = monomials(o);
    for (std::size_t k : far) {
      const double delta = offsets[k];
      const auto mom = detail::oscillatory_moments(delta * h);
      cplx si{}, so{};
      for (std::size_t j = 0; j < 5; ++j) {
        si += pin[j] * mom[j];
        so += pout[j] * mom[j];
      }
      const cplx phase = h * std::polar(1.0, delta * seg.t0);
      out.input_site[k] += phase * si;
      out.output_site[k] += phase * so;
    }
  }
  return out;
}

// Outgoing amplitudes on the frequencies center + offsets of `grid`.
struct OutgoingAmplitudes {
  std::vector<cplx> transmitted;  ///< B_2
  std::vector<cplx> reflected;    ///< B_1
};

inline OutgoingAmplitudes outgoing_amplitudes(const Trajectory& traj, const FrequencyGrid& grid,
                                              double t_inf) {
  std::vector<double> frame_offsets(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    frame_offsets[k] = (grid.center - traj.frame) + grid.offsets[k];
  const auto f = fourier_integrals(traj, frame_offsets, t_inf);
  const cplx minus_i(0.0, -1.0);
  const double c2 = std::sqrt(traj.kappa_2 / two_pi);
  const double c1 = traj.drive_coeff;
  OutgoingAmplitudes out;
  out.transmitted.resize(grid.size());
  out.reflected.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double delta0 = grid.center + grid.offsets[k] - traj.pulse.omega_0;
    out.transmitted[k] = minus_i * c2 * f.output_site[k];
    out.reflected[k] =
        traj.drive_scale * spectrum_at_offset(traj.pulse, delta0) + minus_i * c1 * f.input_site[k];
  }
  return out;
}

struct Spectra {
  std::vector<double> omega;           ///< absolute frequencies [rad/us]
  std::vector<double> input;           ///< S_in = |xi|^2
  std::vector<double> transmitted_g;   ///< S_out^g, transmitted
  std::vector<double> reflected_e;     ///< S_out^e, reflected
  std::vector<double> reflected_g;
  std::vector<double> transmitted_e;
};

inline constexpr double grid_edge_fraction = 0.1;
inline constexpr double grid_edge_weight_limit = 0.05;

// Fraction of the spectral weight in the outer 10% of the grid on either side.
inline double edge_weight_fraction(const FrequencyGrid& grid, const std::vector<double>& s) {
  const double half = std::max(std::abs(grid.offsets.front()), std::abs(grid.offsets.back()));
  double total = 0.0, edge = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double v = grid.weights[k] * s[k];
    total += v;
    if (std::abs(grid.offsets[k]) >= (1.0 - grid_edge_fraction) * half) edge += v;
  }
  return total > 0.0 ? edge / total : 0.0;
}

inline void check_grid(const FrequencyGrid& grid, const std::vector<double>& s, const char* what) {
  const double frac = edge_weight_fraction(grid, s);
  if (frac > grid_edge_weight_limit)
    throw GridTooNarrow(fmt::format("{}: {:.1f}% of the spectral weight lies in the outer 10% of the grid",
                                    what, 100.0 * frac));
}

// Spectra of both branches on the standard grid. GridTooNarrow is raised for
// the spectra that enter the distortion measure.
inline Spectra outgoing_spectra(const Trajectory& traj_g, const Trajectory& traj_e,
                                const Pulse& pulse, const FrequencyGrid& grid, double t_inf) {
  (void)pulse;
  const auto amp_g = outgoing_amplitudes(traj_g, grid, t_inf);
  const auto amp_e = outgoing_amplitudes(traj_e, grid, t_inf);
  Spectra s;
  const std::size_t m = grid.size();
  s.omega.resize(m);
  s.input.resize(m);
  s.transmitted_g.resize(m);
  s.reflected_g.resize(m);
  s.transmitted_e.resize(m);
  s.reflected_e.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    s.omega[k] = grid.omega(k);
    s.input[k] = std::norm(traj_g.drive_scale) *
                 spectral_density_at_offset(traj_g.pulse, grid.center + grid.offsets[k] - traj_g.pulse.omega_0);
    s.transmitted_g[k] = std::norm(amp_g.transmitted[k]);
    s.reflected_g[k] = std::norm(amp_g.reflected[k]);
    s.transmitted_e[k] = std::norm(amp_e.transmitted[k]);
    s.reflected_e[k] = std::norm(amp_e.reflected[k]);
  }
  check_grid(grid, s.transmitted_g, "transmitted spectrum (q = g)");
  check_grid(grid, s.reflected_e, "reflected spectrum (q = e)");
  return s;
}

inline double distortion(const FrequencyGrid& grid, const std::vector<double>& out,
                         const std::vector<double>& in) {
  std::vector<double> overlap(grid.size()), self(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    overlap[k] = out[k] * in[k];
    self[k] = in[k] * in[k];
  }
  return 1.0 - grid.integrate(overlap) / grid.integrate(self);
}

// ---------------------------------------------------------------------------

struct RunOptions {
  GridSpec grid;
  double t_inf_factor = 10.0;    ///< t_inf = factor * tau_p
  bool spectra = true;           ///< compute spectra, reflection and distortion
  bool convergence_guard = true; ///< also integrate to 2 t_inf and compare C
  bool parallel_branches = true; ///< run q = g and q = e concurrently
  int full_line_points = 4001;   ///< nodes of the full-line reflection/Parseval quadrature
  bool warn_unconverged = true;  ///< log a warning when the guard trips
  IntegrationOptions integration = [] {
    IntegrationOptions o;
    o.samples = 0;
    return o;
  }();
};

inline constexpr double convergence_tolerance = 1e-4;

struct BranchResult {
  QubitState qubit = QubitState::g;
  double transmission = 0.0;      ///< T_q(t_inf)
  double reflection = 0.0;        ///< int |B_1|^2 over the real line (canonical)
  double reflection_emitted = 0.0;  ///< kappa_1 int |A_{-N}|^2, no interference
  double reflection_flux = 0.0;   ///< time-domain int |b_out|^2 to t_inf plus the late input
  double residual = 0.0;          ///< probability left in chain + qutrit at t_inf
  double parseval_transmitted = 0.0;  ///< int |B_2|^2 over the real line
  double transmission_grid = 0.0;     ///< int |B_2|^2 over the standard grid
  double transmission_late = 0.0;     ///< T_q(2 t_inf) when the guard ran
  double max_flux_residual = 0.0;     ///< worst balance defect over all steps
  double max_norm = 0.0;
  long steps = 0;
};

struct ScatteringResult {
  DeviceParams params;
  OperatingPoint op;
  Pulse pulse;
  double t_inf = 0.0;

  BranchResult g, e;
  double contrast = 0.0;
  double upsilon_g = 0.0;
  double upsilon_e = 0.0;
  double upsilon = 0.0;
  bool has_spectra = false;
  Spectra spectra;

  double contrast_late = 0.0;  ///< C at 2 t_inf
  bool converged = true;       ///< |C(2 t_inf) - C(t_inf)| < 1e-4, or guard skipped
};

namespace detail {

inline BranchResult summarize_branch(const Trajectory& traj, double t_inf, bool guard,
                                     bool with_spectra, int full_line_points) {
  BranchResult b;
  b.qubit = traj.qubit_state;
  const StepRecord* at_inf = traj.record_at(t_inf);
  if (at_inf == nullptr) at_inf = &traj.steps.back();
  b.transmission = traj.kappa_2 * at_inf->output_integral;
  b.reflection_emitted = traj.kappa_1 * at_inf->input_integral;
  b.residual = at_inf->norm;
  // the part of the input that has not arrived by t_inf leaves through port 1 untouched
  b.reflection_flux = traj.reflected_flux(*at_inf) + (std::norm(traj.drive_scale) - traj.injected(t_inf));
  if (guard) b.transmission_late = traj.kappa_2 * traj.steps.back().output_integral;
  for (const auto& r : traj.steps) {
    b.max_flux_residual = std::max(b.max_flux_residual, std::abs(traj.flux_residual(r)));
    b.max_norm = std::max(b.max_norm, r.norm);
  }
  b.steps = traj.stats.accepted;
  if (with_spectra) {
    const auto line = make_full_line_grid(traj.pulse, full_line_points);
    const auto amp = outgoing_amplitudes(traj, line, t_inf);
    std::vector<double> rt(line.size()), rr(line.size());
    for (std::size_t k = 0; k < line.size(); ++k) {
      rt[k] = std::norm(amp.transmitted[k]);
      rr[k] = std::norm(amp.reflected[k]);
    }
    b.parseval_transmitted = line.integrate(rt);
    b.reflection = line.integrate(rr);
  } else {
    b.reflection = b.reflection_flux;
  }
  return b;
}

inline Trajectory run_branch(const DeviceParams& p, const OperatingPoint& op, QubitState q,
                             const Pulse& pulse, double t_inf, const RunOptions& opts) {
  const Generator gen = assemble_generator(p, op, q);
  IntegrationOptions io = opts.integration;
  io.keep_dense = opts.spectra;
  io.checkpoints.push_back(t_inf);
  const double t_end = opts.convergence_guard ? 2.0 * t_inf : t_inf;
  return integrate(gen, pulse, t_end, io);
}

} // namespace detail

// Runs both qubit branches and assembles every observable.
inline ScatteringResult contrast_and_upsilon(const DeviceParams& p, const Pulse& pulse,
                                             const RunOptions& opts = {}) {
  validate(p);
  validate(pulse);
  ScatteringResult res;
  res.params = p;
  res.op = derive_operating_point(p);
  res.pulse = pulse;
  res.t_inf = opts.t_inf_factor * pulse.tau_p;

  const auto grid = opts.spectra ? make_grid(pulse, opts.grid) : FrequencyGrid{};
  auto branch = [&](QubitState q) {
    Trajectory traj = detail::run_branch(p, res.op, q, pulse, res.t_inf, opts);
    BranchResult b = detail::summarize_branch(traj, res.t_inf, opts.convergence_guard, opts.spectra,
                                              opts.full_line_points);
    return std::make_pair(std::move(traj), b);
  };

  std::pair<Trajectory, BranchResult> rg, re;
  if (opts.parallel_branches) {
    auto fut = std::async(std::launch::async, branch, QubitState::e);
    rg = branch(QubitState::g);
    re = fut.get();
  } else {
    rg = branch(QubitState::g);
    re = branch(QubitState::e);
  }
  res.g = rg.second;
  res.e = re.second;
  res.contrast = res.g.transmission - res.e.transmission;

  if (opts.convergence_guard) {
    res.contrast_late = res.g.transmission_late - res.e.transmission_late;
    res.converged = std::abs(res.contrast_late - res.contrast) < convergence_tolerance;
    if (!res.converged && opts.warn_unconverged)
      log::warn(fmt::format("contrast not converged at t_inf = {:.4g} us: C(t_inf) = {:.6f}, "
                            "C(2 t_inf) = {:.6f}",
                            res.t_inf, res.contrast, res.contrast_late));
  }

  if (opts.spectra) {
    res.spectra = outgoing_spectra(rg.first, re.first, pulse, grid, res.t_inf);
    res.has_spectra = true;
    res.g.transmission_grid = grid.integrate(res.spectra.transmitted_g);
    res.e.transmission_grid = grid.integrate(res.spectra.transmitted_e);
    res.upsilon_g = distortion(grid, res.spectra.transmitted_g, res.spectra.input);
    res.upsilon_e = distortion(grid, res.spectra.reflected_e, res.spectra.input);
    res.upsilon = std::max(res.upsilon_g, res.upsilon_e);
  }
  return res;
}

// ---------------------------------------------------------------------------

inline nlohmann::ordered_json params_to_json(const DeviceParams& p, const Pulse& pulse) {
  nlohmann::ordered_json j;
  j["omega_r_mhz"] = to_mhz(p.omega_r);
  j["omega_ge_mhz"] = to_mhz(p.omega_ge);
  j["g_ef_mhz"] = to_mhz(p.g_ef);
  j["g_ge_mhz"] = to_mhz(p.g_ge());
  j["j_mhz"] = to_mhz(p.J);
  j["kappa1_mhz"] = to_mhz(p.kappa_1);
  j["kappa2_mhz"] = to_mhz(p.kappa_2);
  j["n_res"] = p.n_res;
  j["gamma_res_mhz"] = to_mhz(p.gamma_res);
  j["tau_coh_us"] = p.tau_coh;
  j["omega0_mhz"] = to_mhz(pulse.omega_0);
  j["tau_p_us"] = pulse.tau_p;
  return j;
}

inline nlohmann::ordered_json to_json(const ScatteringResult& r) {
  nlohmann::ordered_json j;
  j["params"] = params_to_json(r.params, r.pulse);
  j["T_g"] = r.g.transmission;
  j["T_e"] = r.e.transmission;
  j["R_g"] = r.g.reflection;
  j["R_e"] = r.e.reflection;
  j["C"] = r.contrast;
  if (r.has_spectra) {
    j["upsilon_g"] = r.upsilon_g;
    j["upsilon_e"] = r.upsilon_e;
    j["upsilon"] = r.upsilon;
  } else {
    j["upsilon_g"] = nullptr;
    j["upsilon_e"] = nullptr;
    j["upsilon"] = nullptr;
  }
  auto& diag = j["diagnostics"];
  diag["t_inf_us"] = r.t_inf;
  diag["omega_c_mhz"] = to_mhz(r.op.omega_c);
  diag["omega_ef_mhz"] = to_mhz(r.op.omega_ef);
  diag["chi_mhz"] = to_mhz(r.op.chi);
  diag["lambda"] = r.op.lambda;
  diag["alpha_mhz"] = to_mhz(r.op.alpha);
  diag["dispersive_valid"] = r.op.dispersive_valid;
  diag["rwa_valid"] = r.op.rwa_valid;
  diag["residual_g"] = r.g.residual;
  diag["residual_e"] = r.e.residual;
  diag["unitarity_g"] = r.g.transmission + r.g.reflection + r.g.residual;
  diag["unitarity_e"] = r.e.transmission + r.e.reflection + r.e.residual;
  diag["max_flux_residual"] = std::max(r.g.max_flux_residual, r.e.max_flux_residual);
  diag["converged"] = r.converged;
  if (r.has_spectra) {
    diag["parseval_g"] = r.g.parseval_transmitted;
    diag["parseval_e"] = r.e.parseval_transmitted;
  }
  return j;
}

} // namespace photon_switch
