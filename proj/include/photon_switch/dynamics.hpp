#pragma once

// Single-excitation dynamics of the chain + qutrit in a frame rotating at omega_r.
//
// Amplitude vector psi = (A_{-N}, ..., A_0, ..., A_N, S_ef); with the drive
// entering the first site,
//
//   i d psi / dt = M_q psi + f_1 Xi~(t) e_{-N},     f_1 = sqrt(kappa_1 / 2pi),
//
// where Xi~ is the input drive in the rotating frame. M_q is tridiagonal on the
// chain (hopping J), carries -i kappa_1/2 and -i kappa_2/2 on the terminal
// sites, (omega_c + (2 eta_q - 1) chi) - omega_r on the central site and
// omega_a - omega_r on the qutrit. The central site couples to S_ef with g_ef
// scaled by eta_q = |<e|q>|^2: for q = g the qutrit row is inert.

#include <photon_switch/detail/dopri5.hpp>
#include <photon_switch/errors.hpp>
#include <photon_switch/model.hpp>
#include <photon_switch/pulse.hpp>

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <span>
#include <stop_token>
#include <string>
#include <vector>

namespace photon_switch {

struct Generator {
  Eigen::MatrixXcd matrix;   ///< rotating-frame generator, dimension n_res + 1
  int drive_index = 0;       ///< A_{-N}
  int output_index = 0;      ///< A_N
  int center_index = 0;      ///< A_0
  int qutrit_index = 0;      ///< S_ef
  double drive_coeff = 0.0;  ///< f_1 = sqrt(kappa_1 / 2pi)
  double kappa_1 = 0.0;
  double kappa_2 = 0.0;
  double frame = 0.0;        ///< absolute frame frequency [rad/us]
  QubitState qubit_state = QubitState::g;

  int dim() const noexcept { return static_cast<int>(matrix.rows()); }
  int chain_length() const noexcept { return dim() - 1; }

  // Same physics viewed from a frame rotating at `omega_frame`.
  Generator in_frame(double omega_frame) const {
    Generator out = *this;
    const double shift = omega_frame - frame;
    for (int i = 0; i < dim(); ++i) out.matrix(i, i) -= shift;
    out.frame = omega_frame;
    return out;
  }

  // y = M x, exploiting the chain + one-coupling structure.
  void apply(std::span<const cplx> x, std::span<cplx> y) const noexcept {
    const int n = chain_length();
    const cplx* m = matrix.data();
    const auto ld = static_cast<std::ptrdiff_t>(dim());
    auto at = [&](int r, int c) { return m[c * ld + r]; };
    for (int i = 0; i < n; ++i) {
      cplx acc = at(i, i) * x[static_cast<std::size_t>(i)];
      if (i > 0) acc += at(i, i - 1) * x[static_cast<std::size_t>(i - 1)];
      if (i + 1 < n) acc += at(i, i + 1) * x[static_cast<std::size_t>(i + 1)];
      y[static_cast<std::size_t>(i)] = acc;
    }
    const auto c = static_cast<std::size_t>(center_index);
    const auto q = static_cast<std::size_t>(qutrit_index);
    y[c] += at(center_index, qutrit_index) * x[q];
    y[q] = at(qutrit_index, qutrit_index) * x[q] + at(qutrit_index, center_index) * x[c];
  }
};

// Odd chains of length 1 are accepted here (the bare single-cell switch);
// the full device requires n_res >= 3 through validate().
inline Generator assemble_generator(const DeviceParams& p, const OperatingPoint& op, QubitState q) {
  if (p.n_res < 1 || p.n_res % 2 == 0)
    throw InvalidParameters(fmt::format("chain length must be odd, got {}", p.n_res));
  const int n = p.n_res;
  const double eta = excitation(q);
  Generator gen;
  gen.matrix = Eigen::MatrixXcd::Zero(n + 1, n + 1);
  gen.drive_index = 0;
  gen.output_index = n - 1;
  gen.center_index = n / 2;
  gen.qutrit_index = n;
  gen.drive_coeff = std::sqrt(p.kappa_1 / two_pi);
  gen.kappa_1 = p.kappa_1;
  gen.kappa_2 = p.kappa_2;
  gen.frame = p.omega_r;
  gen.qubit_state = q;

  for (int i = 0; i + 1 < n; ++i) {
    gen.matrix(i, i + 1) = p.J;
    gen.matrix(i + 1, i) = p.J;
  }
  // omega_c - omega_r == chi by construction; writing it through chi keeps the
  // q = g central entry exactly zero.
  gen.matrix(gen.center_index, gen.center_index) += op.chi + (2.0 * eta - 1.0) * op.chi;
  gen.matrix(gen.drive_index, gen.drive_index) += cplx(0.0, -0.5 * p.kappa_1);
  gen.matrix(gen.output_index, gen.output_index) += cplx(0.0, -0.5 * p.kappa_2);
  gen.matrix(gen.qutrit_index, gen.qutrit_index) = 2.0 * op.chi;  // omega_a - omega_r
  gen.matrix(gen.center_index, gen.qutrit_index) = eta * p.g_ef;
  gen.matrix(gen.qutrit_index, gen.center_index) = eta * p.g_ef;
  return gen;
}

struct IntegrationOptions {
  double rtol = 1e-9;
  double atol = 1e-12;  ///< for a unit input photon; scaled by |drive_scale|
  int samples = 2000;   ///< uniformly spaced display samples over [0, t_end]
  bool keep_dense = true;        ///< store the continuous extension of every step
  std::vector<double> checkpoints;  ///< times the step grid must hit exactly
  cplx drive_scale{1.0, 0.0};       ///< complex amplitude multiplying the input
  std::stop_token stop;
};

// Running integrals carried with the amplitudes on the adaptive grid.
struct StepRecord {
  double t = 0.0;
  double norm = 0.0;           ///< sum_n |A_n|^2 + |S_ef|^2
  double output_integral = 0.0; ///< int |A_N|^2
  double input_integral = 0.0;  ///< int |A_{-N}|^2
  cplx drive_overlap{};         ///< int Xi~ conj(A_{-N}), drive scale included
};

struct Trajectory {
  QubitState qubit_state = QubitState::g;
  int drive_index = 0;
  int output_index = 0;
  int qutrit_index = 0;
  double frame = 0.0;
  double kappa_1 = 0.0;
  double kappa_2 = 0.0;
  double drive_coeff = 0.0;
  Pulse pulse;
  cplx drive_scale{1.0, 0.0};
  double t_end = 0.0;
  double rate = 0.0;  ///< bound on the frequencies present in the amplitudes [rad/us]

  std::vector<double> times;                 ///< display sample instants
  std::vector<Eigen::VectorXcd> amplitudes;  ///< display samples, frame at `frame`
  std::vector<StepRecord> steps;             ///< adaptive grid, starts at t = 0
  std::vector<detail::DenseStep> segments;   ///< empty unless keep_dense
  detail::Dopri5Stats stats;

  int dim() const noexcept { return qutrit_index + 1; }

  // Probability fed in through the input port by time t: |c|^2 (1 - e^{-t/tau_p}).
  double injected(double t) const { return std::norm(drive_scale) * injected_probability(pulse, t); }

  // N + kappa_2 int|A_N|^2 + kappa_1 int|A_{-N}|^2 - 2 f_1 Im int Xi~ conj(A_{-N}).
  // Zero for exact dynamics: probability in the chain plus what left through
  // both ports equals what was drawn from the input port.
  double balance_defect(const StepRecord& r) const {
    return r.norm + kappa_2 * r.output_integral + kappa_1 * r.input_integral -
           2.0 * drive_coeff * r.drive_overlap.imag();
  }

  // Probability that has propagated back out of the input port,
  // int |b_in - i sqrt(kappa_1) A_{-N}|^2, including the free input.
  double reflected_flux(const StepRecord& r) const {
    return injected(r.t) + kappa_1 * r.input_integral - 2.0 * drive_coeff * r.drive_overlap.imag();
  }

  // chain + transmitted + reflected - injected; zero for exact dynamics.
  double flux_residual(const StepRecord& r) const {
    return r.norm + kappa_2 * r.output_integral + reflected_flux(r) - injected(r.t);
  }

  // Record at exactly time t (a checkpoint or the end), if one exists.
  const StepRecord* record_at(double t) const {
    auto it = std::lower_bound(steps.begin(), steps.end(), t,
                               [](const StepRecord& r, double v) { return r.t < v; });
    if (it != steps.end() && it->t == t) return &*it;
    return nullptr;
  }

  // Record at time t: exact when t is on the step grid, otherwise from the
  // continuous extension (requires keep_dense).
  StepRecord record_interpolated(double t) const {
    if (const auto* r = record_at(t)) return *r;
    if (t <= 0.0) return steps.front();
    if (t >= t_end) return steps.back();
    if (segments.empty())
      throw InvalidParameters("trajectory has no dense output; request t on the step grid");
    const auto& seg = segment_for(t);
    StepRecord r;
    r.t = t;
    const auto n = static_cast<std::size_t>(dim());
    for (std::size_t i = 0; i < n; ++i) r.norm += std::norm(seg.eval(i, t));
    r.output_integral = seg.eval(n, t).real();
    r.input_integral = seg.eval(n + 1, t).real();
    r.drive_overlap = seg.eval(n + 2, t);
    return r;
  }

  const detail::DenseStep& segment_for(double t) const {
    auto it = std::upper_bound(segments.begin(), segments.end(), t,
                               [](double v, const detail::DenseStep& s) { return v < s.t0; });
    if (it != segments.begin()) --it;
    return *it;
  }

  // Amplitudes at any t in [0, t_end] from the continuous extension.
  Eigen::VectorXcd state_at(double t) const {
    if (segments.empty()) throw InvalidParameters("trajectory has no dense output");
    Eigen::VectorXcd out(dim());
    if (t <= 0.0) return Eigen::VectorXcd::Zero(dim());
    const auto& seg = segment_for(std::min(t, t_end));
    for (int i = 0; i < dim(); ++i) out(i) = seg.eval(static_cast<std::size_t>(i), t);
    return out;
  }

  // Debug export: t, Re/Im of every amplitude at the display samples.
  void write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw SwitchError(fmt::format("cannot write '{}'", path));
    out << "t";
    for (int i = 0; i < dim(); ++i) {
      const std::string name = i == qutrit_index ? "S" : fmt::format("A{}", i - (qutrit_index - 1) / 2);
      out << ",re_" << name << ",im_" << name;
    }
    out << '\n';
    for (std::size_t k = 0; k < times.size(); ++k) {
      out << fmt::format("{:.12g}", times[k]);
      for (int i = 0; i < dim(); ++i)
        out << fmt::format(",{:.12g},{:.12g}", amplitudes[k](i).real(), amplitudes[k](i).imag());
      out << '\n';
    }
  }
};

// Integrates from the photon-free state at t = 0 to t_end. The state carries
// three running integrals (see StepRecord) so observables come from the
// adaptive grid rather than from the display samples.
inline Trajectory integrate(const Generator& gen, const Pulse& pulse, double t_end,
                            const IntegrationOptions& opts = {}) {
  validate(pulse);
  if (!(t_end > 0.0) || !std::isfinite(t_end))
    throw InvalidParameters(fmt::format("t_end must be positive, got {}", t_end));
  if (opts.samples < 0) throw InvalidParameters("sample count must be non-negative");

  const auto n = static_cast<std::size_t>(gen.dim());
  const auto d = static_cast<std::size_t>(gen.drive_index);
  const auto o = static_cast<std::size_t>(gen.output_index);
  const cplx scale = opts.drive_scale;
  const double f1 = gen.drive_coeff;
  const double frame = gen.frame;

  auto rhs = [&](double t, std::span<const cplx> y, std::span<cplx> dy) {
    gen.apply(y.first(n), dy.first(n));
    const cplx xi = scale * drive_in_frame(pulse, t, frame);
    dy[d] += f1 * xi;
    for (std::size_t i = 0; i < n; ++i) dy[i] = cplx(dy[i].imag(), -dy[i].real());  // * -i
    dy[n] = std::norm(y[o]);
    dy[n + 1] = std::norm(y[d]);
    dy[n + 2] = xi * std::conj(y[d]);
  };

  Trajectory traj;
  traj.qubit_state = gen.qubit_state;
  traj.drive_index = gen.drive_index;
  traj.output_index = gen.output_index;
  traj.qutrit_index = gen.qutrit_index;
  traj.frame = frame;
  traj.kappa_1 = gen.kappa_1;
  traj.kappa_2 = gen.kappa_2;
  traj.drive_coeff = f1;
  traj.pulse = pulse;
  traj.drive_scale = scale;
  traj.t_end = t_end;
  traj.rate = std::max(gen.matrix.cwiseAbs().rowwise().sum().maxCoeff(),
                       std::abs(pulse.omega_0 - frame));
  traj.steps.push_back(StepRecord{});

  const auto samples = static_cast<std::size_t>(opts.samples);
  traj.times.reserve(samples);
  traj.amplitudes.reserve(samples);
  std::size_t next_sample = 0;
  auto sample_time = [&](std::size_t k) {
    return samples == 1 ? t_end : t_end * static_cast<double>(k) / static_cast<double>(samples - 1);
  };
  while (next_sample < samples && sample_time(next_sample) <= 0.0) {
    traj.times.push_back(0.0);
    traj.amplitudes.push_back(Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n)));
    ++next_sample;
  }

  auto observer = [&](const detail::DenseStep& step, std::span<const cplx> y) {
    const double t1 = step.t0 + step.h;
    StepRecord r;
    r.t = t1;
    for (std::size_t i = 0; i < n; ++i) r.norm += std::norm(y[i]);
    r.output_integral = y[n].real();
    r.input_integral = y[n + 1].real();
    r.drive_overlap = y[n + 2];
    traj.steps.push_back(r);
    while (next_sample < samples && sample_time(next_sample) <= t1) {
      const double ts = sample_time(next_sample);
      Eigen::VectorXcd a(static_cast<Eigen::Index>(n));
      if (ts == t1) {
        for (std::size_t i = 0; i < n; ++i) a(static_cast<Eigen::Index>(i)) = y[i];
      } else {
        for (std::size_t i = 0; i < n; ++i) a(static_cast<Eigen::Index>(i)) = step.eval(i, ts);
      }
      traj.times.push_back(ts);
      traj.amplitudes.push_back(std::move(a));
      ++next_sample;
    }
    if (opts.keep_dense) traj.segments.push_back(step);
  };

  detail::Dopri5Options dopt;
  dopt.rtol = opts.rtol;
  dopt.atol = opts.atol * std::max(std::abs(scale), 1e-300);
  std::vector<cplx> y(n + 3, cplx{});
  traj.stats = detail::dopri5(rhs, 0.0, y, t_end, opts.checkpoints, observer, dopt, opts.stop);
  return traj;
}

} // namespace photon_switch
