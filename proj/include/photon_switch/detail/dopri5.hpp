#pragma once

// Dormand-Prince 5(4) with FSAL, PI step control and the 4th-order continuous
// extension of Hairer, Norsett & Wanner (DOPRI5, "contd5"). State is a flat
// vector of complex numbers; the right-hand side writes dy/dt in place.

#include <photon_switch/errors.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <stop_token>
#include <vector>

namespace photon_switch::detail {

using cplx = std::complex<double>;

struct Dopri5Options {
  double rtol = 1e-9;
  double atol = 1e-12;
  double initial_step = 0.0;  ///< 0 selects a step automatically
  double max_step = 0.0;      ///< 0 means unbounded
  long max_steps = 50'000'000;
  // Error-norm weight only covers the first `controlled` components when > 0.
  std::size_t controlled = 0;
};

// Continuous extension over one accepted step [t0, t0 + h].
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  std::array<std::vector<cplx>, 5> coeff;

  std::size_t dim() const noexcept { return coeff[0].size(); }

  // Component i at time t in [t0, t0 + h].
  cplx eval(std::size_t i, double t) const noexcept {
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    return coeff[0][i] +
           s * (coeff[1][i] + s1 * (coeff[2][i] + s * (coeff[3][i] + s1 * coeff[4][i])));
  }

  void eval(double t, std::span<cplx> out) const noexcept {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = eval(i, t);
  }
};

struct Dopri5Stats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
};

// Integrates y from t0 to t_end. Every time in `checkpoints` inside (t0, t_end)
// is hit exactly by a step boundary. `observer(const DenseStep&, std::span<const cplx> y1)`
// is called after each accepted step.
template <class Rhs, class Observer>
Dopri5Stats dopri5(Rhs&& rhs, double t0, std::vector<cplx>& y, double t_end,
                   std::span<const double> checkpoints, Observer&& observer,
                   const Dopri5Options& opt, std::stop_token stop = {}) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                   a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                   d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                   d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

  const std::size_t n = y.size();
  const std::size_t nctl = opt.controlled > 0 ? std::min(opt.controlled, n) : n;
  std::vector<cplx> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
  DenseStep dense;
  for (auto& c : dense.coeff) c.resize(n);
  Dopri5Stats stats;

  std::vector<double> stops;
  for (double c : checkpoints)
    if (c > t0 && c < t_end) stops.push_back(c);
  std::sort(stops.begin(), stops.end());
  stops.push_back(t_end);
  std::size_t next_stop = 0;

  double t = t0;
  rhs(t, std::span<const cplx>(y), std::span<cplx>(k1));
  ++stats.evaluations;

  auto weight = [&](std::size_t i, const std::vector<cplx>& a, const std::vector<cplx>& b) {
    return opt.atol + opt.rtol * std::max(std::abs(a[i]), std::abs(b[i]));
  };

  double h = opt.initial_step;
  if (h <= 0.0) {
    // Hairer's starting-step heuristic
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < nctl; ++i) {
      const double sk = opt.atol + opt.rtol * std::abs(y[i]);
      dnf += std::norm(k1[i]) / (sk * sk);
      dny += std::norm(y[i]) / (sk * sk);
    }
    h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
    h = std::min(h, t_end - t0);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * k1[i];
    rhs(t + h, std::span<const cplx>(ytmp), std::span<cplx>(k2));
    ++stats.evaluations;
    double der2 = 0.0;
    for (std::size_t i = 0; i < nctl; ++i) {
      const double sk = opt.atol + opt.rtol * std::abs(y[i]);
      der2 += std::norm(k2[i] - k1[i]) / (sk * sk);
    }
    der2 = std::sqrt(der2 / static_cast<double>(nctl)) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf / static_cast<double>(nctl)));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
    h = std::min(100.0 * h, h1);
  }
  if (opt.max_step > 0.0) h = std::min(h, opt.max_step);

  constexpr double safety = 0.9, fac_min = 0.2, fac_max = 10.0, beta = 0.04;
  constexpr double expo = 0.2 - beta * 0.75;
  double err_old = 1e-4;
  bool last_rejected = false;

  while (t < t_end) {
    if (stop.stop_requested()) throw Cancelled();
    if (stats.accepted + stats.rejected >= opt.max_steps)
      throw NonConvergence(fmt::format("step budget exhausted at t = {:.9g}", t), t);

    const double target = stops[next_stop];
    const double h_natural = h;
    bool hits_stop = false;
    if (t + h >= target || t + 1.01 * h >= target) {
      h = target - t;
      hits_stop = true;
    }
    if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
      throw NonConvergence(fmt::format("step size underflow at t = {:.9g}", t), t);

    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    rhs(t + c2 * h, std::span<const cplx>(ytmp), std::span<cplx>(k2));
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * h, std::span<const cplx>(ytmp), std::span<cplx>(k3));
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * h, std::span<const cplx>(ytmp), std::span<cplx>(k4));
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * h, std::span<const cplx>(ytmp), std::span<cplx>(k5));
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const double t_new = hits_stop ? target : t + h;
    rhs(t_new, std::span<const cplx>(ytmp), std::span<cplx>(k6));
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    rhs(t_new, std::span<const cplx>(ynew), std::span<cplx>(k7));
    stats.evaluations += 6;

    double e2 = 0.0;
    for (std::size_t i = 0; i < nctl; ++i) {
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sk = weight(i, y, ynew);
      e2 += std::norm(err[i]) / (sk * sk);
    }
    const double err_norm = std::sqrt(e2 / static_cast<double>(nctl));
    if (!std::isfinite(err_norm))
      throw NonConvergence(fmt::format("non-finite state at t = {:.9g}", t), t);

    if (err_norm <= 1.0) {
      // accepted
      for (std::size_t i = 0; i < n; ++i) {
        const cplx dy = ynew[i] - y[i];
        const cplx bspl = h * k1[i] - dy;
        dense.coeff[0][i] = y[i];
        dense.coeff[1][i] = dy;
        dense.coeff[2][i] = bspl;
        dense.coeff[3][i] = dy - h * k7[i] - bspl;
        dense.coeff[4][i] =
            h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      dense.t0 = t;
      dense.h = h;
      y.swap(ynew);
      k1.swap(k7);
      t = t_new;
      ++stats.accepted;
      if (hits_stop) ++next_stop;
      observer(static_cast<const DenseStep&>(dense), std::span<const cplx>(y));

      const double e = std::max(err_norm, 1e-10);
      double fac = safety * std::pow(e, -expo) * std::pow(err_old, beta);
      fac = std::clamp(fac, fac_min, fac_max);
      if (last_rejected) fac = std::min(fac, 1.0);
      err_old = e;
      last_rejected = false;
      // a step shortened to land on a stop says nothing about the next size
      h = hits_stop ? std::max(h * fac, h_natural) : h * fac;
    } else {
      ++stats.rejected;
      last_rejected = true;
      h *= std::max(fac_min, safety * std::pow(err_norm, -0.2));
    }
    if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
  }
  return stats;
}

} // namespace photon_switch::detail
