#include <photon_switch/oracle.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace photon_switch;

namespace {

DeviceParams device(double j, double kappa, double g_ef, int n_res = 7) {
  DeviceParams p;
  p.omega_r = from_mhz(7000.0);
  p.omega_ge = from_mhz(7360.0);
  p.g_ef = from_mhz(g_ef);
  p.J = from_mhz(j);
  p.kappa_1 = p.kappa_2 = from_mhz(kappa);
  p.n_res = n_res;
  return p;
}

} // namespace

TEST(Stationary, UniformChainTransmitsAtBandCentre) {
  for (int n : {3, 5, 7, 11, 17})
    for (double kappa : {5.0, 20.0, 45.0}) {
      const auto p = device(10.0, kappa, 40.0, n);
      const auto t = stationary_transmission(p, derive_operating_point(p), QubitState::g, p.omega_r);
      EXPECT_NEAR(std::norm(t), 1.0, 1e-12) << "n_res " << n << " kappa " << kappa;
    }
}

TEST(Stationary, DipoleInducedReflection) {
  // the blocked site leaks through J^2 / (kappa (omega_ge - omega_r)), not through g_ef / J
  auto leak = [](double j, double ratio, double kappa_over_j) {
    auto p = device(j, 1.0, j * ratio);
    p.kappa_1 = p.kappa_2 = kappa_over_j * p.J;
    return std::norm(stationary_transmission(p, derive_operating_point(p), QubitState::e, p.omega_r));
  };
  for (double ratio : {3.0, 4.0, 6.0}) {
    EXPECT_LT(leak(5.0, ratio, 2.0), 1e-3) << "g_ef / J = " << ratio;
    EXPECT_LT(leak(10.0, ratio, 4.0), 1e-3) << "g_ef / J = " << ratio;
    EXPECT_NEAR(leak(10.0, ratio, 2.0) / leak(5.0, ratio, 2.0), 4.0, 0.4);
    EXPECT_NEAR(leak(10.0, ratio, 2.0) / leak(10.0, ratio, 4.0), 4.0, 0.4);
  }
  EXPECT_NEAR(leak(10.0, 6.0, 2.0) / leak(10.0, 3.0, 2.0), 1.0, 0.1);
}

TEST(Stationary, NoOutputCouplingNoTransmission) {
  auto p = device(10.0, 20.0, 30.0);
  p.kappa_2 = 0.0;
  const auto op = derive_operating_point(p);
  for (double d : {-30.0, 0.0, 12.0})
    for (auto q : {QubitState::g, QubitState::e}) {
      EXPECT_EQ(stationary_transmission(p, op, q, p.omega_r + from_mhz(d)), cplx(0.0, 0.0));
      EXPECT_EQ(chain_transmission_recursive(p, op, q, p.omega_r + from_mhz(d)), cplx(0.0, 0.0));
    }
  EXPECT_EQ(expected_transmission(p, op, QubitState::g, Pulse{p.omega_r, 0.3}), 0.0);
}

TEST(Stationary, PassiveEverywhere) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    auto p = device(5.0 + 20.0 * u(rng), 10.0, 30.0 + 40.0 * u(rng), 3 + 2 * (i % 6));
    p.kappa_1 = p.J * (0.5 + 4.5 * u(rng));
    p.kappa_2 = p.J * (0.5 + 4.5 * u(rng));
    const auto op = derive_operating_point(p);
    for (int k = 0; k <= 200; ++k) {
      const double omega = p.omega_r + p.J * (-6.0 + 12.0 * k / 200.0);
      for (auto q : {QubitState::g, QubitState::e})
        EXPECT_LE(std::norm(stationary_transmission(p, op, q, omega)), 1.0 + 1e-12);
    }
  }
}

TEST(Stationary, RecursionAgreesWithDenseSolve) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 60; ++i) {
    auto p = device(5.0 + 20.0 * u(rng), 10.0, 20.0 + 50.0 * u(rng), 3 + 2 * (i % 8));
    p.kappa_1 = p.J * (0.5 + 4.5 * u(rng));
    p.kappa_2 = p.J * (0.5 + 4.5 * u(rng));
    const auto op = derive_operating_point(p);
    for (auto q : {QubitState::g, QubitState::e}) {
      const double omega = p.omega_r + p.J * (-5.0 + 10.0 * u(rng));
      const cplx a = stationary_transmission(p, op, q, omega);
      const cplx b = chain_transmission_recursive(p, op, q, omega);
      EXPECT_LE(std::abs(a - b), 1e-10 * std::max(1.0, std::abs(a)));
    }
  }
}

TEST(Stationary, SingleResonatorLimit) {
  for (double kappa : {8.0, 25.0}) {
    auto p = device(10.0, kappa, 30.0, 1);
    p.kappa_2 = from_mhz(0.6 * kappa);
    const auto op = derive_operating_point(p);
    for (int k = -50; k <= 50; ++k) {
      const double omega = p.omega_r + from_mhz(0.8 * k);
      const cplx g = detail::stationary_transmission_unchecked(assemble_generator(p, op, QubitState::g), omega);
      const cplx e = detail::stationary_transmission_unchecked(assemble_generator(p, op, QubitState::e), omega);
      const cplx g_ref = single_cell_transmission(omega, p.omega_r, op.omega_a, p.g_ef, p.kappa_1, p.kappa_2, false);
      const cplx e_ref = single_cell_transmission(omega, p.omega_r + 2.0 * op.chi, op.omega_a, p.g_ef, p.kappa_1,
                                                  p.kappa_2, true);
      EXPECT_NEAR(std::norm(g), std::norm(g_ref), 1e-10);
      EXPECT_NEAR(std::norm(e), std::norm(e_ref), 1e-10);
    }
  }
}

TEST(SingleCell, Limits) {
  const double wc = from_mhz(7000.0), k = from_mhz(20.0), g = from_mhz(30.0);
  EXPECT_NEAR(std::norm(single_cell_transmission(wc, wc, wc, 0.0, k, k, true)), 1.0, 1e-15);
  EXPECT_NEAR(std::norm(single_cell_transmission(wc, wc, wc, g, k, k, false)), 1.0, 1e-15);
  EXPECT_EQ(single_cell_transmission(wc, wc, wc, g, k, k, true), cplx(0.0, 0.0));
  for (double d : {0.1, 1.0, 7.5, 30.0, 200.0}) {
    const double up = std::norm(single_cell_transmission(wc + d, wc, wc, g, k, k, true));
    const double down = std::norm(single_cell_transmission(wc - d, wc, wc, g, k, k, true));
    EXPECT_NEAR(up, down, 1e-14);
  }
}

TEST(Stationary, ValidityWindowAndSingularity) {
  const auto p = device(10.0, 20.0, 30.0);
  const auto op = derive_operating_point(p);
  EXPECT_THROW(stationary_transmission(p, op, QubitState::g, p.omega_r + 101.0 * p.J), InvalidParameters);
  EXPECT_NO_THROW(stationary_transmission(p, op, QubitState::g, p.omega_r + 99.0 * p.J));
  // decoupled qutrit at its own frequency is not a singularity of the chain
  EXPECT_NO_THROW(stationary_transmission(p, op, QubitState::g, op.omega_a));
  EXPECT_LT(std::abs(stationary_transmission(p, op, QubitState::e, op.omega_a)), 1e-12);

  Generator lossless;
  lossless.matrix = Eigen::MatrixXcd::Zero(2, 2);
  lossless.matrix(0, 1) = lossless.matrix(1, 0) = 1.0;
  lossless.center_index = 0;
  lossless.qutrit_index = 1;
  lossless.kappa_1 = lossless.kappa_2 = 1.0;
  EXPECT_THROW(detail::stationary_transmission_unchecked(lossless, 1.0), SingularSystem);
}

TEST(Expected, FrozenReferenceValues) {
  // Independent adaptive quadrature of the stationary solution
  struct Case { double j, kappa, g, tau, t_g, t_e; };
  const Case cases[] = {{20.0, 45.0, 50.0, 0.06, 0.9678626054, 0.0160343812},
                        {12.0, 28.0, 40.0, 0.30, 0.9889609768, 0.0040730518},
                        {10.5, 24.0, 30.0, 0.60, 0.9938008011, 0.0033665157}};
  for (const auto& c : cases) {
    const auto p = device(c.j, c.kappa, c.g);
    const auto op = derive_operating_point(p);
    const Pulse pulse{p.omega_r, c.tau};
    EXPECT_NEAR(expected_transmission(p, op, QubitState::g, pulse), c.t_g, 1e-8);
    EXPECT_NEAR(expected_transmission(p, op, QubitState::e, pulse), c.t_e, 1e-8);
  }
}

TEST(Expected, DetunedAsymmetricReference) {
  DeviceParams p = device(8.0, 20.0, 35.0, 5);
  p.omega_ge = from_mhz(7300.0);
  p.kappa_2 = from_mhz(12.0);
  const auto op = derive_operating_point(p);
  const Pulse pulse{p.omega_r + from_mhz(1.5), 0.4};
  EXPECT_NEAR(expected_transmission(p, op, QubitState::g, pulse), 0.9318716359, 1e-8);
  EXPECT_NEAR(expected_transmission(p, op, QubitState::e, pulse), 0.0014410738, 1e-8);
}

TEST(Expected, DecoupledBranchesAgree) {
  const auto p = device(12.0, 28.0, 0.0);
  const auto op = derive_operating_point(p);
  const Pulse pulse{p.omega_r + from_mhz(0.7), 0.3};
  EXPECT_EQ(expected_transmission(p, op, QubitState::g, pulse), expected_transmission(p, op, QubitState::e, pulse));
}

TEST(Expected, LongPulsesProbeOneFrequency) {
  const auto p = device(12.0, 28.0, 40.0);
  const auto op = derive_operating_point(p);
  const double omega0 = p.omega_r + from_mhz(6.0);
  for (auto q : {QubitState::g, QubitState::e}) {
    const double point = std::norm(stationary_transmission(p, op, q, omega0));
    EXPECT_NEAR(expected_transmission(p, op, q, Pulse{omega0, 200.0}), point, 1e-3);
  }
}

TEST(Expected, StandardGridMissesTheTail) {
  const auto p = device(12.0, 28.0, 40.0);
  const auto op = derive_operating_point(p);
  const Pulse pulse{p.omega_r, 0.3};
  const double full = expected_transmission(p, op, QubitState::g, pulse);
  const double grid = expected_transmission(p, op, QubitState::g, pulse, SpectralQuadrature::standard_grid);
  EXPECT_LT(grid, full);
  EXPECT_LT(full - grid, 0.01);
}
