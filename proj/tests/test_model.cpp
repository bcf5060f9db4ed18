#include <photon_switch/model.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace photon_switch;

namespace {

DeviceParams device(double g_ef_mhz, double j_mhz = 10.0, double kappa_mhz = 20.0) {
  DeviceParams p;
  p.omega_r = from_mhz(7000.0);
  p.omega_ge = from_mhz(7360.0);
  p.g_ef = from_mhz(g_ef_mhz);
  p.J = from_mhz(j_mhz);
  p.kappa_1 = p.kappa_2 = from_mhz(kappa_mhz);
  p.n_res = 7;
  return p;
}

struct Frozen {
  double g_ef, chi, omega_c, omega_ef, alpha, lambda;
};

// Quadratic roots evaluated independently at 30 significant digits.
constexpr Frozen frozen[] = {
    {50.0, 3.50637405277209, 7003.50637405277, 7010.51912215832, -349.480877841684, 0.0991752348036682},
    {40.0, 2.23611165368822, 7002.23611165369, 7006.70833496106, -353.291665038935, 0.0790584856906604},
    {30.0, 1.25437068280523, 7001.25437068281, 7003.76311204842, -356.236887951584, 0.0591316010622117},
};

} // namespace

TEST(OperatingPoint, MatchesHighPrecisionRoots) {
  for (const auto& f : frozen) {
    const auto op = derive_operating_point(device(f.g_ef));
    EXPECT_NEAR(to_mhz(op.chi), f.chi, 1e-10);
    EXPECT_NEAR(to_mhz(op.omega_c), f.omega_c, 1e-9);
    EXPECT_NEAR(to_mhz(op.omega_ef), f.omega_ef, 1e-9);
    EXPECT_NEAR(to_mhz(op.alpha), f.alpha, 1e-9);
    EXPECT_NEAR(op.lambda, f.lambda, 1e-13);
  }
}

TEST(OperatingPoint, ReferenceTableRounding) {
  const double omega_c[] = {7.004, 7.002, 7.001};
  const double omega_ef[] = {7.011, 7.007, 7.004};
  const double alpha[] = {-349.48, -353.29, -356.24};
  for (int i = 0; i < 3; ++i) {
    const auto op = derive_operating_point(device(frozen[i].g_ef));
    EXPECT_NEAR(to_ghz(op.omega_c), omega_c[i], 0.0005);
    EXPECT_NEAR(to_ghz(op.omega_ef), omega_ef[i], 0.0005);
    EXPECT_NEAR(to_mhz(op.alpha), alpha[i], 0.005);
  }
}

TEST(OperatingPoint, UncoupledLimit) {
  const auto p = device(0.0);
  const auto op = derive_operating_point(p);
  EXPECT_EQ(op.chi, 0.0);
  EXPECT_EQ(op.lambda, 0.0);
  EXPECT_EQ(op.omega_c, p.omega_r);
  EXPECT_EQ(op.omega_ef, p.omega_r);
}

TEST(OperatingPoint, IdentitiesHoldOnRandomDraws) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> wr(4000.0, 9000.0), det(-600.0, 600.0), frac(0.0, 0.99);
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    DeviceParams p = device(0.0);
    p.omega_r = from_mhz(wr(rng));
    const double d = det(rng);
    if (std::abs(d) < 1.0) continue;
    p.omega_ge = p.omega_r + from_mhz(d);
    // g_ef^2 < d^2 / 2 keeps a real root
    p.g_ef = from_mhz(std::abs(d) / std::numbers::sqrt2 * frac(rng));
    const auto op = derive_operating_point(p);
    EXPECT_NEAR((op.omega_c - op.chi - p.omega_r) / p.omega_r, 0.0, 1e-12);
    EXPECT_NEAR((op.omega_ef - 2.0 * op.chi - op.omega_c) / op.omega_c, 0.0, 1e-12);
    EXPECT_NEAR((op.omega_c + op.chi - op.omega_a) / op.omega_a, 0.0, 1e-12);
    const double lhs = op.chi * ((p.omega_ge - p.omega_r) - op.chi);
    const double rhs = p.g_ef * p.g_ef / 2.0;
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(rhs, 1e-300));
    EXPECT_LT(std::abs(op.lambda), 1.0);
    ++checked;
  }
  EXPECT_GT(checked, 1900);
}

TEST(OperatingPoint, QubitBelowResonatorPicksSmallRoot) {
  auto p = device(40.0);
  p.omega_ge = from_mhz(6640.0);
  const auto op = derive_operating_point(p);
  EXPECT_LT(op.chi, 0.0);
  EXPECT_NEAR(to_mhz(op.chi), -2.23611165368822, 1e-10);
}

TEST(OperatingPoint, DetuningTooSmall) {
  auto p = device(300.0);  // 2 g_ef^2 = 180000 MHz^2 > 360^2
  EXPECT_THROW(derive_operating_point(p), DetuningTooSmall);
  p = device(50.0);
  p.g_ge_override = from_mhz(181.0);  // 4 g_ge^2 > 360^2
  EXPECT_THROW(derive_operating_point(p), DetuningTooSmall);
  p.g_ge_override = from_mhz(179.0);
  EXPECT_NO_THROW(derive_operating_point(p));
}

TEST(OperatingPoint, ValidityFlags) {
  EXPECT_TRUE(derive_operating_point(device(50.0)).dispersive_valid);
  EXPECT_FALSE(derive_operating_point(device(200.0)).dispersive_valid);
  EXPECT_TRUE(derive_operating_point(device(50.0)).rwa_valid);
  auto p = device(50.0);
  p.kappa_1 = from_mhz(400.0);
  EXPECT_FALSE(derive_operating_point(p).rwa_valid);
}

TEST(DeviceParams, Validation) {
  auto p = device(30.0);
  EXPECT_NO_THROW(validate(p));
  p.n_res = 6;
  EXPECT_THROW(validate(p), InvalidParameters);
  p.n_res = 1;
  EXPECT_THROW(validate(p), InvalidParameters);
  p = device(30.0);
  p.kappa_2 = -1.0;
  EXPECT_THROW(validate(p), InvalidParameters);
  p = device(30.0);
  p.omega_ge = 0.0;
  EXPECT_THROW(validate(p), InvalidParameters);
  p = device(30.0);
  p.J = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(validate(p), InvalidParameters);
  EXPECT_DOUBLE_EQ(device(30.0).g_ge(), from_mhz(30.0) / std::numbers::sqrt2);
}

TEST(Passband, WidthModesAndSymmetry) {
  auto p = device(30.0, 10.0);
  const auto band = passband_diagnostics(p, derive_operating_point(p));
  EXPECT_NEAR(to_mhz(band.width()), 40.0, 1e-9);
  ASSERT_EQ(band.modes.size(), 7u);
  EXPECT_NEAR(band.modes.front(), p.omega_r - 2.0 * p.J * std::cos(std::numbers::pi / 8.0), 1e-9);
  for (std::size_t n = 0; n < band.mode_offsets.size(); ++n)
    EXPECT_EQ(band.mode_offsets[n] + band.mode_offsets[band.mode_offsets.size() - 1 - n], 0.0);
  EXPECT_TRUE(band.qubit_in_gap);
  EXPECT_TRUE(band.dressed_in_band);
  p.omega_ge = p.omega_r + from_mhz(15.0);
  p.g_ef = 0.0;
  EXPECT_FALSE(passband_diagnostics(p, derive_operating_point(p)).qubit_in_gap);
}

TEST(Passband, ModeCountFollowsChainLength) {
  for (int n : {3, 5, 11, 17}) {
    auto p = device(30.0);
    p.n_res = n;
    EXPECT_EQ(passband_diagnostics(p, derive_operating_point(p)).modes.size(), static_cast<std::size_t>(n));
  }
}

TEST(Loss, Estimates) {
  auto p = device(30.0, 10.0);
  p.n_res = 10;  // diagnostics accept the chain length as given
  p.gamma_res = from_mhz(0.01);
  const auto r = loss_diagnostics(p, 0.9);
  EXPECT_NEAR(r.cra_loss, 0.005, 1e-15);
  EXPECT_NEAR(r.travel_time, 0.9 + 10.0 / (2.0 * from_mhz(10.0)), 1e-15);
  EXPECT_NEAR(r.travel_time, 0.98, 0.001);
  EXPECT_TRUE(r.loss_negligible);
  EXPECT_TRUE(r.coherence_sufficient);
  p.gamma_res = 0.0;
  EXPECT_EQ(loss_diagnostics(p, 0.9).cra_loss, 0.0);
  p.tau_coh = 5.0;
  EXPECT_FALSE(loss_diagnostics(p, 0.9).coherence_sufficient);
  p.J = 0.0;
  EXPECT_THROW(loss_diagnostics(p, 0.9), InvalidParameters);
}

TEST(DeviceConfig, ReadsKeysInMegahertz) {
  const auto cfg = KeyValueConfig::parse(
      "omega_r_mhz = 7000\nomega_ge_mhz = 7360\ng_ef_mhz = 40\nj_mhz = 12\n"
      "kappa1_mhz = 28\nkappa2_mhz = 20\nn_res = 9\ngamma_res_mhz = 0.01\ntau_coh_us = 50\n");
  const auto p = device_params_from_config(cfg);
  EXPECT_DOUBLE_EQ(p.omega_r, from_mhz(7000.0));
  EXPECT_DOUBLE_EQ(p.kappa_1, from_mhz(28.0));
  EXPECT_DOUBLE_EQ(p.kappa_2, from_mhz(20.0));
  EXPECT_EQ(p.n_res, 9);
  EXPECT_DOUBLE_EQ(p.tau_coh, 50.0);
  EXPECT_FALSE(p.g_ge_override.has_value());
  EXPECT_TRUE(cfg.unused_keys().empty());
}

TEST(DeviceConfig, ErrorsAndOverrides) {
  const std::string base = "omega_r_mhz = 7000\nomega_ge_mhz = 7360\ng_ef_mhz = 40\nj_mhz = 12\nn_res = 7\n";
  EXPECT_THROW(device_params_from_config(KeyValueConfig::parse(base)), ConfigError);
  EXPECT_THROW(device_params_from_config(KeyValueConfig::parse(base + "kappa_mhz = 2\nkappa1_mhz = 3\n")),
               ConfigError);
  EXPECT_THROW(device_params_from_config(KeyValueConfig::parse(base + "kappa1_mhz = 3\n")), ConfigError);
  const auto p = device_params_from_config(KeyValueConfig::parse(base + "kappa_mhz = 28\ng_ge_mhz = 20\n"));
  EXPECT_DOUBLE_EQ(p.kappa_1, p.kappa_2);
  ASSERT_TRUE(p.g_ge_override.has_value());
  EXPECT_DOUBLE_EQ(p.g_ge(), from_mhz(20.0));
}
