#pragma once

// Unit conventions: angular frequencies in rad/us, times in us.
// A frequency f/2pi given in MHz maps to omega = 2*pi*f rad/us, since MHz*us = 1.

#include <numbers>

namespace photon_switch {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

constexpr double from_mhz(double f_mhz) noexcept { return two_pi * f_mhz; }
constexpr double to_mhz(double omega) noexcept { return omega / two_pi; }
constexpr double from_ghz(double f_ghz) noexcept { return two_pi * 1.0e3 * f_ghz; }
constexpr double to_ghz(double omega) noexcept { return omega / (two_pi * 1.0e3); }

} // namespace photon_switch
