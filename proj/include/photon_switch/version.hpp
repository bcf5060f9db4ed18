#pragma once

#include <string_view>

namespace photon_switch {

inline constexpr std::string_view version = "1.0.0";

} // namespace photon_switch
