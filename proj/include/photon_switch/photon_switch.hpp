#pragma once

#include <photon_switch/config.hpp>
#include <photon_switch/dynamics.hpp>
#include <photon_switch/errors.hpp>
#include <photon_switch/log.hpp>
#include <photon_switch/model.hpp>
#include <photon_switch/observables.hpp>
#include <photon_switch/oracle.hpp>
#include <photon_switch/pulse.hpp>
#include <photon_switch/sweep.hpp>
#include <photon_switch/units.hpp>
#include <photon_switch/version.hpp>
