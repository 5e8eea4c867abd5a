// quantum.hpp - umbrella header for the atom-resonator master-equation core

#pragma once

#include "wgmqed/quantum/density.hpp"
#include "wgmqed/quantum/space.hpp"
#include "wgmqed/quantum/steady_state.hpp"
#include "wgmqed/quantum/system.hpp"
#include "wgmqed/quantum/time_evolution.hpp"
