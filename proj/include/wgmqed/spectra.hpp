// spectra.hpp - umbrella header for transmission spectra and fitting

#pragma once

#include "wgmqed/spectra/fit.hpp"
#include "wgmqed/spectra/io.hpp"
#include "wgmqed/spectra/model.hpp"
#include "wgmqed/spectra/quadrature.hpp"
#include "wgmqed/spectra/sweep.hpp"
