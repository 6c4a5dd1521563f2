#pragma once

// Umbrella header: stationary double-barrier scattering, the
// multiple-reflection expansion of the transmitted wave, stationary-phase
// exit times, wave-packet synthesis, and the scenario front end.

#include "twinbarrier/errors.hpp"
#include "twinbarrier/experiments.hpp"
#include "twinbarrier/kinematics.hpp"
#include "twinbarrier/modulation.hpp"
#include "twinbarrier/peaks.hpp"
#include "twinbarrier/quadrature.hpp"
#include "twinbarrier/report_io.hpp"
#include "twinbarrier/scattering.hpp"
#include "twinbarrier/scenario.hpp"
#include "twinbarrier/series.hpp"
#include "twinbarrier/transfer_matrix.hpp"
#include "twinbarrier/version.hpp"
#include "twinbarrier/wavepacket.hpp"
