#pragma once

#include <string>

#include "fragsense/types.hpp"

namespace fragsense::telemetry {

// Zero-phase (forward-backward) 4th-order Butterworth high-pass.
// Transient edges are padded by reflection before filtering.
Channel highpass(const Channel& ch, double cutoff_hz);

// Companion low-pass used by the antialiasing path of resample().
Channel lowpass(const Channel& ch, double cutoff_hz);

// Central differences, one-sided at the endpoints. Units become input/s.
Channel derivative(const Channel& ch);

// F = 2 (A_base P_base - A_rod P_rod), pressures in bar on the wire,
// converted to Pa here. Output in newtons.
Channel lift_force(const Channel& p_base, const Channel& p_rod,
                   const CylinderGeometry& geom = {});

// Rate conversion: linear interpolation upward, antialiased downward.
Channel resample(const Channel& ch, double target_hz);

}  // namespace fragsense::telemetry
