#pragma once

#include "fuse/photorefractive.hpp"
#include "fuse/resonator.hpp"

namespace fuse {

/// Everything a scenario needs to know about the device.
struct Physics {
  ring::Resonator resonator;
  pr::PrModel model;
  pr::SolverOptions solver;
};

struct DeviceSpec {
  double q_loaded = 6.6e4;
  double nominal_fsr_hz = 50e9;
  double attack_resonance_m = 1548.292e-9;
  double signal_wavelength_m = 1550.68e-9;
  ring::SplitPolicy split = ring::SplitPolicy::equal_thirds();
};

/// Ring with kappa = omega_b / Q on the attacked mode and an FSR adjusted so the
/// signal wavelength lands on a resonance.
ring::Resonator make_resonator(const DeviceSpec& spec = {});

/// The characterized fuse: default resonator, PR law calibrated against the
/// built-in anchors.
Physics reference_physics();

}  // namespace fuse
