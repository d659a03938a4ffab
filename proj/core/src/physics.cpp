#include "fuse/physics.hpp"

#include "fuse/units.hpp"

namespace fuse {

ring::Resonator make_resonator(const DeviceSpec& spec) {
  const double nu_b = wavelength_to_frequency(spec.attack_resonance_m);
  const double nu_sig = wavelength_to_frequency(spec.signal_wavelength_m);
  ring::Resonator r;
  r.geometry = ring::ResonatorGeometry::aligned(nu_b, nu_sig, spec.nominal_fsr_hz);
  r.rates = ring::rates_from_q(spec.q_loaded, hz_to_rad_s(nu_b), spec.split);
  return r;
}

Physics reference_physics() {
  Physics p;
  p.resonator = make_resonator();
  const auto anchors = pr::default_anchors();
  p.model = pr::calibrate(anchors, p.resonator).model;
  return p;
}

}  // namespace fuse
