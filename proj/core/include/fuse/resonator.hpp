#pragma once

// Steady-state add-drop micro-ring: single-pole coupled-mode lineshapes at the
// drop and through ports, and the comb of resonances they repeat on.

#include <array>
#include <span>
#include <vector>

#include "fuse/units.hpp"

namespace fuse::ring {

/// Decay rates of one resonance family, all in rad/s.
struct CouplingRates {
  double intrinsic = 0.0;  // kappa0
  double upper = 0.0;      // kappa1, input/through bus
  double lower = 0.0;      // kappa2, drop bus

  /// Validating constructor; throws DomainError on a negative rate or zero total.
  static CouplingRates make(double intrinsic, double upper, double lower);

  double total() const { return intrinsic + upper + lower; }
  double loaded_q(double omega0) const { return omega0 / total(); }
};

/// How the total loaded decay rate is shared out between kappa0, kappa1, kappa2.
struct SplitPolicy {
  std::array<double, 3> fractions{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};

  static SplitPolicy equal_thirds() { return {}; }
  /// Fractions in (intrinsic, upper, lower) order; throws ValidationError unless
  /// non-negative and summing to 1 within 1e-9.
  static SplitPolicy custom(double intrinsic, double upper, double lower);
};

CouplingRates rates_from_q(double q_loaded, double omega0,
                           const SplitPolicy& split = SplitPolicy::equal_thirds());

/// Signed offset mode - input + pr_shift (rad/s). A positive PR shift is a blue
/// shift of the resonance.
struct Detuning {
  double value = 0.0;
};

constexpr Detuning detuning(double mode_omega, double input_omega, double pr_shift) {
  return Detuning{mode_omega - input_omega + pr_shift};
}

/// |sqrt(k1 k2) / (i D + k/2)|^2.
double drop_transmission(Detuning d, const CouplingRates& rates);
/// |1 - k1 / (i D + k/2)|^2.
double through_transmission(Detuning d, const CouplingRates& rates);
/// Drop-port peak, 4 k1 k2 / k^2.
double peak_drop_transmission(const CouplingRates& rates);

/// Resonance comb. Mode m sits at base_resonance + m * fsr; mode 0 is the one
/// attacked (mode b), mode `signal_mode_offset` carries the quantum signal (mode a).
struct ResonatorGeometry {
  double base_resonance_hz = 0.0;
  double fsr_hz = 0.0;
  int signal_mode_offset = 0;

  static ResonatorGeometry make(double base_resonance_hz, double fsr_hz, int signal_mode_offset);

  /// Places mode 0 on `attack_resonance_hz` and picks the FSR closest to
  /// `nominal_fsr_hz` that lands an integer mode exactly on `signal_hz`.
  static ResonatorGeometry aligned(double attack_resonance_hz, double signal_hz,
                                   double nominal_fsr_hz);

  double resonance_hz(int mode) const { return base_resonance_hz + mode * fsr_hz; }
  double signal_resonance_hz() const { return resonance_hz(signal_mode_offset); }

  /// Index of the resonance nearest to `frequency_hz` once every resonance has
  /// been blue-shifted by `shift_hz`.
  int nearest_mode(double frequency_hz, double shift_hz = 0.0) const;
};

/// A single ring: one resonance family on one comb.
struct Resonator {
  CouplingRates rates;
  ResonatorGeometry geometry;

  /// Detuning of light at `frequency_hz` from the nearest (shifted) resonance.
  Detuning nearest_detuning(double frequency_hz, double pr_shift) const;
  double kappa_hz() const { return rad_s_to_hz(rates.total()); }
};

struct SpectrumPoint {
  double frequency_hz;
  double drop;
  double through;
};

/// Pointwise port transmissions over `grid_hz`, every resonance shifted by
/// `pr_shift` (rad/s). Throws ValidationError on an empty grid.
std::vector<SpectrumPoint> spectrum(std::span<const double> grid_hz, const Resonator& resonator,
                                    double pr_shift);

}  // namespace fuse::ring
