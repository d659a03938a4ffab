#pragma once

// Photorefractive resonance shift. The space-charge field is not modelled; its
// electro-optic effect is lumped into one blue shift (rad/s) that relaxes toward
// a saturable function of the power circulating in the attacked mode. Because the
// circulating power itself depends on the detuning the shift creates, steady
// states are self-consistent fixed points.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fuse/resonator.hpp"

namespace fuse::pr {

struct PrModel {
  double max_shift = 0.0;        // rad/s, saturated shift
  double reference_power = 1.0;  // W of circulating power at half saturation (gamma = 1)
  double exponent = 1.0;         // saturation exponent gamma
  double rise_time = 1.0;        // s, buildup time constant
  double fall_time = 1.0;        // s, relaxation time constant

  static PrModel make(double max_shift, double reference_power, double exponent,
                      double rise_time, double fall_time);
};

struct PrState {
  double shift = 0.0;  // rad/s, in [0, max_shift]
  double time = 0.0;   // s
};

/// Attack light driving the ring: on-chip power and optical frequency.
struct Drive {
  double power_w = 0.0;
  double frequency_hz = 0.0;
};

/// delta_max * x / (1 + x), x = (p / p_ref)^gamma. DomainError on negative power.
double target_shift(double circulating_power_w, const PrModel& model);

/// Power-equivalent intracavity buildup: p_in * k1 k / (D^2 + (k/2)^2), which is
/// 4 k1/k * p_in on resonance. The energy-to-power scale is absorbed by p_ref.
double circulating_power(double input_power_w, ring::Detuning attack_detuning,
                         const ring::CouplingRates& rates);

/// Shift the drive would settle to if the current shift were frozen.
double drive_target(double shift, const Drive& drive, const PrModel& model,
                    const ring::Resonator& resonator);

/// One explicit Euler step of d(delta)/dt = (target - delta) / tau, with tau the
/// rise time while building up and the fall time while relaxing. Throws
/// ValidationError when dt exceeds a tenth of the active tau.
PrState step(const PrState& state, const Drive& drive, double dt, const PrModel& model,
             const ring::Resonator& resonator);

struct SolverOptions {
  double dt = 0.01;                  // s
  long max_steps = 10'000'000;
  double fixed_point_tolerance = 1e-6;  // relative on delta
  double settle_rate = 1e-6;            // |d delta/dt| < settle_rate * max_shift per second
};

/// Forward integration from the cold cavity until the shift stops moving. On a
/// bistable drive this selects the branch reached by switching the attack on.
/// Throws ConvergenceError (with the oscillation bracket) after max_steps.
PrState steady_state(const Drive& drive, const PrModel& model, const ring::Resonator& resonator,
                     const SolverOptions& options = {});

/// Damped fixed-point iteration delta <- (1-a) delta + a target(delta) from delta = 0.
/// Independent of the time-stepper; nullopt when it does not settle.
std::optional<double> fixed_point_shift(const Drive& drive, const PrModel& model,
                                        const ring::Resonator& resonator, double damping = 0.5,
                                        int max_iterations = 200'000, double tolerance = 1e-12);

/// Blue shift in rad/s <-> wavelength shift in pm at the attacked resonance.
double shift_to_pm(double shift, const ring::Resonator& resonator);
double pm_to_shift(double pm, const ring::Resonator& resonator);

/// Drop-port attenuation (dB) of a narrow-line signal sitting on its cold resonance.
double cw_attenuation_db(double shift, const ring::Resonator& resonator);
/// Inverse of cw_attenuation_db.
double shift_from_cw_attenuation(double attenuation_db, const ring::Resonator& resonator);

// --- calibration ---------------------------------------------------------------

enum class AnchorKind { shift_pm, atten_db_cw };

/// One observation under a resonant attack.
struct CalibrationAnchor {
  double on_chip_power_w = 0.0;
  AnchorKind kind = AnchorKind::shift_pm;
  double value = 0.0;  // pm or dB depending on kind
};

/// The shift (rad/s) an anchor implies.
double anchor_shift(const CalibrationAnchor& anchor, const ring::Resonator& resonator);

/// How the rise/fall constants are pinned to measured 90 % response/recovery times.
enum class TimingRule {
  /// tau chosen so the simulated CW attenuation (dB) of the reference drive
  /// crosses 90 % of its steady value at the response time and falls back to
  /// 10 % at the recovery time.
  attenuation_crossing,
  /// tau = t / ln 10: the bare shift would settle to 90 % at t with no feedback.
  shift_exponential,
};

struct TimingTargets {
  double response_time = 2.0;        // s
  double recovery_time = 2.5;        // s
  double reference_power_w = 1e-3;   // resonant drive used for attenuation_crossing
  TimingRule rule = TimingRule::attenuation_crossing;
};

struct CalibrationOptions {
  /// Fix gamma instead of fitting it. With exactly two distinct anchor powers
  /// gamma is held at `initial_exponent` regardless.
  std::optional<double> fixed_exponent;
  double initial_exponent = 1.0;
  TimingTargets timing;
  double residual_warning = 0.05;  // relative shift misfit that raises the quality flag
};

struct CalibrationResult {
  PrModel model;
  std::vector<double> residuals;  // (steady_state shift - anchor shift) / anchor shift
  bool quality_warning = false;
  std::string message;
};

/// Least-squares fit of (delta_max, p_ref, gamma) in log space to resonant anchors,
/// then time constants from `options.timing`. Throws ValidationError with fewer
/// than two distinct anchor powers.
CalibrationResult calibrate(std::span<const CalibrationAnchor> anchors,
                            const ring::Resonator& resonator, const CalibrationOptions& options = {});

/// CSV with the exact header `power_dbm,kind,value`; kind is shift_pm or atten_db_cw.
std::vector<CalibrationAnchor> parse_anchors_csv(std::istream& in);
std::vector<CalibrationAnchor> load_anchors_csv(const std::filesystem::path& path);

/// Built-in characterization anchors: 34.5 pm at 0 dBm, 14.02 dB CW attenuation at 10 dBm.
std::vector<CalibrationAnchor> default_anchors();

}  // namespace fuse::pr
