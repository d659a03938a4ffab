#pragma once

// Attack scenarios against the fuse: static injections, the inverse problem of
// finding the on-chip power that delivers a given power to the transmitter,
// wavelength sweeps under that constraint, and switched time series.

#include <optional>
#include <string>
#include <vector>

#include "fuse/physics.hpp"
#include "fuse/sources.hpp"

namespace fuse::attack {

/// Attack on during [on_s, off_s).
struct Interval {
  double on_s = 0.0;
  double off_s = 0.0;
};

enum class Mode { forward, fixed_tx_power };

struct AttackScenario {
  double wavelength_m = 0.0;
  Mode mode = Mode::forward;
  std::optional<double> on_chip_power_w;
  std::optional<double> target_tx_power_w;
  std::vector<Interval> schedule;

  static AttackScenario forward(double wavelength_m, double on_chip_power_w,
                                std::vector<Interval> schedule = {});
  static AttackScenario fixed_tx(double wavelength_m, double target_tx_power_w);

  /// Throws ValidationError on overlapping/unordered intervals or a power field
  /// that does not match the mode.
  void validate() const;
  bool active(double t) const;
};

struct SweepSpec {
  double center_wavelength_m = 1548.292e-9;
  double span_m = 400e-12;
  double step_m = 20e-12;
  double target_tx_power_w = 1e-5;

  void validate() const;
  /// Ascending wavelengths, center +/- span/2.
  std::vector<double> grid() const;
};

struct ScenarioResult {
  double wavelength_m = 0.0;
  double detuning_pm = 0.0;  // from the attacked resonance, in wavelength
  double signal_attenuation_db = 0.0;
  double attack_power_at_tx_w = 0.0;
  double on_chip_attack_power_w = 0.0;
  double pr_shift_pm = 0.0;
  bool converged = true;
  std::string note;
};

/// Attack power leaving the drop path toward the transmitter: on-chip power
/// times the drop transmission at the given shift.
double attack_power_at_tx(double on_chip_power_w, double wavelength_m, double pr_shift,
                          const Physics& physics);

/// Steady-state solve for a forward scenario; attenuation of `signal` is
/// relative to the cold cavity.
ScenarioResult run_static(const AttackScenario& scenario, const source::SourceSpectrum& signal,
                          const Physics& physics);

struct PowerSolution {
  double on_chip_power_w = 0.0;
  double tx_power_w = 0.0;
  /// The target falls in a jump of the forward map (bistable fold); the power
  /// returned is the lowest one whose cold-start branch reaches the target.
  bool on_fold = false;
};

/// Smallest on-chip power whose converged power at the transmitter reaches
/// `target_tx_power_w` (bisection on log power over [-60, +30] dBm, 0.05 dB).
/// Throws InfeasibleError above the +30 dBm ceiling.
PowerSolution required_power(double target_tx_power_w, double wavelength_m, const Physics& physics);

/// Independent cold-start points ordered by wavelength. A point that cannot meet
/// the constraint is returned with converged = false and the reason in `note`.
std::vector<ScenarioResult> wavelength_sweep(const SweepSpec& spec,
                                             const source::SourceSpectrum& signal,
                                             const Physics& physics, unsigned threads = 0);

struct TimeSample {
  double t_s;
  double attack_power_w;
  double transmission;  // signal transmission normalized to the cold cavity
  double shift;         // rad/s
};

std::vector<TimeSample> run_timeseries(const AttackScenario& scenario,
                                       const source::SourceSpectrum& signal, double dt_s,
                                       double duration_s, const Physics& physics);

}  // namespace fuse::attack
