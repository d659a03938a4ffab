#pragma once

// Asymptotic three-intensity decoy-state BB84 with a lossy fiber channel, and the
// key rate left over once the fuse adds its attack-induced loss.

#include <optional>
#include <span>
#include <vector>

#include "fuse/physics.hpp"
#include "fuse/sources.hpp"

namespace fuse::qkd {

struct DecoyParams {
  double mu = 0.6;
  double nu = 0.2;
  double vacuum = 0.0;
  double p_mu = 0.8824;
  double p_nu = 0.0588;
  double p_vacuum = 0.0588;

  /// mu > nu > vacuum >= 0, probabilities positive and summing to 1 within 1e-9.
  void validate() const;
};

struct ChannelModel {
  double length_km = 30.0;
  double fiber_loss_db_per_km = 0.2;
  double extra_loss_db = 0.0;           // everything else in the path, fuse included
  double detector_efficiency = 0.1;
  double dark_count_prob = 1e-6;        // per gate, per detector
  double misalignment_error = 0.01;     // e_d
  double ec_efficiency = 1.16;          // f
  double sifting = 0.5;                 // q
  double rep_rate_hz = 625e6;

  void validate() const;
  /// eta: detector efficiency times the channel transmittance.
  double transmittance() const;
  /// Y0 = 2 p_dark: either of the two detectors firing on an empty gate.
  double background_yield() const { return 2.0 * dark_count_prob; }
};

struct IntensityStats {
  double intensity = 0.0;
  double gain = 0.0;  // Q_lambda
  double qber = 0.0;  // E_lambda
};

struct GainsErrors {
  IntensityStats signal;
  IntensityStats decoy;
  IntensityStats vacuum;
  double background_yield = 0.0;
};

inline constexpr double kVacuumError = 0.5;

GainsErrors gains_and_errors(const DecoyParams& params, const ChannelModel& channel);

struct SinglePhotonBounds {
  double y1_lower = 0.0;
  double e1_upper = 1.0;
  bool feasible = false;  // false when the yield bound is not positive
};

/// Vacuum + weak decoy bounds on the single-photon yield and error. Y0 is read
/// from the vacuum gain. Throws ValidationError for nu = 0 or mu = nu.
SinglePhotonBounds single_photon_bounds(const DecoyParams& params, const GainsErrors& stats);

double binary_entropy(double p);

struct SkrReport {
  GainsErrors stats;
  double y0 = 0.0;
  double y1_lower = 0.0;
  double e1_upper = 0.0;
  double q1_gain = 0.0;
  double sifted_rate_per_pulse = 0.0;
  double qber = 0.0;
  double skr_per_pulse = 0.0;  // clamped at zero
  double skr_bps = 0.0;
  bool bounds_feasible = false;
};

SkrReport skr(const DecoyParams& params, const ChannelModel& channel);

/// SKR ratio observed after adding `extra_loss_db` to the nominal channel.
struct SuppressionAnchor {
  double extra_loss_db = 0.0;
  double skr_ratio = 0.0;
};

struct ChannelTargets {
  double sifted_rate_per_pulse = 0.0;
  double qber = 0.0;
  /// When present the dark-count probability is solved for; otherwise the
  /// prior in the fixed channel is kept.
  std::optional<SuppressionAnchor> suppression;
};

/// Solves detector efficiency and misalignment error (and, with a suppression
/// anchor, the dark-count probability) so the nominal channel reproduces the
/// targets. Length, fiber loss, f, q, rep rate come from `fixed`. Throws
/// InfeasibleError naming the binding parameter when no physical solution exists.
ChannelModel calibrate_channel(const ChannelTargets& targets, const ChannelModel& fixed,
                               const DecoyParams& params = {});

/// Reference operating point: 4.9708e-4 sifted bits/pulse and QBER 0.0201 at 30 km,
/// with SKR falling to 3.9 % under 10.70 dB of extra loss.
ChannelTargets reference_targets();

/// Drop-port loss the fuse puts on `signal` under a resonant attack.
double fuse_attenuation_db(double attack_power_w, const source::SourceSpectrum& signal,
                           const Physics& physics);

struct SkrPoint {
  double distance_km = 0.0;
  double attack_power_w = 0.0;
  double attenuation_db = 0.0;
  SkrReport report;
  double ratio = 0.0;  // SKR relative to the unattacked channel at the same distance
};

/// Resonant attack at each power, fuse loss inserted as extra loss.
std::vector<SkrPoint> skr_vs_attack(std::span<const double> attack_powers_w,
                                    const source::SourceSpectrum& signal, const Physics& physics,
                                    const ChannelModel& channel, const DecoyParams& params = {});

/// Distance-major grid over `distances_km` x `attack_powers_w`.
std::vector<SkrPoint> skr_vs_distance(std::span<const double> distances_km,
                                      std::span<const double> attack_powers_w,
                                      const source::SourceSpectrum& signal, const Physics& physics,
                                      const ChannelModel& channel, const DecoyParams& params = {});

}  // namespace fuse::qkd
