#include "fuse/qkd.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fuse/attacks.hpp"
#include "fuse/errors.hpp"
#include "fuse/units.hpp"

namespace fuse::qkd {

void DecoyParams::validate() const {
  if (!(mu > nu && nu > vacuum && vacuum >= 0.0))
    throw ValidationError("decoy intensities must satisfy mu > nu > vacuum >= 0");
  if (!(p_mu > 0.0 && p_nu > 0.0 && p_vacuum > 0.0))
    throw ValidationError("decoy probabilities must be positive");
  if (std::abs(p_mu + p_nu + p_vacuum - 1.0) > 1e-9)
    throw ValidationError("decoy probabilities must sum to 1");
}

void ChannelModel::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!(length_km >= 0.0)) throw ValidationError("channel length must be non-negative");
  if (!(fiber_loss_db_per_km >= 0.0) || !(extra_loss_db >= 0.0))
    throw ValidationError("losses must be non-negative");
  if (!prob(detector_efficiency)) throw ValidationError("detector efficiency must lie in [0, 1]");
  if (!prob(dark_count_prob)) throw ValidationError("dark-count probability must lie in [0, 1]");
  if (!prob(misalignment_error)) throw ValidationError("misalignment error must lie in [0, 1]");
  if (!prob(sifting)) throw ValidationError("sifting factor must lie in [0, 1]");
  if (!(ec_efficiency >= 1.0)) throw ValidationError("error-correction efficiency must be >= 1");
  if (!(rep_rate_hz > 0.0)) throw ValidationError("repetition rate must be positive");
}

double ChannelModel::transmittance() const {
  const double loss_db = fiber_loss_db_per_km * length_km + extra_loss_db;
  return detector_efficiency * std::pow(10.0, -loss_db / 10.0);
}

namespace {

IntensityStats intensity_stats(double lambda, double eta, double y0, double e_d) {
  const double clicks = -std::expm1(-eta * lambda);  // 1 - e^{-eta lambda}
  IntensityStats s;
  s.intensity = lambda;
  s.gain = y0 + (1.0 - y0) * clicks;
  const double error_gain = kVacuumError * y0 + e_d * clicks;
  s.qber = s.gain > 0.0 ? std::clamp(error_gain / s.gain, 0.0, 1.0) : 0.0;
  return s;
}

}  // namespace

GainsErrors gains_and_errors(const DecoyParams& params, const ChannelModel& channel) {
  params.validate();
  channel.validate();
  const double eta = channel.transmittance();
  const double y0 = channel.background_yield();
  const double e_d = channel.misalignment_error;
  GainsErrors g;
  g.signal = intensity_stats(params.mu, eta, y0, e_d);
  g.decoy = intensity_stats(params.nu, eta, y0, e_d);
  g.vacuum = intensity_stats(params.vacuum, eta, y0, e_d);
  g.background_yield = y0;
  return g;
}

SinglePhotonBounds single_photon_bounds(const DecoyParams& params, const GainsErrors& stats) {
  const double mu = params.mu;
  const double nu = params.nu;
  if (!(nu > 0.0)) throw ValidationError("decoy intensity nu must be positive for the bounds");
  if (!(mu > nu)) throw ValidationError("signal and decoy intensities must differ (mu > nu)");

  const double y0 = stats.vacuum.gain;
  const double q_mu = stats.signal.gain;
  const double q_nu = stats.decoy.gain;
  const double e_nu = stats.decoy.qber;

  const double y1 = mu / (mu * nu - nu * nu) *
                    (q_nu * std::exp(nu) - q_mu * std::exp(mu) * nu * nu / (mu * mu) -
                     (mu * mu - nu * nu) / (mu * mu) * y0);
  SinglePhotonBounds b;
  if (!(y1 > 0.0)) {
    b.y1_lower = 0.0;
    b.e1_upper = 1.0;
    b.feasible = false;
    return b;
  }
  b.y1_lower = std::min(y1, 1.0);
  const double e1 = (e_nu * q_nu * std::exp(nu) - kVacuumError * y0) / (y1 * nu);
  b.e1_upper = std::clamp(e1, 0.0, 1.0);
  b.feasible = true;
  return b;
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

SkrReport skr(const DecoyParams& params, const ChannelModel& channel) {
  SkrReport r;
  r.stats = gains_and_errors(params, channel);
  const SinglePhotonBounds b = single_photon_bounds(params, r.stats);
  r.y0 = r.stats.vacuum.gain;
  r.y1_lower = b.y1_lower;
  r.e1_upper = b.e1_upper;
  r.bounds_feasible = b.feasible;
  r.q1_gain = b.y1_lower * params.mu * std::exp(-params.mu);
  r.sifted_rate_per_pulse = channel.sifting * params.p_mu * r.stats.signal.gain;
  r.qber = r.stats.signal.qber;
  if (b.feasible) {
    const double e1 = std::min(b.e1_upper, 0.5);
    const double rate = channel.sifting * (-r.stats.signal.gain * channel.ec_efficiency *
                                               binary_entropy(r.stats.signal.qber) +
                                           r.q1_gain * (1.0 - binary_entropy(e1)));
    r.skr_per_pulse = std::max(rate, 0.0);
  }
  r.skr_bps = r.skr_per_pulse * params.p_mu * channel.rep_rate_hz;
  return r;
}

namespace {

// Detector efficiency and e_d that hit the two targets for a given dark count.
ChannelModel solve_channel(const ChannelTargets& t, ChannelModel ch, const DecoyParams& params) {
  const double q_mu = t.sifted_rate_per_pulse / (ch.sifting * params.p_mu);
  const double y0 = ch.background_yield();
  if (!(q_mu > y0))
    throw InfeasibleError("dark_count_prob: background yield alone exceeds the target signal gain");
  // 1 - (1 - y0) e^{-eta mu} = q_mu
  const double eta = -std::log((1.0 - q_mu) / (1.0 - y0)) / params.mu;
  const double fiber = std::pow(10.0, -(ch.fiber_loss_db_per_km * ch.length_km + ch.extra_loss_db) / 10.0);
  ch.detector_efficiency = eta / fiber;
  if (ch.detector_efficiency > 1.0) {
    std::ostringstream msg;
    msg << "detector_efficiency: target gain needs efficiency " << ch.detector_efficiency << " > 1";
    throw InfeasibleError(msg.str());
  }
  const double clicks = (q_mu - y0) / (1.0 - y0);
  ch.misalignment_error = (t.qber * q_mu - kVacuumError * y0) / clicks;
  if (ch.misalignment_error < 0.0)
    throw InfeasibleError("misalignment_error: target QBER is below the dark-count floor");
  if (ch.misalignment_error > 0.5)
    throw InfeasibleError("misalignment_error: target QBER needs e_d > 0.5");
  return ch;
}

double suppression_ratio(const ChannelModel& nominal, const DecoyParams& params, double extra_db) {
  const double r0 = skr(params, nominal).skr_per_pulse;
  if (!(r0 > 0.0)) return 0.0;
  ChannelModel attacked = nominal;
  attacked.extra_loss_db += extra_db;
  return skr(params, attacked).skr_per_pulse / r0;
}

}  // namespace

ChannelModel calibrate_channel(const ChannelTargets& targets, const ChannelModel& fixed,
                               const DecoyParams& params) {
  params.validate();
  if (!(targets.sifted_rate_per_pulse > 0.0) || !(targets.qber > 0.0))
    throw ValidationError("calibration targets must be positive");
  if (targets.sifted_rate_per_pulse >= fixed.sifting * params.p_mu)
    throw InfeasibleError("sifted rate target exceeds q * p_mu, the rate of a lossless channel");

  if (!targets.suppression) {
    ChannelModel ch = solve_channel(targets, fixed, params);
    ch.validate();
    return ch;
  }

  const SuppressionAnchor anchor = *targets.suppression;
  if (!(anchor.skr_ratio > 0.0 && anchor.skr_ratio < 1.0) || !(anchor.extra_loss_db > 0.0))
    throw ValidationError("suppression anchor needs a ratio in (0, 1) and a positive loss");

  auto ratio_at = [&](double p_dark) {
    ChannelModel ch = fixed;
    ch.dark_count_prob = p_dark;
    return suppression_ratio(solve_channel(targets, ch, params), params, anchor.extra_loss_db);
  };

  // e_d >= 0 caps the dark count at qber * q_mu (y0 = 2 p_dark, e0 = 1/2).
  const double q_mu = targets.sifted_rate_per_pulse / (fixed.sifting * params.p_mu);
  double lo = 0.0;
  double hi = targets.qber * q_mu * (1.0 - 1e-9);
  if (ratio_at(lo) < anchor.skr_ratio)
    throw InfeasibleError(
        "dark_count_prob: suppression ratio is unreachable even without dark counts");
  if (ratio_at(hi) > anchor.skr_ratio)
    throw InfeasibleError("dark_count_prob: suppression ratio needs e_d < 0");
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (ratio_at(mid) > anchor.skr_ratio)
      lo = mid;
    else
      hi = mid;
  }
  ChannelModel ch = fixed;
  ch.dark_count_prob = 0.5 * (lo + hi);
  ch = solve_channel(targets, ch, params);
  ch.validate();
  return ch;
}

ChannelTargets reference_targets() {
  return ChannelTargets{4.9708e-4, 0.0201, SuppressionAnchor{10.70, 0.039}};
}

double fuse_attenuation_db(double attack_power_w, const source::SourceSpectrum& signal,
                           const Physics& physics) {
  if (attack_power_w <= 0.0) return 0.0;
  const double resonance = frequency_to_wavelength(physics.resonator.geometry.base_resonance_hz);
  return attack::run_static(attack::AttackScenario::forward(resonance, attack_power_w), signal, physics)
      .signal_attenuation_db;
}

std::vector<SkrPoint> skr_vs_attack(std::span<const double> attack_powers_w,
                                    const source::SourceSpectrum& signal, const Physics& physics,
                                    const ChannelModel& channel, const DecoyParams& params) {
  const double distance[] = {channel.length_km};
  return skr_vs_distance(distance, attack_powers_w, signal, physics, channel, params);
}

std::vector<SkrPoint> skr_vs_distance(std::span<const double> distances_km,
                                      std::span<const double> attack_powers_w,
                                      const source::SourceSpectrum& signal, const Physics& physics,
                                      const ChannelModel& channel, const DecoyParams& params) {
  std::vector<double> attenuation;
  attenuation.reserve(attack_powers_w.size());
  for (double p : attack_powers_w) attenuation.push_back(fuse_attenuation_db(p, signal, physics));

  std::vector<SkrPoint> out;
  out.reserve(distances_km.size() * attack_powers_w.size());
  for (double d : distances_km) {
    ChannelModel nominal = channel;
    nominal.length_km = d;
    const double r0 = skr(params, nominal).skr_per_pulse;
    for (std::size_t i = 0; i < attack_powers_w.size(); ++i) {
      ChannelModel attacked = nominal;
      attacked.extra_loss_db += attenuation[i];
      SkrPoint pt;
      pt.distance_km = d;
      pt.attack_power_w = attack_powers_w[i];
      pt.attenuation_db = attenuation[i];
      pt.report = skr(params, attacked);
      pt.ratio = r0 > 0.0 ? pt.report.skr_per_pulse / r0 : 0.0;
      out.push_back(pt);
    }
  }
  return out;
}

}  // namespace fuse::qkd
