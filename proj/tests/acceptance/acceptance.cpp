// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "config.hpp"
#include "fuse/attacks.hpp"
#include "fuse/qkd.hpp"
#include "fuse/units.hpp"
#include "runner.hpp"

using namespace fuse;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

char buf[512];

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const Physics& physics() {
  static const Physics p = reference_physics();
  return p;
}

constexpr double kResonance = 1548.292e-9;

double resonant_atten(double dbm, const source::SourceSpectrum& src) {
  return qkd::fuse_attenuation_db(dbm_to_watts(dbm), src, physics());
}

Outcome lineshape_oracle() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  double worst_hwhm = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double k0 = std::pow(10.0, 8.0 + 3.0 * u(rng)) * u(rng);
    const double k1 = std::pow(10.0, 8.0 + 3.0 * u(rng));
    const double k2 = std::pow(10.0, 8.0 + 3.0 * u(rng));
    const auto r = ring::CouplingRates::make(k0, k1, k2);
    const double k = r.total();
    const double d = (u(rng) - 0.5) * 100.0 * k;
    const double ref = k1 * k2 / (d * d + 0.25 * k * k);
    worst = std::max(worst, std::abs(ring::drop_transmission({d}, r) - ref) / ref);
    if (i % 100 == 0) {
      const double half = ring::drop_transmission({0.0}, r) / 2.0;
      double lo = 0.0;
      double hi = 10.0 * k;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ring::drop_transmission({mid}, r) > half ? lo : hi) = mid;
      }
      worst_hwhm = std::max(worst_hwhm, std::abs(0.5 * (lo + hi) - 0.5 * k) / (0.5 * k));
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && worst_hwhm <= 1e-9 && secs < 1.0,
          fmt("max rel err %.2e, HWHM err %.2e, %.3f s", worst, worst_hwhm, secs)};
}

Outcome device_constants() {
  const double k_hz = physics().resonator.kappa_hz();
  const double target = hz_to_rad_s(193.63e12) / 6.6e4 / (2.0 * M_PI);
  return {std::abs(k_hz - 2.934e9) <= 0.001 * 2.934e9 && std::abs(k_hz - 3e9) < 0.1e9,
          fmt("kappa/2pi = %.5f GHz (at 193.63 THz: %.5f GHz)", k_hz / 1e9, target / 1e9)};
}

Outcome rejection() {
  const auto& r = physics().resonator;
  const double db = -ratio_to_db(ring::drop_transmission({hz_to_rad_s(25e9)}, r.rates) /
                                 ring::peak_drop_transmission(r.rates));
  return {db >= 24.0 && db <= 26.0, fmt("suppression at 25 GHz = %.3f dB", db)};
}

Outcome calibration_anchors() {
  const auto s = attack::run_static(attack::AttackScenario::forward(kResonance, 1e-3),
                                    source::cw_signal_1550_68(), physics());
  const double a10 = resonant_atten(10.0, source::cw_signal_1550_68());
  return {std::abs(s.pr_shift_pm - 34.5) <= 0.05 * 34.5 && std::abs(a10 - 14.02) <= 0.5,
          fmt("shift at 0 dBm = %.3f pm, CW attenuation at 10 dBm = %.3f dB", s.pr_shift_pm, a10)};
}

Outcome linewidth_ordering() {
  const double cw = resonant_atten(10.0, source::cw_signal_1550_68());
  const double pulsed = resonant_atten(10.0, source::pulsed_signal_10ghz());
  return {std::abs(pulsed - 10.70) <= 1.0 && pulsed < cw,
          fmt("10 GHz Gaussian %.3f dB vs CW %.3f dB (target 10.70 +/- 1.0)", pulsed, cw)};
}

Outcome dynamics() {
  const auto s = attack::run_timeseries(attack::AttackScenario::forward(kResonance, 1e-3, {{5.0, 65.0}}),
                                        source::cw_signal_1550_68(), 0.01, 80.0, physics());
  const double steady = resonant_atten(0.0, source::cw_signal_1550_68());
  double rise = NAN;
  double recover = NAN;
  for (const auto& x : s) {
    const double db = -ratio_to_db(x.transmission);
    if (std::isnan(rise) && db >= 0.9 * steady) rise = x.t_s;
    if (x.t_s > 65.0 && std::isnan(recover) && db <= 0.1 * steady) recover = x.t_s;
  }
  return {std::abs(rise - 7.0) <= 0.2 && std::abs(recover - 67.5) <= 0.25,
          fmt("90%% at %.2f s, recovered at %.2f s", rise, recover)};
}

Outcome sweep_asymmetry() {
  attack::SweepSpec spec;
  spec.target_tx_power_w = dbm_to_watts(-20.0);
  const auto pts = attack::wavelength_sweep(spec, source::pulsed_signal_10ghz(), physics());
  const auto at = [&](double pm) {
    return *std::find_if(pts.begin(), pts.end(), [&](const auto& p) { return std::abs(p.detuning_pm - pm) < 1e-6; });
  };
  const double a20 = at(-20.0).signal_attenuation_db;
  double runner_up = -INFINITY;
  for (const auto& p : pts)
    if (std::abs(p.detuning_pm) > 1e-6 && std::abs(p.detuning_pm + 20.0) > 1e-6)
      runner_up = std::max(runner_up, p.signal_attenuation_db);
  const double excess = watts_to_dbm(at(-200.0).on_chip_attack_power_w) - watts_to_dbm(at(0.0).on_chip_attack_power_w);
  const bool peak = a20 > runner_up + 0.01;
  return {peak && std::abs(excess - 17.7) <= 2.0,
          fmt("atten at -20 pm %.4f dB vs best other off-resonant %.4f dB; P(-200 pm) - P(0) = %.2f dB",
              a20, runner_up, excess)};
}

Outcome non_resonant_point() {
  const auto r = attack::run_static(attack::AttackScenario::forward(1548.091e-9, dbm_to_watts(5.0)),
                                    source::cw_signal_1550_68(), physics());
  const double tx = watts_to_dbm(r.attack_power_at_tx_w);
  return {std::abs(r.signal_attenuation_db - 1.04) <= 0.5 && std::abs(tx + 23.1) <= 1.5,
          fmt("signal drop %.3f dB, power at Tx %.3f dBm", r.signal_attenuation_db, tx)};
}

const qkd::ChannelModel& channel() {
  static const qkd::ChannelModel ch = qkd::calibrate_channel(qkd::reference_targets(), qkd::ChannelModel{});
  return ch;
}

Outcome qkd_calibration() {
  const auto r = qkd::skr({}, channel());
  const double e_rate = std::abs(r.sifted_rate_per_pulse / 4.9708e-4 - 1.0);
  const double e_qber = std::abs(r.qber / 0.0201 - 1.0);
  return {e_rate <= 0.005 && e_qber <= 0.005,
          fmt("sifted %.5e (rel err %.1e), QBER %.5f (rel err %.1e)", r.sifted_rate_per_pulse, e_rate, r.qber,
              e_qber)};
}

Outcome skr_suppression() {
  const auto src = source::pulsed_signal_10ghz();
  std::vector<double> dbm;
  std::vector<double> powers;
  for (int p = -35; p <= 10; ++p) {
    dbm.push_back(p);
    powers.push_back(dbm_to_watts(p));
  }
  const auto pts = qkd::skr_vs_attack(powers, src, physics(), channel());
  const double r10 = pts.back().ratio;
  double onset = NAN;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (pts[i].ratio <= 0.95) {
      onset = dbm[i];
      break;
    }

  std::vector<double> distances;
  for (double d = 0.0; d <= 200.0; d += 2.0) distances.push_back(d);
  const std::vector<double> attack{dbm_to_watts(-20.0), dbm_to_watts(-10.0), dbm_to_watts(0.0), dbm_to_watts(10.0)};
  const auto grid = qkd::skr_vs_distance(distances, attack, src, physics(), channel());
  bool monotone = true;
  for (std::size_t j = 0; j < attack.size(); ++j)
    for (std::size_t i = 1; i < distances.size(); ++i)
      monotone = monotone && grid[i * attack.size() + j].ratio <= grid[(i - 1) * attack.size() + j].ratio + 1e-12;

  return {std::abs(r10 - 0.039) <= 0.01 && std::abs(onset + 20.0) <= 3.0 && monotone,
          fmt("SKR/R0 at 10 dBm = %.2f%% (target 3.9 +/- 1), onset %.0f dBm, distance monotone: %s",
              100.0 * r10, onset, monotone ? "yes" : "no")};
}

Outcome decoy_soundness() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto t0 = std::chrono::steady_clock::now();
  int violations = 0;
  double worst_tail = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double eta = std::pow(10.0, -5.0 * u(rng));
    const double y0 = std::pow(10.0, -8.0 + 6.0 * u(rng));
    const double e_d = 0.2 * u(rng);
    qkd::DecoyParams p;
    p.mu = 0.1 + 0.9 * u(rng);
    p.nu = (0.01 + 0.89 * u(rng)) * p.mu;
    auto yield = [&](int n) { return 1.0 - (1.0 - y0) * std::pow(1.0 - eta, n); };
    auto err = [&](int n) { return 0.5 * y0 + e_d * (1.0 - std::pow(1.0 - eta, n)); };
    auto mix = [&](double lambda) {
      double w = std::exp(-lambda);
      double mass = 0.0, gain = 0.0, e = 0.0;
      for (int n = 0; n <= 50; ++n) {
        if (n > 0) w *= lambda / n;
        mass += w;
        gain += w * yield(n);
        e += w * err(n);
      }
      worst_tail = std::max(worst_tail, 1.0 - mass);
      return qkd::IntensityStats{lambda, gain, gain > 0.0 ? e / gain : 0.0};
    };
    qkd::GainsErrors ge{mix(p.mu), mix(p.nu), mix(0.0), y0};
    const auto b = qkd::single_photon_bounds(p, ge);
    if (!b.feasible) continue;
    if (b.y1_lower > yield(1) * (1.0 + 1e-9)) ++violations;
    if (b.e1_upper < err(1) / yield(1) * (1.0 - 1e-9)) ++violations;
  }
  const double secs = seconds_since(t0);
  return {violations == 0 && worst_tail < 1e-12 && secs < 30.0,
          fmt("%d violations, truncation %.1e, %.2f s", violations, worst_tail, secs)};
}

Outcome determinism() {
  std::string differing;
  for (const auto& name : cli::preset_names()) {
    const auto cfg = cli::preset_config(name);
    if (cli::render_csv(cli::simulate(cfg)) != cli::render_csv(cli::simulate(cfg))) differing += " " + name;
  }
  return {differing.empty(), differing.empty() ? fmt("%zu presets bit-identical", cli::preset_names().size())
                                               : "differing:" + differing};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"lineshape oracle", lineshape_oracle},
      {"device constants", device_constants},
      {"half-FSR rejection", rejection},
      {"calibration anchors", calibration_anchors},
      {"linewidth ordering", linewidth_ordering},
      {"switching dynamics", dynamics},
      {"sweep asymmetry", sweep_asymmetry},
      {"non-resonant static point", non_resonant_point},
      {"QKD calibration", qkd_calibration},
      {"SKR suppression", skr_suppression},
      {"decoy-bound soundness", decoy_soundness},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s %2zu %-26s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
