#include "fuse/attacks.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include "fuse/errors.hpp"
#include "fuse/units.hpp"

namespace fuse::attack {

namespace {

constexpr double kSignalPrGuardW = 1e-6;
constexpr double kRootToleranceDb = 0.05;

double detuning_pm(double wavelength_m, const Physics& physics) {
  const double resonance = frequency_to_wavelength(physics.resonator.geometry.base_resonance_hz);
  return (wavelength_m - resonance) / kPico;
}

}  // namespace

AttackScenario AttackScenario::forward(double wavelength_m, double on_chip_power_w,
                                       std::vector<Interval> schedule) {
  AttackScenario s;
  s.wavelength_m = wavelength_m;
  s.mode = Mode::forward;
  s.on_chip_power_w = on_chip_power_w;
  s.schedule = std::move(schedule);
  s.validate();
  return s;
}

AttackScenario AttackScenario::fixed_tx(double wavelength_m, double target_tx_power_w) {
  AttackScenario s;
  s.wavelength_m = wavelength_m;
  s.mode = Mode::fixed_tx_power;
  s.target_tx_power_w = target_tx_power_w;
  s.validate();
  return s;
}

void AttackScenario::validate() const {
  if (!(wavelength_m > 0.0)) throw ValidationError("attack wavelength must be positive");
  if (on_chip_power_w.has_value() == target_tx_power_w.has_value())
    throw ValidationError("exactly one of on-chip power and target Tx power must be set");
  if (mode == Mode::forward && !on_chip_power_w)
    throw ValidationError("forward scenarios need an on-chip power");
  if (mode == Mode::fixed_tx_power && !target_tx_power_w)
    throw ValidationError("fixed_tx_power scenarios need a target Tx power");
  const double p = on_chip_power_w.value_or(target_tx_power_w.value_or(0.0));
  if (!(p >= 0.0)) throw ValidationError("attack power must be non-negative");
  double last_off = -std::numeric_limits<double>::infinity();
  for (const auto& iv : schedule) {
    if (!(iv.off_s > iv.on_s)) throw ValidationError("schedule interval must have off > on");
    if (iv.on_s < last_off) throw ValidationError("schedule intervals must be ordered and disjoint");
    last_off = iv.off_s;
  }
}

bool AttackScenario::active(double t) const {
  return std::any_of(schedule.begin(), schedule.end(),
                     [t](const Interval& iv) { return t >= iv.on_s && t < iv.off_s; });
}

void SweepSpec::validate() const {
  if (!(center_wavelength_m > 0.0)) throw ValidationError("sweep center must be positive");
  if (!(span_m > 0.0)) throw ValidationError("sweep span must be positive");
  if (!(step_m > 0.0)) throw ValidationError("sweep step must be positive");
  const double n = span_m / step_m;
  if (std::abs(n - std::round(n)) > 1e-9 * n) throw ValidationError("sweep step must divide the span");
  if (!(target_tx_power_w >= 0.0)) throw ValidationError("target Tx power must be non-negative");
}

std::vector<double> SweepSpec::grid() const {
  validate();
  const long n = std::lround(span_m / step_m);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  for (long i = 0; i <= n; ++i)
    out.push_back(center_wavelength_m - 0.5 * span_m + static_cast<double>(i) * step_m);
  return out;
}

double attack_power_at_tx(double on_chip_power_w, double wavelength_m, double pr_shift,
                          const Physics& physics) {
  const ring::Detuning d =
      physics.resonator.nearest_detuning(wavelength_to_frequency(wavelength_m), pr_shift);
  return on_chip_power_w * ring::drop_transmission(d, physics.resonator.rates);
}

namespace {

struct Forward {
  double shift;
  double tx_power_w;
};

Forward forward_map(double on_chip_power_w, double wavelength_m, const Physics& physics) {
  const pr::Drive drive{on_chip_power_w, wavelength_to_frequency(wavelength_m)};
  const double shift = pr::steady_state(drive, physics.model, physics.resonator, physics.solver).shift;
  return {shift, attack_power_at_tx(on_chip_power_w, wavelength_m, shift, physics)};
}

}  // namespace

ScenarioResult run_static(const AttackScenario& scenario, const source::SourceSpectrum& signal,
                          const Physics& physics) {
  scenario.validate();
  if (scenario.mode != Mode::forward)
    throw ValidationError("run_static expects a forward scenario");
  const double power = *scenario.on_chip_power_w;
  const Forward f = forward_map(power, scenario.wavelength_m, physics);

  ScenarioResult r;
  r.wavelength_m = scenario.wavelength_m;
  r.detuning_pm = detuning_pm(scenario.wavelength_m, physics);
  r.on_chip_attack_power_w = power;
  r.attack_power_at_tx_w = f.tx_power_w;
  r.pr_shift_pm = pr::shift_to_pm(f.shift, physics.resonator);
  r.signal_attenuation_db =
      f.shift > 0.0 ? std::max(0.0, source::attenuation_db(signal, physics.resonator, f.shift)) : 0.0;
  if (signal.mean_power_w > kSignalPrGuardW)
    r.note = "signal power above 1 uW; its own photorefractive contribution is neglected";
  return r;
}

PowerSolution required_power(double target_tx_power_w, double wavelength_m, const Physics& physics) {
  if (!(target_tx_power_w >= 0.0)) throw DomainError("target Tx power must be non-negative");
  if (target_tx_power_w == 0.0) return {0.0, 0.0, false};

  double lo_dbm = -60.0;
  double hi_dbm = 30.0;
  const double ceiling = forward_map(dbm_to_watts(hi_dbm), wavelength_m, physics).tx_power_w;
  if (ceiling < target_tx_power_w) {
    std::ostringstream msg;
    msg << "target Tx power " << watts_to_dbm(target_tx_power_w)
        << " dBm is above the reachable ceiling " << watts_to_dbm(ceiling) << " dBm at +30 dBm on-chip";
    throw InfeasibleError(msg.str());
  }
  // Below the bracket the fuse is linear; widen downward for very weak targets.
  while (forward_map(dbm_to_watts(lo_dbm), wavelength_m, physics).tx_power_w >= target_tx_power_w) {
    hi_dbm = lo_dbm;
    lo_dbm -= 30.0;
    if (lo_dbm < -250.0) throw InfeasibleError("target Tx power is below the solver's range");
  }

  for (int i = 0; i < 60 && hi_dbm - lo_dbm > 1e-5; ++i) {
    const double mid = 0.5 * (lo_dbm + hi_dbm);
    if (forward_map(dbm_to_watts(mid), wavelength_m, physics).tx_power_w >= target_tx_power_w)
      hi_dbm = mid;
    else
      lo_dbm = mid;
  }
  PowerSolution sol;
  sol.on_chip_power_w = dbm_to_watts(hi_dbm);
  sol.tx_power_w = forward_map(sol.on_chip_power_w, wavelength_m, physics).tx_power_w;
  const double miss_db = std::abs(watts_to_dbm(sol.tx_power_w) - watts_to_dbm(target_tx_power_w));
  sol.on_fold = miss_db > kRootToleranceDb;
  return sol;
}

std::vector<ScenarioResult> wavelength_sweep(const SweepSpec& spec,
                                             const source::SourceSpectrum& signal,
                                             const Physics& physics, unsigned threads) {
  const std::vector<double> grid = spec.grid();
  std::vector<ScenarioResult> results(grid.size());

  auto solve_point = [&](std::size_t i) {
    const double lambda = grid[i];
    ScenarioResult r;
    r.wavelength_m = lambda;
    r.detuning_pm = detuning_pm(lambda, physics);
    try {
      const PowerSolution sol = required_power(spec.target_tx_power_w, lambda, physics);
      r = run_static(AttackScenario::forward(lambda, sol.on_chip_power_w), signal, physics);
      if (sol.on_fold) {
        r.converged = false;
        r.note = "target falls in a bistable jump; cold-start branch reported";
      }
    } catch (const InfeasibleError& e) {
      r.converged = false;
      r.note = e.what();
      r.on_chip_attack_power_w = std::numeric_limits<double>::quiet_NaN();
      r.attack_power_at_tx_w = std::numeric_limits<double>::quiet_NaN();
      r.signal_attenuation_db = std::numeric_limits<double>::quiet_NaN();
      r.pr_shift_pm = std::numeric_limits<double>::quiet_NaN();
    }
    results[i] = std::move(r);
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(grid.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < grid.size() && !failed; i = next++) {
        try {
          solve_point(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::vector<TimeSample> run_timeseries(const AttackScenario& scenario,
                                       const source::SourceSpectrum& signal, double dt_s,
                                       double duration_s, const Physics& physics) {
  scenario.validate();
  if (scenario.mode != Mode::forward) throw ValidationError("time series needs a forward scenario");
  if (!(duration_s > 0.0)) throw ValidationError("duration must be positive");
  if (!scenario.schedule.empty() && scenario.schedule.back().off_s > duration_s)
    throw ValidationError("duration does not cover the attack schedule");

  const double nu = wavelength_to_frequency(scenario.wavelength_m);
  const double cold = source::effective_transmission(signal, physics.resonator, 0.0);
  const long steps = std::lround(duration_s / dt_s);

  std::vector<TimeSample> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  pr::PrState state;
  for (long n = 0; n <= steps; ++n) {
    const double t = static_cast<double>(n) * dt_s;
    const double power = scenario.active(t) ? *scenario.on_chip_power_w : 0.0;
    const double hot = state.shift > 0.0
                           ? source::effective_transmission(signal, physics.resonator, state.shift)
                           : cold;
    out.push_back({t, power, hot / cold, state.shift});
    if (n == steps) break;
    try {
      state = pr::step(state, pr::Drive{power, nu}, dt_s, physics.model, physics.resonator);
      state.time = t + dt_s;
    } catch (const ValidationError& e) {
      std::ostringstream msg;
      msg << "at t = " << t << " s: " << e.what();
      throw ValidationError(msg.str());
    }
  }
  return out;
}

}  // namespace fuse::attack
