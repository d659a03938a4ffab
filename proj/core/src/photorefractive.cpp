#include "fuse/photorefractive.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <sstream>

#include "fuse/errors.hpp"
#include "fuse/units.hpp"

namespace fuse::pr {

PrModel PrModel::make(double max_shift, double reference_power, double exponent, double rise_time,
                      double fall_time) {
  if (!(max_shift >= 0.0)) throw DomainError("max_shift must be non-negative");
  if (!(reference_power > 0.0)) throw DomainError("reference_power must be positive");
  if (!(exponent > 0.0)) throw DomainError("exponent must be positive");
  if (!(rise_time > 0.0) || !(fall_time > 0.0)) throw DomainError("time constants must be positive");
  return PrModel{max_shift, reference_power, exponent, rise_time, fall_time};
}

double target_shift(double circulating_power_w, const PrModel& model) {
  if (circulating_power_w < 0.0) throw DomainError("circulating power must be non-negative");
  if (circulating_power_w == 0.0) return 0.0;
  const double x = std::pow(circulating_power_w / model.reference_power, model.exponent);
  // 1 / (1 + 1/x) keeps the result monotone in x after rounding.
  return model.max_shift / (1.0 + 1.0 / x);
}

double circulating_power(double input_power_w, ring::Detuning attack_detuning,
                         const ring::CouplingRates& rates) {
  if (input_power_w < 0.0) throw DomainError("input power must be non-negative");
  const double kappa = rates.total();
  const double half = 0.5 * kappa;
  const double d = attack_detuning.value;
  return input_power_w * rates.upper * kappa / (d * d + half * half);
}

double drive_target(double shift, const Drive& drive, const PrModel& model,
                    const ring::Resonator& resonator) {
  if (drive.power_w <= 0.0) return 0.0;
  const ring::Detuning d = resonator.nearest_detuning(drive.frequency_hz, shift);
  return target_shift(circulating_power(drive.power_w, d, resonator.rates), model);
}

namespace {

PrState advance(const PrState& state, double target, double dt, const PrModel& model) {
  const double tau = target > state.shift ? model.rise_time : model.fall_time;
  double next = state.shift + dt * (target - state.shift) / tau;
  next = std::clamp(next, 0.0, model.max_shift);
  return PrState{next, state.time + dt};
}

}  // namespace

PrState step(const PrState& state, const Drive& drive, double dt, const PrModel& model,
             const ring::Resonator& resonator) {
  if (!(dt > 0.0)) throw ValidationError("time step must be positive");
  const double target = drive_target(state.shift, drive, model, resonator);
  const double tau = target > state.shift ? model.rise_time : model.fall_time;
  if (dt > tau / 10.0 * (1.0 + 1e-12))
    throw ValidationError("time step exceeds a tenth of the active time constant");
  return advance(state, target, dt, model);
}

PrState steady_state(const Drive& drive, const PrModel& model, const ring::Resonator& resonator,
                     const SolverOptions& options) {
  if (drive.power_w < 0.0) throw DomainError("input power must be non-negative");
  const double dt = options.dt;
  if (!(dt > 0.0) || dt > std::min(model.rise_time, model.fall_time) / 10.0 * (1.0 + 1e-12))
    throw ValidationError("solver time step exceeds a tenth of the shorter time constant");

  constexpr long kBracketWindow = 1000;
  PrState state;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  const double rate_limit = options.settle_rate * model.max_shift;

  double prev_shift = 0.0;
  double prev_target = 0.0;
  for (long n = 0; n < options.max_steps; ++n) {
    const double target = drive_target(state.shift, drive, model, resonator);
    const double gap = std::abs(target - state.shift);
    if (gap == 0.0) return state;
    const double tau = target > state.shift ? model.rise_time : model.fall_time;
    // Distance to the fixed point is gap / (1 - slope of the map); the slope is
    // read off the last step. Near a fold the slope tends to 1 and this grows;
    // it is never taken below the gap itself.
    double slope = 0.0;
    if (n > 0 && state.shift != prev_shift)
      slope = (target - prev_target) / (state.shift - prev_shift);
    const double distance = gap / std::clamp(1.0 - slope, 1e-3, 1.0);
    if (distance <= options.fixed_point_tolerance * state.shift && gap / tau <= rate_limit)
      return state;
    if (options.max_steps - n <= kBracketWindow) {
      lo = std::min(lo, state.shift);
      hi = std::max(hi, state.shift);
    }
    prev_shift = state.shift;
    prev_target = target;
    state = advance(state, target, dt, model);
  }
  std::ostringstream msg;
  msg << "photorefractive steady state did not settle within " << options.max_steps
      << " steps; shift oscillating in [" << lo << ", " << hi << "] rad/s";
  throw ConvergenceError(msg.str(), lo, hi);
}

std::optional<double> fixed_point_shift(const Drive& drive, const PrModel& model,
                                        const ring::Resonator& resonator, double damping,
                                        int max_iterations, double tolerance) {
  if (!(damping > 0.0 && damping <= 1.0)) throw ValidationError("damping must lie in (0, 1]");
  double shift = 0.0;
  for (int i = 0; i < max_iterations; ++i) {
    const double target = drive_target(shift, drive, model, resonator);
    const double next = (1.0 - damping) * shift + damping * target;
    if (std::abs(next - shift) <= tolerance * std::max(next, 1e-300)) return next;
    shift = next;
  }
  return std::nullopt;
}

double shift_to_pm(double shift, const ring::Resonator& resonator) {
  const double lambda = frequency_to_wavelength(resonator.geometry.base_resonance_hz);
  return frequency_offset_to_wavelength(rad_s_to_hz(shift), lambda) / kPico;
}

double pm_to_shift(double pm, const ring::Resonator& resonator) {
  const double lambda = frequency_to_wavelength(resonator.geometry.base_resonance_hz);
  return hz_to_rad_s(wavelength_offset_to_frequency(pm * kPico, lambda));
}

double cw_attenuation_db(double shift, const ring::Resonator& resonator) {
  const double x = 2.0 * shift / resonator.rates.total();
  return 10.0 * std::log10(1.0 + x * x);
}

double shift_from_cw_attenuation(double attenuation_db, const ring::Resonator& resonator) {
  if (attenuation_db < 0.0) throw DomainError("attenuation must be non-negative");
  return 0.5 * resonator.rates.total() * std::sqrt(std::pow(10.0, attenuation_db / 10.0) - 1.0);
}

double anchor_shift(const CalibrationAnchor& anchor, const ring::Resonator& resonator) {
  switch (anchor.kind) {
    case AnchorKind::shift_pm:
      return pm_to_shift(anchor.value, resonator);
    case AnchorKind::atten_db_cw:
      return shift_from_cw_attenuation(anchor.value, resonator);
  }
  return 0.0;
}

namespace {

struct FitPoint {
  double log_power;  // ln of circulating power
  double log_shift;
};

// ln of the saturable law at log power x.
double log_model(double x, double log_max, double log_ref, double gamma) {
  const double s = gamma * (x - log_ref);
  return log_max - std::log1p(std::exp(-s));
}

struct FitParams {
  double log_max;
  double log_ref;
  double gamma;
};

// Reciprocal form 1/delta = a + b p^-gamma is linear in (a, b): starting point for LM.
FitParams initial_guess(const std::vector<FitPoint>& pts, double gamma) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : pts) {
    const double x = std::exp(-gamma * p.log_power);
    const double y = std::exp(-p.log_shift);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(pts.size());
  const double det = n * sxx - sx * sx;
  double a = 0.0, b = 0.0;
  if (det != 0.0) {
    a = (sxx * sy - sx * sxy) / det;
    b = (n * sxy - sx * sy) / det;
  }
  double max_log_shift = -std::numeric_limits<double>::infinity();
  double mean_log_power = 0.0;
  for (const auto& p : pts) {
    max_log_shift = std::max(max_log_shift, p.log_shift);
    mean_log_power += p.log_power / n;
  }
  if (a > 0.0 && b > 0.0) return {-std::log(a), (std::log(b) - std::log(a)) / gamma, gamma};
  return {max_log_shift + std::log(2.0), mean_log_power, gamma};
}

// Exponents outside this band only appear when the anchors are inconsistent.
constexpr double kLogGammaMin = -4.6;  // ~0.01
constexpr double kLogGammaMax = 4.6;   // ~100

FitParams levenberg_marquardt(const std::vector<FitPoint>& pts, FitParams start, bool fit_gamma) {
  const int np = fit_gamma ? 3 : 2;
  Eigen::VectorXd theta(np);
  theta(0) = start.log_max;
  theta(1) = start.log_ref;
  if (fit_gamma) theta(2) = std::log(start.gamma);
  const double fixed_gamma = start.gamma;

  auto unpack = [&](const Eigen::VectorXd& t) {
    return FitParams{t(0), t(1), fit_gamma ? std::exp(t(2)) : fixed_gamma};
  };
  auto cost = [&](const Eigen::VectorXd& t) {
    const FitParams f = unpack(t);
    double c = 0.0;
    for (const auto& p : pts) {
      const double r = log_model(p.log_power, f.log_max, f.log_ref, f.gamma) - p.log_shift;
      c += r * r;
    }
    return c;
  };

  const int m = static_cast<int>(pts.size());
  double lambda = 1e-3;
  double current = cost(theta);
  for (int iter = 0; iter < 500 && current > 1e-30; ++iter) {
    const FitParams f = unpack(theta);
    Eigen::MatrixXd jac(m, np);
    Eigen::VectorXd res(m);
    for (int i = 0; i < m; ++i) {
      const double s = f.gamma * (pts[i].log_power - f.log_ref);
      const double w = 1.0 / (1.0 + std::exp(s));  // d/ds of -log1p(e^-s)
      res(i) = log_model(pts[i].log_power, f.log_max, f.log_ref, f.gamma) - pts[i].log_shift;
      jac(i, 0) = 1.0;
      jac(i, 1) = -w * f.gamma;
      if (fit_gamma) jac(i, 2) = w * s;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * res;
    bool improved = false;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::MatrixXd a = jtj;
      for (int k = 0; k < np; ++k) a(k, k) += lambda * std::max(jtj(k, k), 1e-12);
      const Eigen::VectorXd delta = a.ldlt().solve(-grad);
      Eigen::VectorXd trial = theta + delta;
      if (fit_gamma) trial(2) = std::clamp(trial(2), kLogGammaMin, kLogGammaMax);
      if (!trial.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const double c = cost(trial);
      if (std::isfinite(c) && c < current) {
        const double drop = current - c;
        theta = trial;
        current = c;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        if (delta.norm() < 1e-14 || drop < 1e-30) iter = 1 << 20;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  return unpack(theta);
}

// Time (in units of tau) for the CW attenuation of a resonant drive to reach
// 90 % of steady state, and to fall back to 10 % once the drive is removed.
struct CrossingTimes {
  double rise;
  double fall;
};

double crossing_time(const std::vector<double>& attenuation, double dt, double level, bool rising) {
  for (std::size_t i = 1; i < attenuation.size(); ++i) {
    const bool crossed = rising ? attenuation[i] >= level : attenuation[i] <= level;
    if (crossed) {
      const double a0 = attenuation[i - 1];
      const double a1 = attenuation[i];
      const double frac = a1 == a0 ? 1.0 : (level - a0) / (a1 - a0);
      return dt * (static_cast<double>(i - 1) + frac);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

CrossingTimes unit_crossing_times(PrModel model, const ring::Resonator& resonator,
                                  double reference_power_w) {
  model.rise_time = 1.0;
  model.fall_time = 1.0;
  const Drive on{reference_power_w, resonator.geometry.base_resonance_hz};
  SolverOptions fine;
  fine.dt = 1e-4;
  fine.fixed_point_tolerance = 1e-12;
  fine.settle_rate = 1e-12;
  const PrState settled = steady_state(on, model, resonator, fine);
  const double steady_db = cw_attenuation_db(settled.shift, resonator);

  constexpr double kDt = 1e-4;
  constexpr int kSteps = 200'000;  // 20 tau
  std::vector<double> trace;
  trace.reserve(kSteps + 1);
  PrState s;
  trace.push_back(0.0);
  for (int i = 0; i < kSteps; ++i) {
    s = advance(s, drive_target(s.shift, on, model, resonator), kDt, model);
    trace.push_back(cw_attenuation_db(s.shift, resonator));
  }
  const double rise = crossing_time(trace, kDt, 0.9 * steady_db, true);

  trace.clear();
  s = settled;
  trace.push_back(steady_db);
  for (int i = 0; i < kSteps; ++i) {
    s = advance(s, 0.0, kDt, model);
    trace.push_back(cw_attenuation_db(s.shift, resonator));
  }
  const double fall = crossing_time(trace, kDt, 0.1 * steady_db, false);
  return {rise, fall};
}

}  // namespace

CalibrationResult calibrate(std::span<const CalibrationAnchor> anchors,
                            const ring::Resonator& resonator, const CalibrationOptions& options) {
  if (anchors.size() < 2) throw ValidationError("calibration needs at least two anchors");

  std::vector<FitPoint> pts;
  std::vector<double> shifts;
  for (const auto& a : anchors) {
    if (!(a.on_chip_power_w > 0.0)) throw ValidationError("anchor power must be positive");
    if (!(a.value > 0.0)) throw ValidationError("anchor value must be positive");
    const double shift = anchor_shift(a, resonator);
    // Resonant attack: the attack detuning is the shift itself.
    const double p_circ = circulating_power(a.on_chip_power_w, ring::Detuning{shift}, resonator.rates);
    pts.push_back({std::log(p_circ), std::log(shift)});
    shifts.push_back(shift);
  }
  std::vector<double> powers;
  for (const auto& a : anchors) powers.push_back(a.on_chip_power_w);
  std::sort(powers.begin(), powers.end());
  const auto distinct = std::unique(powers.begin(), powers.end(), [](double x, double y) {
                          return std::abs(x - y) <= 1e-12 * std::max(x, y);
                        }) - powers.begin();
  if (distinct < 2) throw ValidationError("calibration needs anchors at two distinct powers");

  const bool fit_gamma = !options.fixed_exponent && distinct >= 3;
  const double gamma0 = options.fixed_exponent.value_or(options.initial_exponent);
  const FitParams fit = levenberg_marquardt(pts, initial_guess(pts, gamma0), fit_gamma);

  CalibrationResult result;
  result.model = PrModel::make(std::exp(fit.log_max), std::exp(fit.log_ref), fit.gamma, 1.0, 1.0);

  const auto& timing = options.timing;
  if (!(timing.response_time > 0.0) || !(timing.recovery_time > 0.0))
    throw ValidationError("response and recovery times must be positive");
  if (timing.rule == TimingRule::shift_exponential) {
    result.model.rise_time = timing.response_time / std::log(10.0);
    result.model.fall_time = timing.recovery_time / std::log(10.0);
  } else {
    const CrossingTimes unit = unit_crossing_times(result.model, resonator, timing.reference_power_w);
    if (!std::isfinite(unit.rise) || !std::isfinite(unit.fall) || unit.rise <= 0.0 || unit.fall <= 0.0)
      throw ConvergenceError("could not locate attenuation crossing times for timing calibration",
                             unit.rise, unit.fall);
    result.model.rise_time = timing.response_time / unit.rise;
    result.model.fall_time = timing.recovery_time / unit.fall;
  }

  SolverOptions check;
  check.dt = std::min(result.model.rise_time, result.model.fall_time) / 20.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const Drive drive{anchors[i].on_chip_power_w, resonator.geometry.base_resonance_hz};
    const double solved = steady_state(drive, result.model, resonator, check).shift;
    const double r = (solved - shifts[i]) / shifts[i];
    result.residuals.push_back(r);
    worst = std::max(worst, std::abs(r));
  }
  if (worst > options.residual_warning) {
    result.quality_warning = true;
    std::ostringstream msg;
    msg << "calibration misfit: worst relative shift residual " << worst << " exceeds "
        << options.residual_warning;
    result.message = msg.str();
  }
  return result;
}

std::vector<CalibrationAnchor> parse_anchors_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("anchor CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "power_dbm,kind,value")
    throw ValidationError("anchor CSV header must be exactly 'power_dbm,kind,value'");

  std::vector<CalibrationAnchor> anchors;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string power, kind, value;
    if (!std::getline(fields, power, ',') || !std::getline(fields, kind, ',') ||
        !std::getline(fields, value))
      throw ValidationError("anchor CSV row " + std::to_string(row) + ": expected 3 columns");
    CalibrationAnchor a;
    try {
      std::size_t used = 0;
      a.on_chip_power_w = dbm_to_watts(std::stod(power, &used));
      if (used != power.size()) throw std::invalid_argument(power);
      a.value = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::logic_error&) {
      throw ValidationError("anchor CSV row " + std::to_string(row) + ": non-numeric field");
    }
    if (kind == "shift_pm") {
      a.kind = AnchorKind::shift_pm;
    } else if (kind == "atten_db_cw") {
      a.kind = AnchorKind::atten_db_cw;
    } else {
      throw ValidationError("anchor CSV row " + std::to_string(row) + ": unknown kind '" + kind + "'");
    }
    anchors.push_back(a);
  }
  return anchors;
}

std::vector<CalibrationAnchor> load_anchors_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open anchor file " + path.string());
  return parse_anchors_csv(in);
}

std::vector<CalibrationAnchor> default_anchors() {
  return {
      {dbm_to_watts(0.0), AnchorKind::shift_pm, 34.5},
      {dbm_to_watts(10.0), AnchorKind::atten_db_cw, 14.02},
  };
}

}  // namespace fuse::pr
