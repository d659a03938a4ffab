#include "fuse/sources.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "fuse/errors.hpp"
#include "fuse/units.hpp"

namespace fuse::source {

namespace {

constexpr double kFwhmToSigma = 0.42466090014400953;  // 1 / (2 sqrt(2 ln 2))

double port_transmission(ring::Detuning d, const ring::CouplingRates& rates, Port port) {
  return port == Port::drop ? ring::drop_transmission(d, rates) : ring::through_transmission(d, rates);
}

// FSR average of the nearest-mode lineshape; stands in for T in the Lorentzian
// far wings, where the source density barely changes across one FSR.
double comb_average(const ring::Resonator& r, Port port) {
  const double h = 0.5 * r.rates.total();
  const double a = std::numbers::pi * r.geometry.fsr_hz;  // half an FSR in rad/s
  const double integral = 2.0 / h * std::atan(a / h);  // of 1/(D^2+h^2) over one FSR, rad/s
  const double norm = hz_to_rad_s(r.geometry.fsr_hz);
  if (port == Port::drop) return r.rates.upper * r.rates.lower * integral / norm;
  return 1.0 - r.rates.upper * (r.rates.total() - r.rates.upper) * integral / norm;
}

}  // namespace

SourceSpectrum SourceSpectrum::make(double center_hz, double fwhm_hz, Shape shape,
                                    double mean_power_w) {
  if (!(center_hz > 0.0)) throw ValidationError("source center frequency must be positive");
  if (!(fwhm_hz >= 0.0)) throw ValidationError("source linewidth must be non-negative");
  if ((shape == Shape::delta) != (fwhm_hz == 0.0))
    throw ValidationError("a zero linewidth is the delta shape and only the delta shape");
  if (!(mean_power_w >= 0.0)) throw ValidationError("source power must be non-negative");
  return SourceSpectrum{center_hz, fwhm_hz, shape, mean_power_w};
}

double SourceSpectrum::density(double offset_hz) const {
  switch (shape) {
    case Shape::delta:
      return 0.0;
    case Shape::gaussian: {
      const double sigma = fwhm_hz * kFwhmToSigma;
      const double z = offset_hz / sigma;
      return std::exp(-0.5 * z * z) / (sigma * std::sqrt(kTwoPi));
    }
    case Shape::lorentzian: {
      const double g = 0.5 * fwhm_hz;
      return g / (std::numbers::pi * (offset_hz * offset_hz + g * g));
    }
  }
  return 0.0;
}

PulseTrain PulseTrain::make(double rep_rate_hz, double pulse_width_s) {
  if (!(rep_rate_hz > 0.0)) throw ValidationError("repetition rate must be positive");
  if (!(pulse_width_s > 0.0) || !(pulse_width_s * rep_rate_hz < 1.0))
    throw ValidationError("pulse width must be positive and shorter than the period");
  return PulseTrain{rep_rate_hz, pulse_width_s};
}

double effective_transmission(const SourceSpectrum& source, const ring::Resonator& resonator,
                              double pr_shift, Port port, double relative_tolerance) {
  if (source.shape == Shape::delta)
    return port_transmission(resonator.nearest_detuning(source.center_hz, pr_shift),
                             resonator.rates, port);

  const double kappa_hz = resonator.kappa_hz();
  const double half_window = std::max(20.0 * source.fwhm_hz, 20.0 * kappa_hz);
  const double lo = -half_window;
  const double hi = half_window;

  // Break the window at every shifted resonance and at the mid-FSR kinks of the
  // nearest-mode lineshape, and around both peaks at their own width scale, so
  // no panel hides a feature far narrower than itself.
  constexpr double kScales[] = {0.25, 1.0, 4.0};
  // Each panel already spans at most one feature scale; 2^10 sub-panels is ample.
  constexpr unsigned kMaxDepth = 10;
  const auto& g = resonator.geometry;
  const double shift_hz = rad_s_to_hz(pr_shift);
  std::vector<double> cuts{lo, hi, 0.0};
  for (double k : kScales) {
    cuts.push_back(-k * source.fwhm_hz);
    cuts.push_back(k * source.fwhm_hz);
  }
  const int m_lo = g.nearest_mode(source.center_hz + lo, shift_hz) - 1;
  const int m_hi = g.nearest_mode(source.center_hz + hi, shift_hz) + 1;
  for (int m = m_lo; m <= m_hi; ++m) {
    const double peak = g.resonance_hz(m) + shift_hz - source.center_hz;
    cuts.push_back(peak);
    cuts.push_back(peak + 0.5 * g.fsr_hz);
    for (double k : kScales) {
      cuts.push_back(peak - k * kappa_hz);
      cuts.push_back(peak + k * kappa_hz);
    }
  }
  std::erase_if(cuts, [&](double c) { return c < lo || c > hi; });
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto integrand = [&](double x) {
    const ring::Detuning d = resonator.nearest_detuning(source.center_hz + x, pr_shift);
    return source.density(x) * port_transmission(d, resonator.rates, port);
  };

  using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
  double total = 0.0;
  double total_error = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double err = 0.0;
    total += Quad::integrate(integrand, cuts[i], cuts[i + 1], kMaxDepth, relative_tolerance * 1e-2, &err);
    total_error += err;
  }

  if (source.shape == Shape::lorentzian) {
    const double gamma = 0.5 * source.fwhm_hz;
    const double tail_mass = 1.0 - 2.0 / std::numbers::pi * std::atan(half_window / gamma);
    total += tail_mass * comb_average(resonator, port);
  }

  if (!(total_error <= relative_tolerance * std::abs(total) + 1e-300)) {
    throw NumericalError("effective transmission quadrature missed its tolerance (achieved " +
                             std::to_string(total_error / std::abs(total)) + ")",
                         total_error / std::abs(total));
  }
  return std::clamp(total, 0.0, 1.0);
}

double attenuation_db(const SourceSpectrum& source, const ring::Resonator& resonator,
                      double pr_shift) {
  const double cold = effective_transmission(source, resonator, 0.0, Port::drop);
  const double hot = effective_transmission(source, resonator, pr_shift, Port::drop);
  return 10.0 * std::log10(cold / hot);
}

SourceSpectrum cw_signal_1550_68() {
  return SourceSpectrum::make(wavelength_to_frequency(1550.68 * kNano), 0.0, Shape::delta, 0.5e-6);
}

SourceSpectrum pulsed_signal_10ghz() {
  const double nu = wavelength_to_frequency(1550.68 * kNano);
  const PulseTrain train;
  const double mean_power = 0.6 * kPlanck * nu * train.rep_rate_hz;
  return SourceSpectrum::make(nu, 10.0 * kGiga, Shape::gaussian, mean_power);
}

SourceSpectrum tunable_attack(double wavelength_m, double power_w) {
  return SourceSpectrum::make(wavelength_to_frequency(wavelength_m), 0.0, Shape::delta, power_w);
}

SourceSpectrum preset(std::string_view name, std::optional<double> wavelength_m) {
  if (name == "cw_signal_1550_68") return cw_signal_1550_68();
  if (name == "pulsed_signal_10GHz") return pulsed_signal_10ghz();
  if (name == "tunable_attack") {
    if (!wavelength_m) throw ValidationError("tunable_attack preset needs a wavelength");
    return tunable_attack(*wavelength_m);
  }
  throw ValidationError("unknown source preset '" + std::string(name) + "'");
}

}  // namespace fuse::source
