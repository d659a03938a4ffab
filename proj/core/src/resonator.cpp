#include "fuse/resonator.hpp"

#include <cmath>
#include <complex>

#include "fuse/errors.hpp"
#include "fuse/units.hpp"

namespace fuse::ring {

CouplingRates CouplingRates::make(double intrinsic, double upper, double lower) {
  if (!(intrinsic >= 0.0) || !(upper >= 0.0) || !(lower >= 0.0))
    throw DomainError("decay rates must be non-negative");
  if (!(intrinsic + upper + lower > 0.0)) throw DomainError("total decay rate must be positive");
  return CouplingRates{intrinsic, upper, lower};
}

SplitPolicy SplitPolicy::custom(double intrinsic, double upper, double lower) {
  if (intrinsic < 0.0 || upper < 0.0 || lower < 0.0)
    throw ValidationError("split fractions must be non-negative");
  if (std::abs(intrinsic + upper + lower - 1.0) > 1e-9)
    throw ValidationError("split fractions must sum to 1");
  return SplitPolicy{{intrinsic, upper, lower}};
}

CouplingRates rates_from_q(double q_loaded, double omega0, const SplitPolicy& split) {
  if (!(q_loaded > 0.0)) throw DomainError("loaded Q must be positive");
  if (!(omega0 > 0.0)) throw DomainError("resonance frequency must be positive");
  const auto& f = split.fractions;
  if (f[0] < 0.0 || f[1] < 0.0 || f[2] < 0.0 || std::abs(f[0] + f[1] + f[2] - 1.0) > 1e-9)
    throw ValidationError("split fractions must be non-negative and sum to 1");

  const double kappa = omega0 / q_loaded;
  CouplingRates rates{f[0] * kappa, f[1] * kappa, 0.0};
  // Close the sum on the last rate so total() reproduces omega0/Q to the last bit
  // whenever the fractions are exact.
  rates.lower = kappa - rates.intrinsic - rates.upper;
  if (rates.lower < 0.0) rates.lower = 0.0;
  return rates;
}

double drop_transmission(Detuning d, const CouplingRates& rates) {
  const double half = 0.5 * rates.total();
  return rates.upper * rates.lower / (d.value * d.value + half * half);
}

double through_transmission(Detuning d, const CouplingRates& rates) {
  const std::complex<double> denom{0.5 * rates.total(), d.value};
  return std::norm(1.0 - rates.upper / denom);
}

double peak_drop_transmission(const CouplingRates& rates) {
  return drop_transmission(Detuning{0.0}, rates);
}

ResonatorGeometry ResonatorGeometry::make(double base_resonance_hz, double fsr_hz,
                                          int signal_mode_offset) {
  if (!(base_resonance_hz > 0.0)) throw DomainError("resonance frequency must be positive");
  if (!(fsr_hz > 0.0)) throw DomainError("FSR must be positive");
  return ResonatorGeometry{base_resonance_hz, fsr_hz, signal_mode_offset};
}

ResonatorGeometry ResonatorGeometry::aligned(double attack_resonance_hz, double signal_hz,
                                             double nominal_fsr_hz) {
  if (!(nominal_fsr_hz > 0.0)) throw DomainError("FSR must be positive");
  const double gap = signal_hz - attack_resonance_hz;
  const int offset = static_cast<int>(std::lround(gap / nominal_fsr_hz));
  if (offset == 0) return make(attack_resonance_hz, nominal_fsr_hz, 0);
  return make(attack_resonance_hz, gap / offset, offset);
}

int ResonatorGeometry::nearest_mode(double frequency_hz, double shift_hz) const {
  return static_cast<int>(std::lround((frequency_hz - base_resonance_hz - shift_hz) / fsr_hz));
}

Detuning Resonator::nearest_detuning(double frequency_hz, double pr_shift) const {
  const int m = geometry.nearest_mode(frequency_hz, rad_s_to_hz(pr_shift));
  // Offset in Hz first: subtracting two ~1e15 rad/s numbers would cost ~3 digits.
  const double offset_hz = geometry.resonance_hz(m) - frequency_hz;
  return Detuning{hz_to_rad_s(offset_hz) + pr_shift};
}

std::vector<SpectrumPoint> spectrum(std::span<const double> grid_hz, const Resonator& resonator,
                                    double pr_shift) {
  if (grid_hz.empty()) throw ValidationError("spectrum grid is empty");
  std::vector<SpectrumPoint> out;
  out.reserve(grid_hz.size());
  for (double nu : grid_hz) {
    const Detuning d = resonator.nearest_detuning(nu, pr_shift);
    out.push_back({nu, drop_transmission(d, resonator.rates),
                   through_transmission(d, resonator.rates)});
  }
  return out;
}

}  // namespace fuse::ring
