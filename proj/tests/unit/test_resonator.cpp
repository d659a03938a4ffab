#include <chrono>
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "fuse/errors.hpp"
#include "fuse/physics.hpp"
#include "fuse/resonator.hpp"
#include "fuse/units.hpp"
#include "generators.hpp"

using namespace fuse;
using namespace fuse::ring;

namespace {

// Field amplitudes straight from coupled-mode theory, kept independent of the
// library's real-arithmetic closed forms.
double oracle_drop(double d, const CouplingRates& r) {
  const std::complex<double> den(r.total() / 2.0, d);
  return std::norm(std::sqrt(r.upper * r.lower) / den);
}

double oracle_through(double d, const CouplingRates& r) {
  const std::complex<double> den(r.total() / 2.0, d);
  return std::norm(1.0 - r.upper / den);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

const double kOmegaB = hz_to_rad_s(wavelength_to_frequency(1548.292e-9));

}  // namespace

TEST_CASE("rates_from_q: loaded linewidth at the attack resonance") {
  const CouplingRates r = rates_from_q(6.6e4, kOmegaB);
  CHECK(rad_s_to_hz(r.total()) == doctest::Approx(2.9338e9).epsilon(1e-4));
  CHECK(r.intrinsic == doctest::Approx(r.total() / 3.0).epsilon(1e-15));
  CHECK(r.upper == doctest::Approx(r.total() / 3.0).epsilon(1e-15));
  CHECK(r.lower == doctest::Approx(r.total() / 3.0).epsilon(1e-15));
  CHECK(rel(r.loaded_q(kOmegaB), 6.6e4) < 1e-9);
}

TEST_CASE("rates_from_q: near-lossless limit") {
  const CouplingRates r = rates_from_q(1e12, kOmegaB);
  CHECK(rad_s_to_hz(r.total()) < 1e3);
}

TEST_CASE("rates_from_q: errors") {
  CHECK_THROWS_AS(rates_from_q(0.0, kOmegaB), DomainError);
  CHECK_THROWS_AS(rates_from_q(6.6e4, -1.0), DomainError);
  CHECK_THROWS_AS(SplitPolicy::custom(0.5, 0.5, 0.1), ValidationError);
  CHECK_THROWS_AS(SplitPolicy::custom(-0.1, 0.6, 0.5), ValidationError);
  CHECK_NOTHROW(SplitPolicy::custom(0.2, 0.4, 0.4));
}

TEST_CASE("property: Q round trip over random splits") {
  testing::Gen g(11);
  for (int i = 0; i < 2000; ++i) {
    const double q = g.log_uniform(1e2, 1e8);
    const double w = g.log_uniform(1e14, 2e15);
    const double a = g.uniform(0.0, 1.0);
    const double b = g.uniform(0.0, 1.0 - a);
    const CouplingRates r = rates_from_q(q, w, SplitPolicy::custom(a, b, 1.0 - a - b));
    REQUIRE(rel(r.loaded_q(w), q) < 1e-9);
  }
}

TEST_CASE("drop_transmission: closed-form examples") {
  const CouplingRates crit = CouplingRates::make(0.0, 1e10, 1e10);
  CHECK(drop_transmission({0.0}, crit) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(through_transmission({0.0}, crit) == doctest::Approx(0.0));

  const CouplingRates r = rates_from_q(6.6e4, kOmegaB);
  CHECK(drop_transmission({0.0}, r) == doctest::Approx(4.0 / 9.0).epsilon(1e-14));
  CHECK(peak_drop_transmission(r) == doctest::Approx(4.0 / 9.0).epsilon(1e-14));
  CHECK(through_transmission({0.0}, r) == doctest::Approx(1.0 / 9.0).epsilon(1e-14));
  CHECK(through_transmission({1e6 * r.total()}, r) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("drop_transmission: rejection ratios at 25 GHz and at the 34.5 pm shift") {
  // kappa/2pi = 2.934 GHz; ratio = 1 / (1 + (2 D / kappa)^2).
  const CouplingRates r = rates_from_q(6.6e4, kOmegaB);
  const double peak = drop_transmission({0.0}, r);
  const double half_fsr = ratio_to_db(drop_transmission({hz_to_rad_s(25e9)}, r) / peak);
  CHECK(half_fsr == doctest::Approx(-24.64).epsilon(2e-3));
  const double d_pm = hz_to_rad_s(wavelength_offset_to_frequency(34.5e-12, 1548.292e-9));
  CHECK(ratio_to_db(drop_transmission({d_pm}, r) / peak) == doctest::Approx(-9.85).epsilon(2e-3));
}

TEST_CASE("property: drop and through match the complex-amplitude oracle") {
  testing::Gen g(12);
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 100000; ++i) {
    const CouplingRates r = g.rates();
    const double d = g.uniform(-50.0, 50.0) * r.total();
    REQUIRE(rel(drop_transmission({d}, r), oracle_drop(d, r)) < 1e-12);
    REQUIRE(std::abs(through_transmission({d}, r) - oracle_through(d, r)) < 1e-12);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 1.0);
}

TEST_CASE("property: even, decreasing, half width kappa/2, bounded") {
  testing::Gen g(13);
  for (int i = 0; i < 5000; ++i) {
    const CouplingRates r = g.rates();
    const double k = r.total();
    const double d = g.uniform(0.0, 20.0) * k;
    const double peak = drop_transmission({0.0}, r);
    REQUIRE(drop_transmission({d}, r) == drop_transmission({-d}, r));
    REQUIRE(drop_transmission({d * 1.01 + 1e-3 * k}, r) < drop_transmission({d}, r));
    REQUIRE(rel(drop_transmission({k / 2.0}, r), peak / 2.0) < 1e-9);

    const double sum = drop_transmission({d}, r) + through_transmission({d}, r);
    REQUIRE(drop_transmission({d}, r) <= 1.0);
    REQUIRE(sum <= 1.0 + 1e-12);
    if (r.intrinsic == 0.0)
      REQUIRE(std::abs(sum - 1.0) < 1e-12);
    else
      REQUIRE(sum < 1.0);
  }
}

TEST_CASE("property: HWHM found by bisection equals kappa/2") {
  testing::Gen g(14);
  for (int i = 0; i < 200; ++i) {
    const CouplingRates r = g.rates();
    const double half = drop_transmission({0.0}, r) / 2.0;
    double lo = 0.0;
    double hi = 10.0 * r.total();
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (drop_transmission({mid}, r) > half ? lo : hi) = mid;
    }
    REQUIRE(rel(0.5 * (lo + hi), r.total() / 2.0) < 1e-9);
  }
}

TEST_CASE("geometry: signal mode aligned on the comb") {
  const Resonator res = make_resonator();
  const double nu_sig = wavelength_to_frequency(1550.68e-9);
  CHECK(res.geometry.signal_mode_offset == -6);
  CHECK(res.geometry.fsr_hz == doctest::Approx(49.697e9).epsilon(1e-4));
  CHECK(std::abs(res.geometry.signal_resonance_hz() - nu_sig) < 1.0);
  CHECK(res.geometry.base_resonance_hz == doctest::Approx(193.63e12).epsilon(1e-4));
  CHECK_THROWS_AS(ResonatorGeometry::make(193e12, 0.0, 0), DomainError);
}

TEST_CASE("geometry: nearest mode follows the shifted comb") {
  const Resonator res = make_resonator();
  const auto& g = res.geometry;
  CHECK(g.nearest_mode(g.resonance_hz(3)) == 3);
  CHECK(g.nearest_mode(g.resonance_hz(3) + 0.49 * g.fsr_hz) == 3);
  CHECK(g.nearest_mode(g.resonance_hz(3) + 0.51 * g.fsr_hz) == 4);
  CHECK(g.nearest_mode(g.resonance_hz(0) + 0.3 * g.fsr_hz, 0.3 * g.fsr_hz) == 0);
}

TEST_CASE("wavelength conversions") {
  CHECK(wavelength_offset_to_frequency(34.5e-12, 1548.292e-9) == doctest::Approx(4.3146e9).epsilon(1e-3));
  CHECK(wavelength_offset_to_frequency(400e-12, 1548.292e-9) == doctest::Approx(50.02e9).epsilon(1e-3));
  CHECK(wavelength_offset_to_frequency(0.0, 1548.292e-9) == 0.0);
  CHECK_THROWS_AS(wavelength_to_frequency(0.0), DomainError);

  testing::Gen g(15);
  for (int i = 0; i < 10000; ++i) {
    const double lambda = g.uniform(1400e-9, 1700e-9);
    REQUIRE(std::abs(frequency_to_wavelength(wavelength_to_frequency(lambda)) - lambda) < 0.01e-12);
    const double dl = g.uniform(-1e-9, 1e-9);
    REQUIRE(rel(frequency_offset_to_wavelength(wavelength_offset_to_frequency(dl, lambda), lambda), dl) < 1e-12);
  }
}

TEST_CASE("spectrum: maxima on the comb, periodic, rigid shift") {
  const Resonator res = make_resonator();
  const auto& g = res.geometry;
  std::vector<double> at_modes;
  for (int m = -8; m <= 8; ++m) at_modes.push_back(g.resonance_hz(m));
  for (const auto& p : spectrum(at_modes, res, 0.0))
    CHECK(p.drop == doctest::Approx(peak_drop_transmission(res.rates)).epsilon(1e-9));

  std::vector<double> grid;
  std::vector<double> shifted;
  for (int i = 0; i < 2001; ++i) {
    const double nu = g.base_resonance_hz - 0.5 * g.fsr_hz + i * g.fsr_hz / 2000.0;
    grid.push_back(nu);
    shifted.push_back(nu + g.fsr_hz);
  }
  const auto a = spectrum(grid, res, 0.0);
  const auto b = spectrum(shifted, res, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(std::abs(a[i].drop - b[i].drop) < 1e-9 * a[i].drop + 1e-15);
    REQUIRE(std::abs(a[i].through - b[i].through) < 1e-9);
  }

  // A 34.5 pm blue shift moves every dip by the same amount.
  const double shift = hz_to_rad_s(wavelength_offset_to_frequency(34.5e-12, 1548.292e-9));
  std::vector<double> moved;
  for (int m = -8; m <= 8; ++m) moved.push_back(g.resonance_hz(m) + rad_s_to_hz(shift));
  for (const auto& p : spectrum(moved, res, shift))
    CHECK(p.drop == doctest::Approx(peak_drop_transmission(res.rates)).epsilon(1e-9));

  CHECK_THROWS_AS(spectrum(std::vector<double>{}, res, 0.0), ValidationError);
}

TEST_CASE("spectrum: drop suppression beyond 200 pm stays below -24 dB") {
  const Resonator res = make_resonator();
  const double lb = 1548.292e-9;
  const double peak = peak_drop_transmission(res.rates);
  for (double dl : {-200e-12, 200e-12, -210e-12, 210e-12}) {
    const double nu = wavelength_to_frequency(lb + dl);
    const double t = drop_transmission(res.nearest_detuning(nu, 0.0), res.rates);
    CHECK(ratio_to_db(t / peak) <= -24.0);
  }
}
