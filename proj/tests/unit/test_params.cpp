#include <doctest.h>

#include <cmath>

#include "qdswitch/params.hpp"

using namespace qdswitch;
using doctest::Approx;

namespace {
// Photon flux (photons/ns) carried by power P at wavelength lambda.
double flux_oracle(double watts, double lambda_m) {
  const double h = 6.62607015e-34;
  const double c = 299792458.0;
  return watts / (h * c / lambda_m) * 1e-9;
}
}  // namespace

TEST_CASE("ordinary_to_angular is 2 pi f") {
  CHECK(ordinary_to_angular(0.0) == 0.0);
  CHECK(ordinary_to_angular(13.4) == Approx(84.19468311).epsilon(1e-10));
  CHECK(ordinary_to_angular(28.0) == Approx(175.92918860).epsilon(1e-10));
  CHECK(ordinary_to_angular(-1.0) == Approx(-2.0 * std::acos(-1.0)));
}

TEST_CASE("default device parameters") {
  const DeviceParams p = paper_defaults();
  CHECK(p.g == 13.4);
  CHECK(p.kappa == 28.0);
  CHECK(p.kappa_par == 2.9);
  CHECK(p.gamma == 5.8);
  CHECK(p.gamma_d == 0.0);
  CHECK(p.eta == 1.4e-3);
  CHECK(p.strong_coupling());
  // 13.4 > |28 - 5.8| / 4 = 5.55
  CHECK(std::abs(p.kappa - p.gamma) / 4.0 == Approx(5.55));
  CHECK_NOTHROW(p.validate());
  // quality factor nu / kappa near 11900 at 900 nm
  CHECK(p.omega_cav * 1e3 / p.kappa == Approx(11897.0).epsilon(1e-3));
}

TEST_CASE("device parameter invariants are enforced") {
  DeviceParams p;
  SUBCASE("negative rate") {
    p.gamma = -1.0;
    CHECK_THROWS_AS(p.validate(), ParameterError);
  }
  SUBCASE("in-plane coupling above half the total decay") {
    p.kappa_par = 14.5;
    CHECK_THROWS_AS(p.validate(), ParameterError);
  }
  SUBCASE("eta out of range") {
    p.eta = 0.0;
    CHECK_THROWS_AS(p.validate(), ParameterError);
    p.eta = 1.5;
    CHECK_THROWS_AS(p.validate(), ParameterError);
  }
  SUBCASE("weak coupling is detectable") {
    p.g = 5.0;
    CHECK_FALSE(p.strong_coupling());
  }
}

TEST_CASE("incident_to_waveguide_power") {
  CHECK(incident_to_waveguide_power(14.5e-6, 1.4e-3) == Approx(20.3e-9).epsilon(1e-12));
  CHECK(incident_to_waveguide_power(0.0, 0.3) == 0.0);
  CHECK(incident_to_waveguide_power(1.0, 1.0) == 1.0);
  CHECK_THROWS_AS(incident_to_waveguide_power(1.0, 0.0), ParameterError);
  CHECK_THROWS_AS(incident_to_waveguide_power(1.0, 1.01), ParameterError);
  CHECK_THROWS_AS(incident_to_waveguide_power(-1.0, 0.5), ParameterError);

  // linear in p_inc
  const double a = incident_to_waveguide_power(3e-6, 0.2);
  const double b = incident_to_waveguide_power(7e-6, 0.2);
  CHECK(a + b == Approx(incident_to_waveguide_power(10e-6, 0.2)).epsilon(1e-14));
}

TEST_CASE("power_to_drive_amplitude squares to photon flux") {
  const double nu = wavelength_to_thz(900e-9);
  CHECK(power_to_drive_amplitude(0.0, nu) == 0.0);
  const double eps = power_to_drive_amplitude(1e-9, nu);
  CHECK(eps * eps == Approx(flux_oracle(1e-9, 900e-9)).epsilon(1e-12));
  CHECK(eps * eps == Approx(4.53).epsilon(2e-3));

  for (double watts : {1e-12, 3.3e-9, 2e-6, 0.7}) {
    const double back = drive_amplitude_to_power(power_to_drive_amplitude(watts, nu), nu);
    CHECK(back == Approx(watts).epsilon(1e-12));
    const double e = power_to_drive_amplitude(watts, nu);
    CHECK(e * e == Approx(flux_oracle(watts, 900e-9)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(power_to_drive_amplitude(-1e-9, nu), ParameterError);
}

TEST_CASE("pulse energy bookkeeping uses E = P_wg / R") {
  const DriveSpec d = pulse_with_energy(14.0, 0.0, 80.0, 0.0, 76.3);
  CHECK(d.pulse_energy_aj(1.4e-3) == Approx(14.0).epsilon(1e-12));
  CHECK(d.waveguide_power(1.4e-3) == Approx(14e-18 * 76.3e6).epsilon(1e-12));

  DriveSpec inc;
  inc.power = IncidentPower{1e-6};
  inc.envelope = GaussianEnvelope{80.0, 0.0};
  CHECK(inc.pulse_energy_aj(1.4e-3) == Approx(1e-6 * 1.4e-3 / 76.3e6 * 1e18).epsilon(1e-12));

  DriveSpec cw;
  CHECK_THROWS_AS((void)cw.pulse_energy_aj(0.5), ParameterError);
}

TEST_CASE("gaussian envelope and peak flux") {
  const double fwhm = 80.0;
  const double tau = gaussian_effective_duration_ns(fwhm);
  // integral of exp(-4 ln2 t^2 / w^2)
  CHECK(tau == Approx(0.08 * std::sqrt(std::acos(-1.0) / (4.0 * std::log(2.0)))).epsilon(1e-14));

  DriveSpec d = pulse_with_energy(10.0, 0.0, fwhm, 100.0, 76.3);
  CHECK(d.amplitude_envelope(0.1) == Approx(1.0));
  // intensity at the half-maximum point
  const double a = d.amplitude_envelope(0.1 + 0.04);
  CHECK(a * a == Approx(0.5).epsilon(1e-12));

  DeviceParams p;
  const double photons = 10e-18 / photon_energy(p.omega_cav);
  CHECK(d.peak_flux(p) * tau == Approx(photons).epsilon(1e-12));

  GaussianEnvelope bad{0.0, 0.0};
  d.envelope = bad;
  CHECK_THROWS_AS(d.validate(), ParameterError);
}

TEST_CASE("temperature_to_detunings") {
  const DeviceParams base;
  const TuningModel m;

  SUBCASE("resonance at t_resonance") {
    const DeviceParams at = temperature_to_detunings(39.0, m, base);
    CHECK(at.qd_cavity_detuning() == Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("55 GHz red of the cavity at 45 K") {
    const TuningModel cal = TuningModel::calibrated(39.0, 45.0, -55.0, 2.0);
    const DeviceParams at = temperature_to_detunings(45.0, cal, base);
    CHECK(at.qd_cavity_detuning() == Approx(-55.0).epsilon(1e-6));
    CHECK(m.detuning(45.0) == Approx(-55.0).epsilon(1e-12));
  }
  SUBCASE("equal slopes keep the detuning fixed") {
    TuningModel same = m;
    same.qd_slope = same.cav_slope;
    const double d0 = temperature_to_detunings(10.0, same, base).qd_cavity_detuning();
    const double d1 = temperature_to_detunings(70.0, same, base).qd_cavity_detuning();
    CHECK(d0 == Approx(0.0).epsilon(1e-9));
    CHECK(d1 == Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("affine in temperature") {
    const double d1 = temperature_to_detunings(20.0, m, base).qd_cavity_detuning();
    const double d2 = temperature_to_detunings(30.0, m, base).qd_cavity_detuning();
    const double d3 = temperature_to_detunings(40.0, m, base).qd_cavity_detuning();
    CHECK(d1 + d3 == Approx(2.0 * d2).epsilon(1e-9));
  }
  SUBCASE("both lines red shift") {
    const DeviceParams warm = temperature_to_detunings(60.0, m, base);
    CHECK(warm.omega_cav < base.omega_cav);
    CHECK(warm.omega_qd < warm.omega_cav);
  }
  SUBCASE("out of range") {
    CHECK_THROWS_AS(temperature_to_detunings(2.0, m, base), ParameterError);
    CHECK_THROWS_AS(temperature_to_detunings(81.0, m, base), ParameterError);
  }
}
