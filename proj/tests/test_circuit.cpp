#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "qnetsim/circuit.hpp"
#include "qnetsim/device.hpp"

using namespace qnetsim;

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

ChannelConfig default_channel() {
  ChannelConfig c;
  c.cable_length_m = 1.0;
  c.cable_l_per_m = 240.5e-9;
  c.cable_c_per_m = 96.2e-12;
  c.cpw_length_m = 2e-3;
  c.cpw_l_per_m = 402e-9;
  c.cpw_c_per_m = 173e-12;
  return c;
}

CouplerConfig coupler_a() {
  CouplerConfig c;
  c.l_g = 0.2e-9;
  c.l_w = 0.1e-9;
  c.l_t = 0.62e-9;
  c.r_g = 1.0;
  return c;
}

}  // namespace

TEST_CASE("standing mode inductance is the half-wave lump of cable plus stubs") {
  ChannelConfig ch = default_channel();
  StandingModeParams p = standing_mode_params(ch, 105e6, 55);
  // 0.5 * (240.5 nH + 2 * 402 nH/m * 2 mm) = 121.054 nH
  CHECK(p.l_m == doctest::Approx(121.054e-9).epsilon(1e-12));
  CHECK(p.omega_m == doctest::Approx(kTau * 55 * 105e6).epsilon(1e-14));
  CHECK(p.omega_m / kTau == doctest::Approx(5.775e9).epsilon(1e-13));
  // Series-LC consistency: c_m = 1 / (omega^2 l_m).
  CHECK(p.c_m == doctest::Approx(1.0 / (p.omega_m * p.omega_m * p.l_m)).epsilon(1e-13));

  ChannelConfig ch3 = ch;
  ch3.cpw_length_m = 3e-3;
  CHECK(standing_mode_params(ch3, 105e6, 55).l_m ==
        doctest::Approx(121.456e-9).epsilon(1e-12));

  // l_m does not depend on the harmonic index; c_m falls as 1/m^2.
  StandingModeParams p54 = standing_mode_params(ch, 105e6, 54);
  CHECK(p54.l_m == p.l_m);
  CHECK(p54.c_m / p.c_m == doctest::Approx(55.0 * 55.0 / (54.0 * 54.0)).epsilon(1e-12));

  // Capacitance of the communication-mode lump at its quoted frequency.
  double omega = kTau * 5.798e9;
  CHECK(1.0 / (omega * omega * p.l_m) ==
        doctest::Approx(6.2245032322107656e-15).epsilon(1e-12));
}

TEST_CASE("coupler mutual inductance hits its tabulated extremes") {
  CouplerConfig c = coupler_a();
  // At delta = pi: -L_T^2 / (2 L_g + L_w - L_T) with the given constants
  // reduces to -1/3 nH.
  CHECK(coupler_inductance(M_PI, c) * 1e9 ==
        doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  // At delta = 0 the same expression gives 0.384^2... = 0.04/1.12 nH.
  CHECK(coupler_inductance(0.0, c) * 1e9 ==
        doctest::Approx(0.04 / 1.12).epsilon(1e-12));
  // Exactly zero at pi/2, by construction, not just small.
  CHECK(coupler_inductance(M_PI / 2, c) == 0.0);
}

TEST_CASE("qubit-mode coupling reaches 29.9 MHz at full flux") {
  CouplerConfig c = coupler_a();
  double omega = kTau * 5.798e9;
  double l_q = 8.4e-9;
  double l_m = 121.054e-9;
  double g = qubit_mode_coupling(coupler_inductance(M_PI, c), omega, omega, l_q,
                                 c.l_g, l_m);
  CHECK(std::abs(g) / kTau / 1e6 ==
        doctest::Approx(29.924692602932392).epsilon(1e-9));
  // M_c < 0 at pi flips the sign of -(M_c/2)sqrt(...): g > 0 there, g < 0
  // on the near-zero branch.
  CHECK(g > 0);
  CHECK(qubit_mode_coupling(coupler_inductance(0.0, c), omega, omega, l_q, c.l_g,
                            l_m) < 0);
  // Monotonic on [pi/2, pi].
  double prev = 0;
  for (double d = M_PI / 2; d <= M_PI + 1e-9; d += M_PI / 40) {
    double gd = std::abs(qubit_mode_coupling(coupler_inductance(d, c), omega,
                                             omega, l_q, c.l_g, l_m));
    CHECK(gd >= prev - 1e-12);
    prev = gd;
  }
}

TEST_CASE("phase lookup inverts the coupling curve on the upper branch") {
  CouplerConfig c = coupler_a();
  double omega = kTau * 5.798e9;
  double l_q = 8.4e-9;
  double l_m = 121.054e-9;
  double d = coupler_phase_for_coupling(kTau * 5.5e6, c, omega, omega, l_q, l_m);
  CHECK(d == doctest::Approx(2.1385899621432611).epsilon(1e-9));
  for (double target_mhz : {1.0, 5.5, 12.0, 25.0}) {
    double delta =
        coupler_phase_for_coupling(kTau * target_mhz * 1e6, c, omega, omega, l_q, l_m);
    CHECK(delta >= M_PI / 2);
    CHECK(delta <= M_PI);
    double g = std::abs(qubit_mode_coupling(coupler_inductance(delta, c), omega,
                                            omega, l_q, c.l_g, l_m));
    CHECK(g / kTau / 1e6 == doctest::Approx(target_mhz).epsilon(1e-5));
  }
  // Unreachable target: above the delta = pi maximum.
  CHECK_THROWS(coupler_phase_for_coupling(kTau * 60e6, c, omega, omega, l_q, l_m));
}

TEST_CASE("mode quality factor composes wirebond loss with the intrinsic Q") {
  ChannelConfig ch3 = default_channel();
  ch3.cpw_length_m = 3e-3;
  double l_m = standing_mode_params(ch3, 105e6, 55).l_m;
  WirebondLossModel wb{0.38, 90.9e3};
  double omega = kTau * 5.8e9;

  double q = channel_mode_q(omega, wb, l_m, ch3);
  CHECK(q == doctest::Approx(23149.786364852709).epsilon(1e-10));

  // 1/Q = R_s cos^2(beta l_c) / (omega L_m) + 1/Q_0, checked term by term.
  double beta = omega * std::sqrt(ch3.cpw_l_per_m * ch3.cpw_c_per_m);
  double c2 = std::cos(beta * ch3.cpw_length_m);
  c2 *= c2;
  CHECK(c2 == doctest::Approx(0.37501016308605606).epsilon(1e-12));
  double inv_q = wb.r_s_ohm * c2 / (omega * l_m) + 1.0 / wb.q0;
  CHECK(q == doctest::Approx(1.0 / inv_q).epsilon(1e-12));

  // No interface resistance: the intrinsic Q survives untouched.
  CHECK(channel_mode_q(omega, WirebondLossModel{0.0, 90.9e3}, l_m, ch3) ==
        doctest::Approx(90.9e3).epsilon(1e-12));
  // More resistance, lower Q.
  CHECK(channel_mode_q(omega, WirebondLossModel{0.8, 90.9e3}, l_m, ch3) < q);
}

TEST_CASE("wirebond fit recovers the generating model from noiseless samples") {
  ChannelConfig ch3 = default_channel();
  ch3.cpw_length_m = 3e-3;
  double l_m = standing_mode_params(ch3, 105e6, 55).l_m;
  WirebondLossModel truth{0.41, 8.0e4};
  std::vector<QSample> samples;
  for (double f = 4.2e9; f < 7.4e9; f += 0.105e9)
    samples.push_back({f, channel_mode_q(kTau * f, truth, l_m, ch3)});

  WirebondFit fit = fit_wirebond_loss(samples, ch3, l_m);
  CHECK(fit.model.r_s_ohm == doctest::Approx(0.41).epsilon(1e-6));
  CHECK(fit.model.q0 == doctest::Approx(8.0e4).epsilon(1e-6));
  CHECK(fit.residual_rms < 1e-12);
}

TEST_CASE("coupler fit recovers the tuning inductance from noiseless samples") {
  CouplerConfig truth = coupler_a();
  truth.l_t = 0.7e-9;
  double omega = kTau * 5.798e9;
  double l_q = 8.4e-9;
  double l_m = 121.054e-9;
  std::vector<CouplerSample> samples;
  for (double d = M_PI / 2; d <= M_PI + 1e-9; d += M_PI / 48) {
    double g = std::abs(qubit_mode_coupling(coupler_inductance(d, truth), omega,
                                            omega, l_q, truth.l_g, l_m));
    samples.push_back({d, g / kTau});
  }
  CouplerConfig base = coupler_a();  // starts from the wrong L_T
  CouplerFit fit = fit_coupler_l_t(samples, base, omega, omega, l_q, l_m);
  CHECK(fit.l_t == doctest::Approx(0.7e-9).epsilon(1e-6));
  CHECK(fit.residual_rms < 1.0);  // Hz scale
}

TEST_CASE("loaded qubit T1 reproduces the coupler-on lifetime") {
  DeviceConfig dev = default_device();
  const CouplerConfig& ca = dev.couplers.at("A");
  double omega = kTau * dev.comm_freq_hz;
  double l_q = dev.qubits.at("Q2A").l_q;
  double l_m = standing_mode_params(dev.channel, dev.fsr_hz, 55).l_m;
  double delta = coupler_phase_for_coupling(kTau * 5.5e6, ca, omega, omega, l_q, l_m);

  // Operated at the communication-mode frequency.
  QubitConfig q_on_res = dev.qubits.at("Q2A");
  q_on_res.f_idle_hz = dev.comm_freq_hz;
  CHECK(qubit_loaded_t1(delta, q_on_res, ca, dev.channel) * 1e6 ==
        doctest::Approx(1.7376088099925118).epsilon(1e-9));

  // At the tabulated idle frequency.
  CHECK(qubit_loaded_t1(delta, dev.qubits.at("Q2A"), ca, dev.channel) * 1e6 ==
        doctest::Approx(1.7375850205823353).epsilon(1e-9));

  // Coupler off (delta = pi/2, M_c = 0): intrinsic lifetime, exactly.
  CHECK(qubit_loaded_t1(M_PI / 2, dev.qubits.at("Q2A"), ca, dev.channel) ==
        doctest::Approx(dev.qubits.at("Q2A").t1_s).epsilon(1e-12));

  // Stronger coupling loads harder.
  CHECK(qubit_loaded_t1(M_PI, dev.qubits.at("Q2A"), ca, dev.channel) <
        qubit_loaded_t1(delta, dev.qubits.at("Q2A"), ca, dev.channel));
}
