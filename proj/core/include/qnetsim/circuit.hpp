#pragma once

#include <string>
#include <vector>

namespace qnetsim {

// Lumped-element models of the cable channel, the tunable coupler, and the
// wirebond loss interface. All quantities SI unless a suffix says otherwise.

struct ChannelConfig {
  double cable_length_m = 0;
  double cable_l_per_m = 0;  // H/m
  double cable_c_per_m = 0;  // F/m
  double cpw_length_m = 0;
  double cpw_l_per_m = 0;
  double cpw_c_per_m = 0;
  std::vector<double> mode_lifetimes_s;
};

struct CouplerConfig {
  double l_g = 0;  // H
  double l_w = 0;
  double l_t = 0;
  double r_g = 0;  // ohm
};

struct QubitConfig {
  double f_max_hz = 0;
  double f_idle_hz = 0;
  double anharmonicity_hz = 0;  // negative
  double t1_s = 0;
  double t_phi_s = 0;
  double l_q = 0;  // H, cable-coupled qubits only
  double readout_f_g = 1.0;
  double readout_f_e = 1.0;
};

struct WirebondLossModel {
  double r_s_ohm = 0;
  double q0 = 0;
};

struct StandingModeParams {
  double l_m;      // H
  double omega_m;  // rad/s
  double c_m;      // F
};

// Half-wave resonance of the full cable+stub line, as a series LC lump.
StandingModeParams standing_mode_params(const ChannelConfig& cfg, double fsr_hz, int m);

// Tunable mutual inductance of the rf-SQUID coupler at flux phase delta.
// The pole at (2L_g+L_w)cos(delta) = -L_T is avoided by keeping cos(delta)
// in the numerator; exactly zero at delta = pi/2.
double coupler_inductance(double delta_rad, const CouplerConfig& cfg);

// Qubit-mode exchange coupling in the harmonic weak-coupling limit.
double qubit_mode_coupling(double m_c, double omega_m, double omega_q, double l_q,
                           double l_g, double l_m);

// Inverse of the two maps above on the monotonic branch delta in [pi/2, pi],
// by bisection to 1e-6 relative.
double coupler_phase_for_coupling(double g_target, const CouplerConfig& cfg,
                                  double omega_m, double omega_q, double l_q,
                                  double l_m);

// Loaded quality factor of a standing mode: wirebond series resistance
// transformed through the cos^2 voltage profile at the stub, in parallel
// with the intrinsic Q_0.
double channel_mode_q(double omega_m, const WirebondLossModel& model, double l_m,
                      const ChannelConfig& cfg);

struct QSample {
  double freq_hz;
  double q_value;
};

struct WirebondFit {
  WirebondLossModel model;
  double residual_rms;  // rms of 1/Q residuals
};

// Linear least squares for (R_s, 1/Q_0) in inverse-Q space.
WirebondFit fit_wirebond_loss(const std::vector<QSample>& samples,
                              const ChannelConfig& cfg, double l_m);

struct CouplerSample {
  double delta_rad;
  double g_hz;
};

struct CouplerFit {
  double l_t;          // H
  double residual_rms;  // rms of g residuals, Hz
};

// One-parameter least squares for L_T given measured g(delta), reusing the
// forward coupler model with the remaining constants fixed.
CouplerFit fit_coupler_l_t(const std::vector<CouplerSample>& samples,
                           const CouplerConfig& base, double omega_m, double omega_q,
                           double l_q, double l_m);

// Qubit T1 loaded by the coupler network: the shunt R_g reflects through the
// mutual M_c(delta) into the qubit branch, adding Re[Z]/(L_g+L_q) to the
// intrinsic relaxation rate.
double qubit_loaded_t1(double delta_rad, const QubitConfig& qubit,
                       const CouplerConfig& coupler, const ChannelConfig& cfg);

}  // namespace qnetsim
