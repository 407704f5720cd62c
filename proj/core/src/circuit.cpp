#include "qnetsim/circuit.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace qnetsim {

namespace {
constexpr double kPi = 3.14159265358979323846;

double mode_inductance(const ChannelConfig& cfg) {
  return 0.5 * (cfg.cable_l_per_m * cfg.cable_length_m +
                2.0 * cfg.cpw_l_per_m * cfg.cpw_length_m);
}
}  // namespace

StandingModeParams standing_mode_params(const ChannelConfig& cfg, double fsr_hz, int m) {
  if (m < 1) throw std::invalid_argument("standing_mode_params: m must be >= 1");
  if (fsr_hz <= 0) throw std::invalid_argument("standing_mode_params: fsr must be positive");
  if (cfg.cable_length_m <= 0 || cfg.cable_l_per_m <= 0 || cfg.cpw_l_per_m <= 0 ||
      cfg.cpw_length_m <= 0)
    throw std::invalid_argument("standing_mode_params: non-positive channel constants");
  StandingModeParams p;
  p.l_m = mode_inductance(cfg);
  p.omega_m = m * 2.0 * kPi * fsr_hz;
  p.c_m = 1.0 / (p.omega_m * p.omega_m * p.l_m);
  return p;
}

double coupler_inductance(double delta_rad, const CouplerConfig& cfg) {
  double c = std::cos(delta_rad);
  // cos(pi/2) is ~6e-17 in doubles; snap the off point to exactly zero.
  if (std::abs(c) < 1e-15) return 0.0;
  return cfg.l_g * cfg.l_g * c / ((2.0 * cfg.l_g + cfg.l_w) * c + cfg.l_t);
}

double qubit_mode_coupling(double m_c, double omega_m, double omega_q, double l_q,
                           double l_g, double l_m) {
  return -(m_c / 2.0) *
         std::sqrt(omega_m * omega_q / ((l_g + l_q) * (l_g + l_m)));
}

double coupler_phase_for_coupling(double g_target, const CouplerConfig& cfg,
                                  double omega_m, double omega_q, double l_q,
                                  double l_m) {
  auto g_of = [&](double delta) {
    return qubit_mode_coupling(coupler_inductance(delta, cfg), omega_m, omega_q, l_q,
                               cfg.l_g, l_m);
  };
  double g_max = g_of(kPi);
  double sign = g_max >= 0 ? 1.0 : -1.0;
  double t = g_target * sign;  // work on the branch where g increases with delta
  double gm = g_max * sign;
  if (t < -1e-30 || t > gm * (1.0 + 1e-12))
    throw std::invalid_argument("coupler_phase_for_coupling: target outside [0, g(pi)]");
  if (t <= 0.0) return kPi / 2.0;
  if (t >= gm) return kPi;
  double lo = kPi / 2.0, hi = kPi;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (g_of(mid) * sign < t)
      lo = mid;
    else
      hi = mid;
    if ((hi - lo) < 1e-15) break;
  }
  return 0.5 * (lo + hi);
}

double channel_mode_q(double omega_m, const WirebondLossModel& model, double l_m,
                      const ChannelConfig& cfg) {
  if (omega_m <= 0 || l_m <= 0 || model.q0 <= 0)
    throw std::invalid_argument("channel_mode_q: non-positive inputs");
  double beta = omega_m * std::sqrt(cfg.cpw_l_per_m * cfg.cpw_c_per_m);
  double c2 = std::cos(beta * cfg.cpw_length_m);
  c2 *= c2;
  if (c2 < 1e-12 || model.r_s_ohm == 0.0) return model.q0;
  double q_loss = omega_m * l_m / (c2 * model.r_s_ohm);
  return 1.0 / (1.0 / q_loss + 1.0 / model.q0);
}

WirebondFit fit_wirebond_loss(const std::vector<QSample>& samples,
                              const ChannelConfig& cfg, double l_m) {
  if (samples.size() < 3)
    throw std::invalid_argument("fit_wirebond_loss: need at least 3 samples");
  // Model: 1/Q_i = R_s * x_i + 1/Q_0 with x_i = cos^2(beta_i l_c)/(omega_i L_m).
  // Plain linear least squares via the 2x2 normal equations.
  double sxx = 0, sx = 0, sxy = 0, sy = 0;
  std::vector<double> xs(samples.size()), ys(samples.size());
  double x0 = 0;
  bool distinct = false;
  for (size_t i = 0; i < samples.size(); ++i) {
    double w = 2.0 * kPi * samples[i].freq_hz;
    if (w <= 0 || samples[i].q_value <= 0)
      throw std::invalid_argument("fit_wirebond_loss: non-positive sample");
    double beta = w * std::sqrt(cfg.cpw_l_per_m * cfg.cpw_c_per_m);
    double c = std::cos(beta * cfg.cpw_length_m);
    double x = c * c / (w * l_m);
    double y = 1.0 / samples[i].q_value;
    xs[i] = x;
    ys[i] = y;
    if (i == 0)
      x0 = x;
    else if (std::abs(x - x0) > 1e-12 * std::abs(x0))
      distinct = true;
    sxx += x * x;
    sx += x;
    sxy += x * y;
    sy += y;
  }
  double n = static_cast<double>(samples.size());
  double det = sxx * n - sx * sx;
  if (!distinct || std::abs(det) < 1e-300)
    throw std::invalid_argument("fit_wirebond_loss: degenerate data (single frequency)");
  double r_s = (sxy * n - sx * sy) / det;
  double inv_q0 = (sxx * sy - sx * sxy) / det;
  if (inv_q0 <= 0)
    throw std::runtime_error("fit_wirebond_loss: fitted Q_0 not positive");
  double ss = 0;
  for (size_t i = 0; i < samples.size(); ++i) {
    double r = r_s * xs[i] + inv_q0 - ys[i];
    ss += r * r;
  }
  WirebondFit fit;
  fit.model.r_s_ohm = r_s;
  fit.model.q0 = 1.0 / inv_q0;
  fit.residual_rms = std::sqrt(ss / n);
  return fit;
}

CouplerFit fit_coupler_l_t(const std::vector<CouplerSample>& samples,
                           const CouplerConfig& base, double omega_m, double omega_q,
                           double l_q, double l_m) {
  if (samples.size() < 2)
    throw std::invalid_argument("fit_coupler_l_t: need at least 2 samples");
  auto sse = [&](double l_t) {
    CouplerConfig c = base;
    c.l_t = l_t;
    double s = 0;
    for (const CouplerSample& smp : samples) {
      double g = qubit_mode_coupling(coupler_inductance(smp.delta_rad, c), omega_m,
                                     omega_q, l_q, c.l_g, l_m) /
                 (2.0 * kPi);
      double r = g - smp.g_hz;
      s += r * r;
    }
    return s;
  };
  // Golden-section search over a generous physical bracket.
  double lo = 1e-12, hi = 5e-9;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
  double fa = sse(a), fb = sse(b);
  for (int i = 0; i < 200; ++i) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - gr * (hi - lo);
      fa = sse(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + gr * (hi - lo);
      fb = sse(b);
    }
    if (hi - lo < 1e-18) break;
  }
  CouplerFit fit;
  fit.l_t = 0.5 * (lo + hi);
  fit.residual_rms = std::sqrt(sse(fit.l_t) / samples.size());
  return fit;
}

double qubit_loaded_t1(double delta_rad, const QubitConfig& qubit,
                       const CouplerConfig& coupler, const ChannelConfig& cfg) {
  double m_c = coupler_inductance(delta_rad, coupler);
  if (m_c == 0.0 || coupler.r_g == 0.0) return qubit.t1_s;
  double w_q = 2.0 * kPi * qubit.f_idle_hz;
  // Loop on the far side of the mutual: shunt resistance in series with the
  // coupler arm and the CPW stub inductance.
  std::complex<double> z_loop(coupler.r_g,
                              w_q * (coupler.l_g + cfg.cpw_l_per_m * cfg.cpw_length_m));
  std::complex<double> z_refl = w_q * w_q * m_c * m_c / z_loop;
  double gamma = z_refl.real() / (coupler.l_g + qubit.l_q);
  return 1.0 / (1.0 / qubit.t1_s + gamma);
}

}  // namespace qnetsim
