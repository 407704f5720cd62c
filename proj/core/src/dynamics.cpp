#include "qnetsim/dynamics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace qnetsim {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

bool is_mode_label(const std::string& label, int* index) {
  if (label.size() < 2 || label[0] != 'M') return false;
  for (size_t i = 1; i < label.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(label[i]))) return false;
  if (index) *index = std::stoi(label.substr(1));
  return true;
}

Mat lowering(int d) {
  Mat a = Mat::Zero(d, d);
  for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Mat number_op(int d) {
  Mat n = Mat::Zero(d, d);
  for (int k = 0; k < d; ++k) n(k, k) = k;
  return n;
}

Mat gate_unitary(int d, char axis, double angle) {
  double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
  Mat u = Mat::Identity(d, d);
  switch (axis) {
    case 'x':
      u(0, 0) = c;
      u(0, 1) = cplx(0, -s);
      u(1, 0) = cplx(0, -s);
      u(1, 1) = c;
      break;
    case 'y':
      u(0, 0) = c;
      u(0, 1) = -s;
      u(1, 0) = s;
      u(1, 1) = c;
      break;
    case 'z':
      for (int n = 0; n < d; ++n) u(n, n) = std::exp(cplx(0, n * angle));
      break;
    default:
      throw std::invalid_argument("InstantGate: axis must be x, y or z");
  }
  return u;
}

void validate_gate(const InstantGate& g) {
  if (g.angle_rad <= -kTwoPi || g.angle_rad > kTwoPi)
    throw std::invalid_argument("InstantGate: angle must lie in (-2pi, 2pi]");
  if (g.axis != 'x' && g.axis != 'y' && g.axis != 'z')
    throw std::invalid_argument("InstantGate: axis must be x, y or z");
}

std::pair<std::string, std::string> split_pair_key(const std::string& key) {
  auto dash = key.find('-');
  if (dash == std::string::npos || dash == 0 || dash + 1 >= key.size())
    throw std::invalid_argument("coupling pair key must be Qx-Qy: " + key);
  return {key.substr(0, dash), key.substr(dash + 1)};
}

// Lindblad right-hand side with precomputed c and c^dag c.
struct LindbladRHS {
  Mat h;
  std::vector<Mat> cs;
  std::vector<Mat> cdcs;

  Mat operator()(const Mat& rho) const {
    Mat out = cplx(0, -1) * (h * rho - rho * h);
    for (size_t k = 0; k < cs.size(); ++k) {
      out.noalias() += cs[k] * rho * cs[k].adjoint();
      out.noalias() -= 0.5 * (cdcs[k] * rho + rho * cdcs[k]);
    }
    return out;
  }
};

void rk4_step(const LindbladRHS& f, Mat& rho, double dt) {
  Mat k1 = f(rho);
  Mat k2 = f(rho + (0.5 * dt) * k1);
  Mat k3 = f(rho + (0.5 * dt) * k2);
  Mat k4 = f(rho + dt * k3);
  rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::vector<int> excitation_index(const HilbertSpace& space) {
  std::vector<int> nsum(space.dim(), 0);
  for (int idx = 0; idx < space.dim(); ++idx) {
    int s = 0;
    for (int i = 0; i < space.num_sites(); ++i) s += space.level_of(idx, i);
    nsum[idx] = s;
  }
  return nsum;
}

bool sector_preserving(const Mat& m, const std::vector<int>& nsum) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (m(i, j) != cplx(0, 0) && nsum[i] != nsum[j]) return false;
  return true;
}

// True when every nonzero element of c drops the excitation number by the
// same k in {0, 1}.
bool sector_lowering(const Mat& c, const std::vector<int>& nsum) {
  int drop = -1;
  for (int i = 0; i < c.rows(); ++i)
    for (int j = 0; j < c.cols(); ++j) {
      if (c(i, j) == cplx(0, 0)) continue;
      int k = nsum[j] - nsum[i];
      if (k != 0 && k != 1) return false;
      if (drop == -1)
        drop = k;
      else if (drop != k)
        return false;
    }
  return true;
}

}  // namespace

Mat build_hamiltonian(const HilbertSpace& space, const ControlFrame& frame,
                      const DeviceConfig& device) {
  int dim = space.dim();
  Mat h = Mat::Zero(dim, dim);

  // Collect mode sites and check the ladder is well formed.
  int mode_count = 0;
  for (int i = 0; i < space.num_sites(); ++i) {
    int m;
    if (is_mode_label(space.site(i).label, &m)) {
      ++mode_count;
      if (m < 1) throw std::invalid_argument("mode labels start at M1");
    }
  }
  if (mode_count > 0 && mode_count % 2 == 0)
    throw std::invalid_argument("build_hamiltonian: mode count must be odd");
  double center = (mode_count + 1) / 2.0;

  // Diagonal part: qubit detunings, anharmonicity, mode ladder.
  for (int i = 0; i < space.num_sites(); ++i) {
    const Site& s = space.site(i);
    int m = 0;
    if (is_mode_label(s.label, &m)) {
      double w = (m - center) * kTwoPi * device.fsr_hz;
      if (w != 0.0) h += w * embed_operator(space, s.label, number_op(s.dim));
      auto it = frame.detunings_rad.find(s.label);
      if (it != frame.detunings_rad.end() && it->second != 0.0)
        h += it->second * embed_operator(space, s.label, number_op(s.dim));
      continue;
    }
    auto it = frame.detunings_rad.find(s.label);
    double dw = it != frame.detunings_rad.end() ? it->second : 0.0;
    if (dw != 0.0) h += dw * embed_operator(space, s.label, number_op(s.dim));
    if (s.dim == 3) {
      auto q = device.qubits.find(s.label);
      if (q == device.qubits.end())
        throw std::invalid_argument("build_hamiltonian: no anharmonicity for 3-level site " +
                                    s.label);
      double eta = kTwoPi * q->second.anharmonicity_hz;
      Mat nn = Mat::Zero(s.dim, s.dim);
      for (int n = 0; n < s.dim; ++n) nn(n, n) = 0.5 * eta * n * (n - 1);
      h += embed_operator(space, s.label, nn);
    }
  }

  // Coupler terms: Q2A uniform sign, Q2B alternating (-1)^m.
  auto add_exchange = [&](const std::string& a, const std::string& b, double g) {
    if (g == 0.0) return;
    Mat term = embed_operator(space, a, lowering(space.site(a).dim)) *
               embed_operator(space, b, lowering(space.site(b).dim)).adjoint();
    h += g * (term + term.adjoint());
  };
  for (int i = 0; i < space.num_sites(); ++i) {
    int m = 0;
    if (!is_mode_label(space.site(i).label, &m)) continue;
    if (frame.g_a_rad != 0.0 && space.has_site("Q2A"))
      add_exchange("Q2A", space.site(i).label, frame.g_a_rad);
    if (frame.g_b_rad != 0.0 && space.has_site("Q2B"))
      add_exchange("Q2B", space.site(i).label, (m % 2 == 1 ? -1.0 : 1.0) * frame.g_b_rad);
  }

  for (const auto& [key, g] : frame.pair_g_rad) {
    auto [a, b] = split_pair_key(key);
    add_exchange(a, b, g);
  }
  return h;
}

std::vector<Mat> collapse_operators(const DeviceConfig& device, const HilbertSpace& space,
                                    const DecoherenceOverrides& overrides) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<Mat> ops;
  for (int i = 0; i < space.num_sites(); ++i) {
    const Site& s = space.site(i);
    auto ov = overrides.find(s.label);
    int m = 0;
    if (is_mode_label(s.label, &m)) {
      double t1 = 0;
      if (ov != overrides.end() && ov->second.t1_s)
        t1 = *ov->second.t1_s;
      else if (m >= 1 && m <= static_cast<int>(device.channel.mode_lifetimes_s.size()))
        t1 = device.channel.mode_lifetimes_s[m - 1];
      else
        throw std::invalid_argument("collapse_operators: no lifetime for " + s.label);
      if (t1 != kInf)
        ops.push_back(std::sqrt(1.0 / t1) * embed_operator(space, s.label, lowering(s.dim)));
      continue;
    }
    auto q = device.qubits.find(s.label);
    double t1 = 0, tphi = 0;
    if (ov != overrides.end() && ov->second.t1_s)
      t1 = *ov->second.t1_s;
    else if (q != device.qubits.end())
      t1 = q->second.t1_s;
    else
      throw std::invalid_argument("collapse_operators: no T1 for site " + s.label);
    if (ov != overrides.end() && ov->second.t_phi_s)
      tphi = *ov->second.t_phi_s;
    else if (q != device.qubits.end())
      tphi = q->second.t_phi_s;
    else
      throw std::invalid_argument("collapse_operators: no T_phi for site " + s.label);

    if (t1 != kInf) {
      for (int n = 1; n < s.dim; ++n) {
        Mat c = Mat::Zero(s.dim, s.dim);
        c(n - 1, n) = std::sqrt(static_cast<double>(n) / t1);
        ops.push_back(embed_operator(space, s.label, c));
      }
    }
    if (tphi != kInf) {
      Mat z = Mat::Zero(s.dim, s.dim);
      if (s.dim == 2) {
        z(0, 0) = 1.0;
        z(1, 1) = -1.0;
      } else {
        for (int n = 0; n < s.dim; ++n) z(n, n) = 2.0 * n;
      }
      ops.push_back(std::sqrt(1.0 / (2.0 * tphi)) * embed_operator(space, s.label, z));
    }
  }
  return ops;
}

Trajectory evolve_master_equation(const Mat& rho0, const PulseSchedule& schedule,
                                  const DeviceConfig& device, const HilbertSpace& space,
                                  const EvolveOptions& opts) {
  if (schedule.items.empty())
    throw std::invalid_argument("evolve_master_equation: empty schedule");
  if (rho0.rows() != space.dim() || rho0.cols() != space.dim())
    throw std::invalid_argument("evolve_master_equation: state dimension mismatch");
  {
    // Physicality gate on entry; tolerances as for DensityMatrix.
    double herm = (rho0 - rho0.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-10)
      throw std::invalid_argument("evolve_master_equation: rho0 not Hermitian");
    if (std::abs(rho0.trace().real() - 1.0) > 1e-8)
      throw std::invalid_argument("evolve_master_equation: rho0 trace not 1");
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho0 + rho0.adjoint()),
                                          Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8)
      throw std::invalid_argument("evolve_master_equation: rho0 not PSD");
  }

  Trajectory traj;
  traj.space = space;
  traj.populations.assign(space.num_sites(), {});

  Mat rho = rho0;
  double t_global = 0;
  std::vector<int> nsum = excitation_index(space);

  auto sample_full = [&](double t) {
    traj.times_s.push_back(t);
    for (int i = 0; i < space.num_sites(); ++i) {
      double p = 0;
      for (int idx = 0; idx < space.dim(); ++idx)
        p += space.level_of(idx, i) * rho(idx, idx).real();
      traj.populations[i].push_back(p);
    }
    if (opts.keep_states) traj.states.push_back(rho);
    traj.max_trace_drift =
        std::max(traj.max_trace_drift, std::abs(rho.trace().real() - 1.0));
  };

  sample_full(0.0);

  for (const auto& item : schedule.items) {
    if (std::holds_alternative<InstantGate>(item)) {
      const InstantGate& g = std::get<InstantGate>(item);
      validate_gate(g);
      Mat u = embed_operator(space, g.site,
                             gate_unitary(space.site(g.site).dim, g.axis, g.angle_rad));
      rho = u * rho * u.adjoint();
      continue;
    }

    const ControlFrame& frame = std::get<ControlFrame>(item);
    if (frame.duration_s <= 0)
      throw std::invalid_argument("evolve_master_equation: frame duration must be positive");
    Mat h = build_hamiltonian(space, frame, device);
    std::vector<Mat> cs =
        opts.lossless ? std::vector<Mat>{} : collapse_operators(device, space, opts.overrides);

    double hmax = h.cwiseAbs().maxCoeff();
    double dt = std::min(opts.dt_max_s, frame.duration_s / 10.0);
    if (hmax > 0) dt = std::min(dt, 0.02 / hmax);
    int nsteps = static_cast<int>(std::ceil(frame.duration_s / dt - 1e-12));
    dt = frame.duration_s / nsteps;

    // Try to restrict to the reachable excitation sectors.
    bool restrict_ok = sector_preserving(h, nsum);
    for (const Mat& c : cs) restrict_ok = restrict_ok && sector_lowering(c, nsum);
    std::vector<int> keep;
    if (restrict_ok) {
      int n_max = 0;
      for (int i = 0; i < space.dim(); ++i) {
        bool occupied = false;
        for (int j = 0; j < space.dim() && !occupied; ++j)
          occupied = std::abs(rho(i, j)) > 1e-14;
        if (occupied) n_max = std::max(n_max, nsum[i]);
      }
      for (int i = 0; i < space.dim(); ++i)
        if (nsum[i] <= n_max) keep.push_back(i);
      if (static_cast<int>(keep.size()) == space.dim()) keep.clear();
    }

    LindbladRHS rhs;
    Mat work;  // restricted or full working state
    std::vector<std::vector<double>> site_weight;  // per site, per working index
    if (!keep.empty()) {
      int k = static_cast<int>(keep.size());
      rhs.h = Mat(k, k);
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) rhs.h(r, c) = h(keep[r], keep[c]);
      for (const Mat& cop : cs) {
        Mat cr(k, k);
        for (int r = 0; r < k; ++r)
          for (int c = 0; c < k; ++c) cr(r, c) = cop(keep[r], keep[c]);
        rhs.cs.push_back(cr);
        rhs.cdcs.push_back(cr.adjoint() * cr);
      }
      work = Mat(k, k);
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) work(r, c) = rho(keep[r], keep[c]);
      site_weight.assign(space.num_sites(), std::vector<double>(k));
      for (int i = 0; i < space.num_sites(); ++i)
        for (int r = 0; r < k; ++r) site_weight[i][r] = space.level_of(keep[r], i);
    } else {
      rhs.h = h;
      for (const Mat& cop : cs) {
        rhs.cs.push_back(cop);
        rhs.cdcs.push_back(cop.adjoint() * cop);
      }
      work = rho;
      site_weight.assign(space.num_sites(), std::vector<double>(space.dim()));
      for (int i = 0; i < space.num_sites(); ++i)
        for (int idx = 0; idx < space.dim(); ++idx)
          site_weight[i][idx] = space.level_of(idx, i);
    }

    auto writeback = [&]() {
      if (keep.empty()) {
        rho = work;
      } else {
        rho.setZero();
        for (size_t r = 0; r < keep.size(); ++r)
          for (size_t c = 0; c < keep.size(); ++c)
            rho(keep[r], keep[c]) = work(r, c);
      }
    };

    auto sample_work = [&](double t) {
      traj.times_s.push_back(t);
      for (int i = 0; i < space.num_sites(); ++i) {
        double p = 0;
        for (int idx = 0; idx < work.rows(); ++idx)
          p += site_weight[i][idx] * work(idx, idx).real();
        traj.populations[i].push_back(p);
      }
      if (opts.keep_states) {
        writeback();
        traj.states.push_back(rho);
      }
      traj.max_trace_drift =
          std::max(traj.max_trace_drift, std::abs(work.trace().real() - 1.0));
    };

    for (int step = 1; step <= nsteps; ++step) {
      rk4_step(rhs, work, dt);
      if (step == nsteps || (opts.sample_stride > 0 && step % opts.sample_stride == 0))
        sample_work(t_global + step * dt);
    }
    writeback();
    t_global += frame.duration_s;

    double drift = std::abs(rho.trace().real() - 1.0);
    if (drift > 1e-5)
      throw std::runtime_error("evolve_master_equation: trace drift " + std::to_string(drift) +
                               " exceeds 1e-5 at step size " + std::to_string(dt) + " s");
  }

  traj.final_state = rho;
  return traj;
}

std::vector<double> excitation_populations(const Trajectory& traj,
                                           const std::string& site) {
  return traj.populations.at(traj.space.site_index(site));
}

std::string schedule_to_json(const PulseSchedule& schedule) {
  nlohmann::json j;
  j["schema"] = "qnetsim-schedule-v1";
  nlohmann::json items = nlohmann::json::array();
  for (const auto& item : schedule.items) {
    nlohmann::json ji;
    if (std::holds_alternative<ControlFrame>(item)) {
      const ControlFrame& f = std::get<ControlFrame>(item);
      ji["type"] = "frame";
      ji["duration_ns"] = f.duration_s * 1e9;
      nlohmann::json det = nlohmann::json::object();
      for (const auto& [site, dw] : f.detunings_rad) det[site] = dw / (kTwoPi * 1e6);
      ji["detunings"] = det;
      nlohmann::json cpl = nlohmann::json::object();
      cpl["gA"] = f.g_a_rad / (kTwoPi * 1e6);
      cpl["gB"] = f.g_b_rad / (kTwoPi * 1e6);
      for (const auto& [key, g] : f.pair_g_rad) cpl[key] = g / (kTwoPi * 1e6);
      ji["couplings"] = cpl;
    } else {
      const InstantGate& g = std::get<InstantGate>(item);
      ji["type"] = "gate";
      ji["site"] = g.site;
      ji["axis"] = std::string(1, g.axis);
      ji["angle_rad"] = g.angle_rad;
    }
    items.push_back(ji);
  }
  j["items"] = items;
  return j.dump(2) + "\n";
}

PulseSchedule schedule_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("schedule: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("items") || !j["items"].is_array())
    throw std::runtime_error("schedule: expected object with items array");
  if (j.value("schema", "") != "qnetsim-schedule-v1")
    throw std::runtime_error("schedule: unsupported schema version");
  PulseSchedule s;
  for (const auto& ji : j["items"]) {
    std::string type = ji.value("type", "");
    if (type == "frame") {
      ControlFrame f;
      f.duration_s = ji.at("duration_ns").get<double>() * 1e-9;
      if (ji.contains("detunings"))
        for (auto it = ji["detunings"].begin(); it != ji["detunings"].end(); ++it)
          f.detunings_rad[it.key()] = it.value().get<double>() * kTwoPi * 1e6;
      if (ji.contains("couplings")) {
        for (auto it = ji["couplings"].begin(); it != ji["couplings"].end(); ++it) {
          double g = it.value().get<double>() * kTwoPi * 1e6;
          if (it.key() == "gA")
            f.g_a_rad = g;
          else if (it.key() == "gB")
            f.g_b_rad = g;
          else
            f.pair_g_rad[it.key()] = g;
        }
      }
      s.items.emplace_back(f);
    } else if (type == "gate") {
      InstantGate g;
      g.site = ji.at("site").get<std::string>();
      std::string axis = ji.at("axis").get<std::string>();
      if (axis.size() != 1) throw std::runtime_error("schedule: bad axis");
      g.axis = axis[0];
      g.angle_rad = ji.at("angle_rad").get<double>();
      validate_gate(g);
      s.items.emplace_back(g);
    } else {
      throw std::runtime_error("schedule: item type must be frame or gate");
    }
  }
  if (s.items.empty()) throw std::runtime_error("schedule: at least one item required");
  return s;
}

}  // namespace qnetsim
