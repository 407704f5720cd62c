#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qnetsim/device.hpp"
#include "qnetsim/hilbert.hpp"

namespace qnetsim {

// One piecewise-constant control segment. Detunings are relative to the
// rotating-frame center (the communication mode). Coupler g_a attaches the
// site labeled Q2A to every mode uniformly; g_b attaches Q2B with the
// alternating sign (-1)^m. Intra-node exchange couplings are keyed "Qx-Qy".
struct ControlFrame {
  double duration_s = 0;
  std::map<std::string, double> detunings_rad;
  double g_a_rad = 0;
  double g_b_rad = 0;
  std::map<std::string, double> pair_g_rad;
};

// Ideal instantaneous rotation exp(-i angle/2 sigma_axis) on one site.
// On 3-level sites x and y act on the {g,e} block; z advances level n by
// phase exp(i n angle).
struct InstantGate {
  std::string site;
  char axis = 'x';  // 'x', 'y' or 'z'
  double angle_rad = 0;
};

struct PulseSchedule {
  std::vector<std::variant<ControlFrame, InstantGate>> items;
};

std::string schedule_to_json(const PulseSchedule& schedule);
PulseSchedule schedule_from_json(const std::string& text);

// Site-keyed replacement decoherence times; unset fields fall back to the
// device table. An infinite value disables that decay channel.
struct DecoherenceOverride {
  std::optional<double> t1_s;
  std::optional<double> t_phi_s;
};
using DecoherenceOverrides = std::map<std::string, DecoherenceOverride>;

// Rotating-frame Hamiltonian of one control frame (rad/s units, exactly
// Hermitian by construction). Mode sites must be labeled M1..Mm with m odd
// in total; the ladder is centered on the middle mode.
Mat build_hamiltonian(const HilbertSpace& space, const ControlFrame& frame,
                      const DeviceConfig& device);

// Relaxation, dephasing and mode decay operators for every site.
std::vector<Mat> collapse_operators(const DeviceConfig& device, const HilbertSpace& space,
                                    const DecoherenceOverrides& overrides = {});

struct EvolveOptions {
  double dt_max_s = 1e-10;
  int sample_stride = 10;
  bool keep_states = false;
  bool lossless = false;
  DecoherenceOverrides overrides;
};

struct Trajectory {
  HilbertSpace space;
  std::vector<double> times_s;
  // populations[i] is the <n> series of space.site(i), one entry per time.
  std::vector<std::vector<double>> populations;
  std::vector<Mat> states;  // filled only when keep_states
  Mat final_state;
  double max_trace_drift = 0;
};

// Fixed-step RK4 Lindblad integration over the schedule. Step size is
// min(dt_max, 0.02/|H|_max, frame_duration/10). Each frame is evolved on
// the excitation-number sector reachable from the current state when the
// Hamiltonian and collapse operators permit, which keeps the working
// dimension small for single-excitation protocols.
Trajectory evolve_master_equation(const Mat& rho0, const PulseSchedule& schedule,
                                  const DeviceConfig& device, const HilbertSpace& space,
                                  const EvolveOptions& opts = {});

std::vector<double> excitation_populations(const Trajectory& traj,
                                           const std::string& site);

}  // namespace qnetsim
