#include "qnetsim/device.hpp"

namespace qnetsim {

// Byte-for-byte copy of data/device_default.json.
const std::string& default_device_json() {
  static const std::string text = R"JSON({
  "qubits": {
    "Q1A": {
      "f_max_ghz": 6.04,
      "f_idle_ghz": 5.505,
      "anharmonicity_ghz": -0.23,
      "t1_us": 12,
      "t_phi_us": 3.4,
      "readout_fidelity_g": 0.982,
      "readout_fidelity_e": 0.944
    },
    "Q2A": {
      "f_max_ghz": 6.14,
      "f_idle_ghz": 5.87,
      "anharmonicity_ghz": -0.15,
      "t1_us": 7,
      "t_phi_us": 3.8,
      "readout_fidelity_g": 0.981,
      "readout_fidelity_e": 0.935,
      "l_q_nh": 8.4
    },
    "Q3A": {
      "f_max_ghz": 6.03,
      "f_idle_ghz": 5.4882,
      "anharmonicity_ghz": -0.23,
      "t1_us": 7,
      "t_phi_us": 3.8,
      "readout_fidelity_g": 0.985,
      "readout_fidelity_e": 0.942
    },
    "Q1B": {
      "f_max_ghz": 6.08,
      "f_idle_ghz": 5.4655,
      "anharmonicity_ghz": -0.23,
      "t1_us": 29,
      "t_phi_us": 4.2,
      "readout_fidelity_g": 0.995,
      "readout_fidelity_e": 0.955
    },
    "Q2B": {
      "f_max_ghz": 6.25,
      "f_idle_ghz": 5.895,
      "anharmonicity_ghz": -0.16,
      "t1_us": 11,
      "t_phi_us": 4.4,
      "readout_fidelity_g": 0.973,
      "readout_fidelity_e": 0.947,
      "l_q_nh": 8.4
    },
    "Q3B": {
      "f_max_ghz": 6.16,
      "f_idle_ghz": 5.4835,
      "anharmonicity_ghz": -0.23,
      "t1_us": 20,
      "t_phi_us": 2.9,
      "readout_fidelity_g": 0.984,
      "readout_fidelity_e": 0.953
    }
  },
  "couplers": {
    "A": {
      "l_g_nh": 0.2,
      "l_w_nh": 0.1,
      "l_t_nh": 0.62,
      "r_g_ohm": 1.0
    },
    "B": {
      "l_g_nh": 0.2,
      "l_w_nh": 0.1,
      "l_t_nh": 0.625,
      "r_g_ohm": 1.13
    }
  },
  "channel": {
    "cable_length_m": 1.0,
    "cable_l_nh_per_m": 240.5,
    "cable_c_pf_per_m": 96.2,
    "cpw_length_mm": 2.0,
    "cpw_l_nh_per_m": 402.0,
    "cpw_c_pf_per_m": 173.0,
    "mode_t1_ns": [256, 177, 473, 200, 370]
  },
  "wirebond": {
    "r_s_ohm": 0.38,
    "q0": 90900.0
  },
  "fsr_mhz": 105.0,
  "mode_count": 5,
  "comm_mode_index": 3,
  "comm_freq_ghz": 5.798,
  "qubit_qubit_g_mhz": {
    "Q1A-Q2A": 16.7,
    "Q3A-Q2A": 16.7,
    "Q1B-Q2B": 16.7,
    "Q3B-Q2B": 16.7
  }
}
)JSON";
  return text;
}

}  // namespace qnetsim
