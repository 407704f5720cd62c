#pragma once

#include <map>
#include <string>
#include <vector>

#include "qnetsim/circuit.hpp"

namespace qnetsim {

// Full parameter set of the two-node device and its cable channel.
// Qubit keys are Q1A, Q2A, Q3A, Q1B, Q2B, Q3B; Q2A and Q2B are the
// cable-coupled qubits. Coupler keys are A and B.
struct DeviceConfig {
  std::map<std::string, QubitConfig> qubits;
  std::map<std::string, CouplerConfig> couplers;
  ChannelConfig channel;
  WirebondLossModel wirebond;
  double fsr_hz = 0;
  int mode_count = 0;       // M, odd
  int comm_mode_index = 0;  // 1-based, the relay mode
  double comm_freq_hz = 0;
  // Intra-node qubit-qubit couplings, keyed "Q1A-Q2A" style.
  std::map<std::string, double> qubit_qubit_g_hz;
};

// Parse and validate; throws std::runtime_error naming the offending field.
DeviceConfig load_device_config(const std::string& path);
DeviceConfig parse_device_config(const std::string& json_text);

std::string serialize_device_config(const DeviceConfig& cfg);

// Throws on invariant violations (odd mode count, key presence, readout
// fidelity invertibility, positivity).
void validate_device_config(const DeviceConfig& cfg);

// Built-in copy of data/device_default.json.
const std::string& default_device_json();
DeviceConfig default_device();

}  // namespace qnetsim
