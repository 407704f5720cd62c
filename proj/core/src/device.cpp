#include "qnetsim/device.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace qnetsim {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw std::runtime_error("device config: " + path + ": " + why);
}

const json& member(const json& j, const std::string& key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) fail(path + "/" + key, "missing");
  return *it;
}

double num(const json& j, const std::string& key, const std::string& path) {
  const json& v = member(j, key, path);
  if (!v.is_number()) fail(path + "/" + key, "expected a number");
  return v.get<double>();
}

int integer(const json& j, const std::string& key, const std::string& path) {
  const json& v = member(j, key, path);
  if (!v.is_number_integer()) fail(path + "/" + key, "expected an integer");
  return v.get<int>();
}

QubitConfig parse_qubit(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  QubitConfig q;
  q.f_max_hz = num(j, "f_max_ghz", path) * 1e9;
  q.f_idle_hz = num(j, "f_idle_ghz", path) * 1e9;
  q.anharmonicity_hz = num(j, "anharmonicity_ghz", path) * 1e9;
  q.t1_s = num(j, "t1_us", path) * 1e-6;
  q.t_phi_s = num(j, "t_phi_us", path) * 1e-6;
  q.readout_f_g = num(j, "readout_fidelity_g", path);
  q.readout_f_e = num(j, "readout_fidelity_e", path);
  q.l_q = j.contains("l_q_nh") ? num(j, "l_q_nh", path) * 1e-9 : 0.0;
  return q;
}

CouplerConfig parse_coupler(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  CouplerConfig c;
  c.l_g = num(j, "l_g_nh", path) * 1e-9;
  c.l_w = num(j, "l_w_nh", path) * 1e-9;
  c.l_t = num(j, "l_t_nh", path) * 1e-9;
  c.r_g = num(j, "r_g_ohm", path);
  return c;
}

}  // namespace

DeviceConfig parse_device_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("device config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("", "top level must be an object");

  DeviceConfig cfg;
  const json& qubits = member(j, "qubits", "");
  if (!qubits.is_object()) fail("/qubits", "expected an object");
  for (auto it = qubits.begin(); it != qubits.end(); ++it)
    cfg.qubits[it.key()] = parse_qubit(it.value(), "/qubits/" + it.key());

  const json& couplers = member(j, "couplers", "");
  if (!couplers.is_object()) fail("/couplers", "expected an object");
  for (auto it = couplers.begin(); it != couplers.end(); ++it)
    cfg.couplers[it.key()] = parse_coupler(it.value(), "/couplers/" + it.key());

  const json& ch = member(j, "channel", "");
  if (!ch.is_object()) fail("/channel", "expected an object");
  cfg.channel.cable_length_m = num(ch, "cable_length_m", "/channel");
  cfg.channel.cable_l_per_m = num(ch, "cable_l_nh_per_m", "/channel") * 1e-9;
  cfg.channel.cable_c_per_m = num(ch, "cable_c_pf_per_m", "/channel") * 1e-12;
  cfg.channel.cpw_length_m = num(ch, "cpw_length_mm", "/channel") * 1e-3;
  cfg.channel.cpw_l_per_m = num(ch, "cpw_l_nh_per_m", "/channel") * 1e-9;
  cfg.channel.cpw_c_per_m = num(ch, "cpw_c_pf_per_m", "/channel") * 1e-12;
  const json& lifetimes = member(ch, "mode_t1_ns", "/channel");
  if (!lifetimes.is_array()) fail("/channel/mode_t1_ns", "expected an array");
  for (const json& v : lifetimes) {
    if (!v.is_number()) fail("/channel/mode_t1_ns", "expected numbers");
    cfg.channel.mode_lifetimes_s.push_back(v.get<double>() * 1e-9);
  }

  const json& wb = member(j, "wirebond", "");
  if (!wb.is_object()) fail("/wirebond", "expected an object");
  cfg.wirebond.r_s_ohm = num(wb, "r_s_ohm", "/wirebond");
  cfg.wirebond.q0 = num(wb, "q0", "/wirebond");

  cfg.fsr_hz = num(j, "fsr_mhz", "") * 1e6;
  cfg.mode_count = integer(j, "mode_count", "");
  cfg.comm_mode_index = integer(j, "comm_mode_index", "");
  cfg.comm_freq_hz = num(j, "comm_freq_ghz", "") * 1e9;

  const json& gg = member(j, "qubit_qubit_g_mhz", "");
  if (!gg.is_object()) fail("/qubit_qubit_g_mhz", "expected an object");
  for (auto it = gg.begin(); it != gg.end(); ++it) {
    if (!it.value().is_number()) fail("/qubit_qubit_g_mhz/" + it.key(), "expected a number");
    cfg.qubit_qubit_g_hz[it.key()] = it.value().get<double>() * 1e6;
  }

  validate_device_config(cfg);
  return cfg;
}

DeviceConfig load_device_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("device config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_device_config(ss.str());
}

void validate_device_config(const DeviceConfig& cfg) {
  static const char* kQubits[] = {"Q1A", "Q2A", "Q3A", "Q1B", "Q2B", "Q3B"};
  for (const char* k : kQubits)
    if (!cfg.qubits.count(k)) fail(std::string("/qubits/") + k, "missing");
  for (const auto& [name, q] : cfg.qubits) {
    std::string path = "/qubits/" + name;
    if (q.f_idle_hz > q.f_max_hz) fail(path, "f_idle exceeds f_max");
    if (q.anharmonicity_hz >= 0) fail(path, "anharmonicity must be negative");
    if (q.t1_s <= 0 || q.t_phi_s <= 0) fail(path, "T1 and T_phi must be positive");
    if (q.readout_f_g <= 0.5 || q.readout_f_g > 1.0 || q.readout_f_e <= 0.5 ||
        q.readout_f_e > 1.0)
      fail(path, "readout fidelities must lie in (0.5, 1] for an invertible confusion matrix");
  }
  for (const char* k : {"A", "B"}) {
    auto it = cfg.couplers.find(k);
    if (it == cfg.couplers.end()) fail(std::string("/couplers/") + k, "missing");
    const CouplerConfig& c = it->second;
    if (c.l_g <= 0 || c.l_w <= 0 || c.l_t <= 0 || c.r_g < 0)
      fail(std::string("/couplers/") + k, "inductances must be positive, R_g nonnegative");
  }
  const ChannelConfig& ch = cfg.channel;
  if (ch.cable_length_m <= 0 || ch.cable_l_per_m <= 0 || ch.cable_c_per_m <= 0 ||
      ch.cpw_length_m <= 0 || ch.cpw_l_per_m <= 0 || ch.cpw_c_per_m <= 0)
    fail("/channel", "lengths and per-length constants must be positive");
  for (double t : ch.mode_lifetimes_s)
    if (t <= 0) fail("/channel/mode_t1_ns", "lifetimes must be positive");
  if (cfg.wirebond.q0 <= 0) fail("/wirebond/q0", "must be positive");
  if (cfg.wirebond.r_s_ohm < 0) fail("/wirebond/r_s_ohm", "must be nonnegative");
  if (cfg.fsr_hz <= 0) fail("/fsr_mhz", "must be positive");
  if (cfg.mode_count < 1 || cfg.mode_count % 2 == 0)
    fail("/mode_count", "must be a positive odd integer");
  if (cfg.comm_mode_index < 1 || cfg.comm_mode_index > cfg.mode_count)
    fail("/comm_mode_index", "must lie in [1, mode_count]");
  if (static_cast<int>(ch.mode_lifetimes_s.size()) != cfg.mode_count)
    fail("/channel/mode_t1_ns", "length must equal mode_count");
  if (cfg.comm_freq_hz <= 0) fail("/comm_freq_ghz", "must be positive");
  for (const auto& [pair, g] : cfg.qubit_qubit_g_hz) {
    auto dash = pair.find('-');
    if (dash == std::string::npos) fail("/qubit_qubit_g_mhz/" + pair, "key must be Qi-Qj");
    if (!cfg.qubits.count(pair.substr(0, dash)) || !cfg.qubits.count(pair.substr(dash + 1)))
      fail("/qubit_qubit_g_mhz/" + pair, "references unknown qubit");
    (void)g;
  }
}

std::string serialize_device_config(const DeviceConfig& cfg) {
  json j;
  for (const auto& [name, q] : cfg.qubits) {
    json jq;
    jq["f_max_ghz"] = q.f_max_hz / 1e9;
    jq["f_idle_ghz"] = q.f_idle_hz / 1e9;
    jq["anharmonicity_ghz"] = q.anharmonicity_hz / 1e9;
    jq["t1_us"] = q.t1_s * 1e6;
    jq["t_phi_us"] = q.t_phi_s * 1e6;
    jq["readout_fidelity_g"] = q.readout_f_g;
    jq["readout_fidelity_e"] = q.readout_f_e;
    if (q.l_q != 0.0) jq["l_q_nh"] = q.l_q * 1e9;
    j["qubits"][name] = jq;
  }
  for (const auto& [name, c] : cfg.couplers) {
    json jc;
    jc["l_g_nh"] = c.l_g * 1e9;
    jc["l_w_nh"] = c.l_w * 1e9;
    jc["l_t_nh"] = c.l_t * 1e9;
    jc["r_g_ohm"] = c.r_g;
    j["couplers"][name] = jc;
  }
  json jch;
  jch["cable_length_m"] = cfg.channel.cable_length_m;
  jch["cable_l_nh_per_m"] = cfg.channel.cable_l_per_m * 1e9;
  jch["cable_c_pf_per_m"] = cfg.channel.cable_c_per_m * 1e12;
  jch["cpw_length_mm"] = cfg.channel.cpw_length_m * 1e3;
  jch["cpw_l_nh_per_m"] = cfg.channel.cpw_l_per_m * 1e9;
  jch["cpw_c_pf_per_m"] = cfg.channel.cpw_c_per_m * 1e12;
  json lifetimes = json::array();
  for (double t : cfg.channel.mode_lifetimes_s) lifetimes.push_back(t * 1e9);
  jch["mode_t1_ns"] = lifetimes;
  j["channel"] = jch;
  j["wirebond"]["r_s_ohm"] = cfg.wirebond.r_s_ohm;
  j["wirebond"]["q0"] = cfg.wirebond.q0;
  j["fsr_mhz"] = cfg.fsr_hz / 1e6;
  j["mode_count"] = cfg.mode_count;
  j["comm_mode_index"] = cfg.comm_mode_index;
  j["comm_freq_ghz"] = cfg.comm_freq_hz / 1e9;
  for (const auto& [pair, g] : cfg.qubit_qubit_g_hz)
    j["qubit_qubit_g_mhz"][pair] = g / 1e6;
  return j.dump(2) + "\n";
}

DeviceConfig default_device() { return parse_device_config(default_device_json()); }

}  // namespace qnetsim
