#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qnetsim/dynamics.hpp"
#include "qnetsim/hilbert.hpp"

namespace qnetsim {

// All CSV output is UTF-8 with LF line endings and a mandatory header row.

// Rows time_ns,site,population: one row per (sample, site).
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path);
void write_csv(const CsvTable& table, const std::string& path);

// Full-state dump: uint64 dim, then row-major interleaved re/im doubles,
// all little-endian.
void write_state_binary(const Mat& m, const std::string& path);
Mat read_state_binary(const std::string& path);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file_hex(const std::string& path);

// Cheap deterministic seed derivation for per-grid-point generators.
uint64_t splitmix64(uint64_t x);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace qnetsim
