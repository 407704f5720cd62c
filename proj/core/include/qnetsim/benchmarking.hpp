#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qnetsim/hilbert.hpp"

namespace qnetsim {

// One element of the single-qubit Clifford group, reachable as a product of
// the physical generator set. The identity has an empty decomposition.
struct CliffordElement {
  int index = 0;
  Mat unitary;                             // 2x2
  std::vector<std::string> decomposition;  // generator names, applied left to right
};

// All 24 elements, built once by closure over {+-X/2, +-Y/2, X, Y}.
const std::vector<CliffordElement>& clifford_group_1q();

struct ErrorChannelSpec {
  enum class Kind { none, depolarizing, amplitude_damping };
  Kind kind = Kind::none;
  double strength = 0.0;  // depolarizing weight toward I/d, or AD gamma per qubit
};

// Apply the channel to a 1- or 2-qubit density matrix.
Mat apply_error_channel(const Mat& rho, const ErrorChannelSpec& error);

struct DecayFit {
  double a = 0;
  double p = 1;
  double b = 0;
};

// Least squares for y = a*p^x + b over integer x. With fix_b_zero the
// offset is pinned to 0 (cross-entropy convention).
DecayFit fit_exponential_decay(const std::vector<int>& x,
                               const std::vector<double>& y, bool fix_b_zero);

struct RbPoint {
  int length = 0;
  double mean_return_prob = 0;
  double std_dev = 0;
};

struct RbResult {
  std::vector<RbPoint> points;
  DecayFit fit;
  double error_per_clifford = 0;  // r = (1 - p)/2
  double avg_gate_fidelity = 1;   // 1 - r
};

// Clifford RB with the error channel interleaved after every Clifford
// (recovery included). Exact expectation values; the only randomness is the
// sequence draw, derived deterministically from (seed, length, sequence).
RbResult rb_run(const std::vector<int>& lengths, int n_sequences,
                const ErrorChannelSpec& error, std::uint64_t seed);

struct XebPoint {
  int depth = 0;
  double fidelity = 0;
};

struct XebResult {
  std::vector<XebPoint> points;
  DecayFit fit;                // a*p^depth, b = 0
  double error_per_cycle = 0;  // 1 - p
};

// Two-qubit linear cross-entropy benchmarking. Each cycle applies a random
// gate from {+-X/2, +-Y/2, +-W/2} on each qubit, a CZ, then the error
// channels (single-qubit on each qubit, then the two-qubit channel).
// Fidelity per depth is the linear XEB estimator with numerator and
// denominator averaged over circuits separately. Depths whose ideal
// distribution is uniform (depth 1 in this gate set) have no estimator
// signal and are dropped from the points and the fit.
XebResult xeb_run(const std::vector<int>& depths, int n_circuits,
                  const ErrorChannelSpec& two_qubit_error, std::uint64_t seed,
                  const ErrorChannelSpec& single_qubit_error = {});

// `length,mean_return_prob,std`
void write_rb_csv(const std::string& path, const RbResult& result);
// `depth,fidelity`
void write_xeb_csv(const std::string& path, const XebResult& result);
std::string rb_fit_json(const RbResult& result);
std::string xeb_fit_json(const XebResult& result);

}  // namespace qnetsim
