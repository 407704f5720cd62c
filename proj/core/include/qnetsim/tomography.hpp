#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qnetsim/hilbert.hpp"

namespace qnetsim {

// Readout assignment errors of one qubit. The stochastic matrix maps true
// state to observed state: [[F_g, 1-F_e], [1-F_g, F_e]].
struct ConfusionMatrix {
  double f_g = 1.0;
  double f_e = 1.0;

  Eigen::Matrix2d matrix() const;
  Eigen::Matrix2d inverse() const;
};

// Pre-rotation applied to one qubit before the Z-basis measurement. X/2
// turns a Y eigenstate onto the measurement axis, Y/2 an X eigenstate.
enum class PreRotation { id, x_half, y_half };

// One rotation per measured qubit, first listed qubit most significant in
// the outcome bitstring.
using TomographySetting = std::vector<PreRotation>;

// All 3^k settings in lexicographic order (id < x_half < y_half), first
// qubit slowest.
std::vector<TomographySetting> all_settings(int n_qubits);

Mat rotation_unitary(PreRotation r);

struct ShotRecord {
  int setting_index = 0;
  std::vector<std::int64_t> counts;  // one entry per outcome bitstring
  std::int64_t shots = 0;
};

// Outcome distribution in the infinite-shot limit: rotate, read diagonal,
// push through the per-qubit confusion matrices. Accepts a qubit register
// (dim 2^k) or a qutrit register (dim 3^k); qutrits are truncated to {g,e}
// after asserting that every site's f population is below 1e-3.
std::vector<double> readout_distribution(
    const Mat& rho, const TomographySetting& setting,
    const std::vector<ConfusionMatrix>& confusion);

// Multinomial sampling of the distribution above. Deterministic for a fixed
// seed, independent of platform.
ShotRecord simulate_readout(const Mat& rho, const TomographySetting& setting,
                            const std::vector<ConfusionMatrix>& confusion,
                            std::int64_t shots, std::uint64_t seed,
                            int setting_index = 0);

struct MitigationResult {
  std::vector<double> probs;   // inverted, clipped, renormalized
  double l1_deficit = 0.0;     // total negative weight removed by clipping
};

// Invert the tensored confusion matrices on an observed distribution.
MitigationResult mitigate_readout(const std::vector<double>& observed,
                                  const std::vector<ConfusionMatrix>& confusion);

struct SettingProbabilities {
  TomographySetting setting;
  std::vector<double> probs;
};

// Linear inversion in the Pauli basis over a complete set of 3^k settings
// (Pauli strings estimated by several settings are averaged), then
// projection onto the physical set.
DensityMatrix reconstruct_density(const std::vector<SettingProbabilities>& records);

// Least-squares chi matrix from prepared inputs and the states they map to,
// then projection to Hermitian, PSD, unit trace. k = 1 or 2 qubits; inputs
// must span the operator space.
ProcessMatrix reconstruct_process(const std::vector<Mat>& inputs,
                                  const std::vector<Mat>& outputs);

// Exact chi matrix of a k-qubit unitary (rank one, unit trace).
ProcessMatrix process_of_unitary(const Mat& u);

// The four preparation states used for process tomography, as kets:
// |g>, (|g> - i|e>)/sqrt(2), (|g> + |e>)/sqrt(2), |e>.
std::vector<Vec> process_input_kets();

// `setting,outcome,count` with outcomes as bitstrings, one row per nonzero
// outcome of each record.
void write_shot_records_csv(const std::string& path,
                            const std::vector<ShotRecord>& records,
                            int n_qubits);
std::vector<ShotRecord> read_shot_records_csv(const std::string& path);

// Dense complex matrix as JSON with separate re/im arrays.
std::string matrix_to_json(const Mat& m);
Mat matrix_from_json(const std::string& text);

}  // namespace qnetsim
