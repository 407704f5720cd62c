#include "qnetsim/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/SVD>

#include "json.hpp"

namespace qnetsim {
namespace {

int pow_int(int base, int exp) {
  int r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// Each pre-rotation maps one Bloch axis onto Z: measuring Z after the
// rotation estimates the listed Pauli with the listed sign.
struct MeasuredPauli {
  int pauli;    // 0 I, 1 X, 2 Y, 3 Z
  double sign;
};

MeasuredPauli measured_pauli(PreRotation r) {
  switch (r) {
    case PreRotation::id:
      return {3, 1.0};
    case PreRotation::x_half:
      return {2, 1.0};
    case PreRotation::y_half:
      return {1, -1.0};
  }
  throw std::logic_error("unreachable");
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Truncate a qutrit register to its qubit block after checking leakage.
Mat truncate_to_qubits(const Mat& rho, int k) {
  int d3 = pow_int(3, k);
  if (rho.rows() != d3)
    throw std::invalid_argument("readout: density matrix dimension mismatch");

  for (int q = 0; q < k; ++q) {
    double f_pop = 0;
    int stride = pow_int(3, k - 1 - q);
    for (int i = 0; i < d3; ++i)
      if ((i / stride) % 3 == 2) f_pop += rho(i, i).real();
    if (f_pop >= 1e-3)
      throw std::runtime_error(
          "readout: second-excited-state population " + std::to_string(f_pop) +
          " on qubit " + std::to_string(q) + " exceeds 1e-3");
  }

  int d2 = pow_int(2, k);
  auto to3 = [&](int idx2) {
    int idx3 = 0;
    for (int q = 0; q < k; ++q) {
      int bit = (idx2 >> (k - 1 - q)) & 1;
      idx3 = idx3 * 3 + bit;
    }
    return idx3;
  };
  Mat out(d2, d2);
  for (int r = 0; r < d2; ++r)
    for (int c = 0; c < d2; ++c) out(r, c) = rho(to3(r), to3(c));
  return out;
}

std::string bitstring(int outcome, int k) {
  std::string s(k, '0');
  for (int q = 0; q < k; ++q)
    if ((outcome >> (k - 1 - q)) & 1) s[q] = '1';
  return s;
}

}  // namespace

Eigen::Matrix2d ConfusionMatrix::matrix() const {
  Eigen::Matrix2d m;
  m << f_g, 1.0 - f_e, 1.0 - f_g, f_e;
  return m;
}

Eigen::Matrix2d ConfusionMatrix::inverse() const {
  double det = f_g + f_e - 1.0;
  if (std::abs(det) < 1e-12)
    throw std::invalid_argument("confusion matrix is singular");
  Eigen::Matrix2d m;
  m << f_e, f_e - 1.0, f_g - 1.0, f_g;
  return m / det;
}

std::vector<TomographySetting> all_settings(int n_qubits) {
  if (n_qubits < 1) throw std::invalid_argument("need at least one qubit");
  int total = pow_int(3, n_qubits);
  std::vector<TomographySetting> out;
  out.reserve(total);
  for (int s = 0; s < total; ++s) {
    TomographySetting setting(n_qubits);
    int q = s;
    for (int i = n_qubits - 1; i >= 0; --i) {
      setting[i] = static_cast<PreRotation>(q % 3);
      q /= 3;
    }
    out.push_back(std::move(setting));
  }
  return out;
}

Mat rotation_unitary(PreRotation r) {
  Mat u(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  switch (r) {
    case PreRotation::id:
      u = Mat::Identity(2, 2);
      break;
    case PreRotation::x_half:
      u << s, cplx(0, -s), cplx(0, -s), s;
      break;
    case PreRotation::y_half:
      u << s, -s, s, s;
      break;
  }
  return u;
}

std::vector<double> readout_distribution(
    const Mat& rho, const TomographySetting& setting,
    const std::vector<ConfusionMatrix>& confusion) {
  int k = static_cast<int>(setting.size());
  if (static_cast<int>(confusion.size()) != k)
    throw std::invalid_argument("readout: one confusion matrix per qubit required");

  int d2 = pow_int(2, k);
  Mat rho2;
  if (rho.rows() == d2)
    rho2 = rho;
  else
    rho2 = truncate_to_qubits(rho, k);

  Mat u = Mat::Identity(1, 1);
  for (int q = 0; q < k; ++q) u = kron(u, rotation_unitary(setting[q]));
  Mat rotated = u * rho2 * u.adjoint();

  Eigen::VectorXd ideal(d2);
  for (int i = 0; i < d2; ++i) ideal(i) = std::max(0.0, rotated(i, i).real());
  ideal /= ideal.sum();

  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(1, 1);
  for (int q = 0; q < k; ++q) {
    Eigen::MatrixXd next(c.rows() * 2, c.cols() * 2);
    Eigen::Matrix2d cq = confusion[q].matrix();
    for (int i = 0; i < c.rows(); ++i)
      for (int j = 0; j < c.cols(); ++j)
        next.block(i * 2, j * 2, 2, 2) = c(i, j) * cq;
    c = next;
  }
  Eigen::VectorXd obs = c * ideal;
  return std::vector<double>(obs.data(), obs.data() + d2);
}

ShotRecord simulate_readout(const Mat& rho, const TomographySetting& setting,
                            const std::vector<ConfusionMatrix>& confusion,
                            std::int64_t shots, std::uint64_t seed,
                            int setting_index) {
  if (shots <= 0) throw std::invalid_argument("readout: shots must be positive");
  std::vector<double> probs = readout_distribution(rho, setting, confusion);

  std::vector<double> cdf(probs.size());
  double acc = 0;
  for (size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    cdf[i] = acc;
  }
  cdf.back() = 1.0;

  // Uniforms built from the raw 64-bit stream so counts are identical on
  // every platform.
  std::mt19937_64 rng(seed);
  ShotRecord rec;
  rec.setting_index = setting_index;
  rec.counts.assign(probs.size(), 0);
  rec.shots = shots;
  for (std::int64_t s = 0; s < shots; ++s) {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    size_t idx = std::min(static_cast<size_t>(it - cdf.begin()), probs.size() - 1);
    ++rec.counts[idx];
  }
  return rec;
}

MitigationResult mitigate_readout(const std::vector<double>& observed,
                                  const std::vector<ConfusionMatrix>& confusion) {
  int k = static_cast<int>(confusion.size());
  int d = pow_int(2, k);
  if (static_cast<int>(observed.size()) != d)
    throw std::invalid_argument("mitigate_readout: distribution size mismatch");

  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(observed.data(), d);
  // Apply each qubit's inverse along its own axis of the outcome hypercube.
  for (int q = 0; q < k; ++q) {
    Eigen::Matrix2d inv = confusion[q].inverse();
    int stride = pow_int(2, k - 1 - q);
    Eigen::VectorXd next = v;
    for (int i = 0; i < d; ++i) {
      int bit = (i / stride) % 2;
      int base = i - bit * stride;
      next(i) = inv(bit, 0) * v(base) + inv(bit, 1) * v(base + stride);
    }
    v = next;
  }

  MitigationResult res;
  double deficit = 0;
  for (int i = 0; i < d; ++i)
    if (v(i) < 0) {
      deficit -= v(i);
      v(i) = 0;
    }
  res.l1_deficit = deficit;
  double sum = v.sum();
  if (sum <= 0)
    throw std::runtime_error("mitigate_readout: distribution vanished after clipping");
  v /= sum;
  res.probs.assign(v.data(), v.data() + d);
  return res;
}

DensityMatrix reconstruct_density(const std::vector<SettingProbabilities>& records) {
  if (records.empty())
    throw std::invalid_argument("reconstruct_density: no measurement records");
  int k = static_cast<int>(records[0].setting.size());
  if (k < 1 || k > 6)
    throw std::invalid_argument("reconstruct_density: supports 1 to 6 qubits");
  int d = pow_int(2, k);
  int n_pauli = pow_int(4, k);
  int expected = pow_int(3, k);

  std::vector<int> seen(expected, 0);
  std::vector<double> est_sum(n_pauli, 0.0);
  std::vector<int> est_count(n_pauli, 0);

  for (const auto& rec : records) {
    if (static_cast<int>(rec.setting.size()) != k)
      throw std::invalid_argument("reconstruct_density: mixed setting lengths");
    if (static_cast<int>(rec.probs.size()) != d)
      throw std::invalid_argument("reconstruct_density: outcome distribution size mismatch");

    int sid = 0;
    for (int q = 0; q < k; ++q) sid = sid * 3 + static_cast<int>(rec.setting[q]);
    ++seen[sid];

    // Every subset of measured qubits estimates one Pauli string; strings
    // shared between settings are averaged.
    for (int subset = 1; subset < d; ++subset) {
      int string_idx = 0;
      double sign = 1.0;
      for (int q = 0; q < k; ++q) {
        string_idx *= 4;
        if ((subset >> (k - 1 - q)) & 1) {
          MeasuredPauli mp = measured_pauli(rec.setting[q]);
          string_idx += mp.pauli;
          sign *= mp.sign;
        }
      }
      double e = 0;
      for (int out = 0; out < d; ++out) {
        int parity = __builtin_popcount(static_cast<unsigned>(out & subset)) & 1;
        e += (parity ? -1.0 : 1.0) * rec.probs[out];
      }
      est_sum[string_idx] += sign * e;
      ++est_count[string_idx];
    }
  }

  for (int s = 0; s < expected; ++s)
    if (seen[s] == 0)
      throw std::invalid_argument("reconstruct_density: incomplete setting set");

  std::vector<Mat> paulis = pauli_basis(k);
  Mat rho = Mat::Identity(d, d);  // <I..I> = 1
  for (int p = 1; p < n_pauli; ++p) {
    if (est_count[p] == 0) continue;
    rho += (est_sum[p] / est_count[p]) * paulis[p];
  }
  rho /= d;

  std::vector<Site> sites;
  for (int q = 0; q < k; ++q)
    sites.push_back({"T" + std::to_string(q + 1), SiteKind::qubit, 2});
  return DensityMatrix(HilbertSpace(sites), project_to_physical(rho, true));
}

ProcessMatrix reconstruct_process(const std::vector<Mat>& inputs,
                                  const std::vector<Mat>& outputs) {
  if (inputs.empty() || inputs.size() != outputs.size())
    throw std::invalid_argument("reconstruct_process: input/output count mismatch");
  int d = static_cast<int>(inputs[0].rows());
  int k = d == 2 ? 1 : d == 4 ? 2 : 0;
  if (k == 0)
    throw std::invalid_argument("reconstruct_process: supports 1 or 2 qubits");
  int n4 = pow_int(4, k);

  for (const Mat& m : inputs)
    if (m.rows() != d || m.cols() != d)
      throw std::invalid_argument("reconstruct_process: input dimension mismatch");
  for (const Mat& m : outputs)
    if (m.rows() != d || m.cols() != d)
      throw std::invalid_argument("reconstruct_process: output dimension mismatch");

  std::vector<Mat> paulis = pauli_basis(k);
  int rows = static_cast<int>(inputs.size()) * d * d;
  Mat a(rows, n4 * n4);
  for (int m = 0; m < n4; ++m)
    for (int n = 0; n < n4; ++n) {
      int col = m * n4 + n;
      int r = 0;
      for (const Mat& in : inputs) {
        Mat t = paulis[m] * in * paulis[n].adjoint();
        for (int i = 0; i < d; ++i)
          for (int jj = 0; jj < d; ++jj) a(r++, col) = t(i, jj);
      }
    }
  Vec y(rows);
  {
    int r = 0;
    for (const Mat& out : outputs)
      for (int i = 0; i < d; ++i)
        for (int jj = 0; jj < d; ++jj) y(r++) = out(i, jj);
  }

  Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) < 1e-10 * sv(0))
    throw std::invalid_argument(
        "reconstruct_process: input states do not span the operator space");
  Vec x = svd.solve(y);

  Mat chi(n4, n4);
  for (int m = 0; m < n4; ++m)
    for (int n = 0; n < n4; ++n) chi(m, n) = x(m * n4 + n);
  chi = 0.5 * (chi + chi.adjoint().eval());
  return ProcessMatrix(k, project_to_physical(chi, true));
}

ProcessMatrix process_of_unitary(const Mat& u) {
  int d = static_cast<int>(u.rows());
  int k = d == 2 ? 1 : d == 4 ? 2 : 0;
  if (k == 0 || u.cols() != d)
    throw std::invalid_argument("process_of_unitary: supports 1 or 2 qubits");
  std::vector<Mat> paulis = pauli_basis(k);
  int n4 = pow_int(4, k);
  Vec alpha(n4);
  for (int m = 0; m < n4; ++m)
    alpha(m) = (paulis[m].adjoint() * u).trace() / static_cast<double>(d);
  Mat chi = alpha * alpha.adjoint();
  return ProcessMatrix(k, chi);
}

std::vector<Vec> process_input_kets() {
  const double s = 1.0 / std::sqrt(2.0);
  Vec g(2), gmi(2), gpe(2), e(2);
  g << 1, 0;
  gmi << s, cplx(0, -s);
  gpe << s, s;
  e << 0, 1;
  return {g, gmi, gpe, e};
}

void write_shot_records_csv(const std::string& path,
                            const std::vector<ShotRecord>& records,
                            int n_qubits) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << "setting,outcome,count\n";
  for (const auto& rec : records)
    for (size_t out = 0; out < rec.counts.size(); ++out) {
      if (rec.counts[out] == 0) continue;
      f << rec.setting_index << "," << bitstring(static_cast<int>(out), n_qubits)
        << "," << rec.counts[out] << "\n";
    }
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::vector<ShotRecord> read_shot_records_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(f, line) || line != "setting,outcome,count")
    throw std::runtime_error("bad shot record header in " + path);

  std::map<int, std::map<int, std::int64_t>> by_setting;
  int n_qubits = 0;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string setting_s, outcome_s, count_s;
    if (!std::getline(ss, setting_s, ',') || !std::getline(ss, outcome_s, ',') ||
        !std::getline(ss, count_s))
      throw std::runtime_error("bad shot record row: " + line);
    n_qubits = std::max(n_qubits, static_cast<int>(outcome_s.size()));
    int outcome = 0;
    for (char c : outcome_s) outcome = outcome * 2 + (c == '1' ? 1 : 0);
    by_setting[std::stoi(setting_s)][outcome] += std::stoll(count_s);
  }

  std::vector<ShotRecord> out;
  int d = pow_int(2, n_qubits);
  for (const auto& [sid, counts] : by_setting) {
    ShotRecord rec;
    rec.setting_index = sid;
    rec.counts.assign(d, 0);
    for (const auto& [outcome, c] : counts) {
      rec.counts[outcome] = c;
      rec.shots += c;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::string matrix_to_json(const Mat& m) {
  nlohmann::json j;
  j["schema"] = "qnetsim-matrix-v1";
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r) {
    nlohmann::json re_row = nlohmann::json::array(), im_row = nlohmann::json::array();
    for (int c = 0; c < m.cols(); ++c) {
      re_row.push_back(m(r, c).real());
      im_row.push_back(m(r, c).imag());
    }
    re.push_back(std::move(re_row));
    im.push_back(std::move(im_row));
  }
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  return j.dump(2) + "\n";
}

Mat matrix_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.value("schema", "") != "qnetsim-matrix-v1")
    throw std::runtime_error("matrix_from_json: unknown schema");
  int rows = j.at("rows").get<int>(), cols = j.at("cols").get<int>();
  Mat m(rows, cols);
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      m(r, c) = cplx(re.at(r).at(c).get<double>(), im.at(r).at(c).get<double>());
  return m;
}

}  // namespace qnetsim
