#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "qnetsim/device.hpp"
#include "qnetsim/io.hpp"
#include "qnetsim/protocols.hpp"
#include "qnetsim/scenario.hpp"
#include "qnetsim/tomography.hpp"
#include "test_util.hpp"

using namespace qnetsim;

namespace {

Mat random_density(int dim, std::mt19937& rng) {
  std::normal_distribution<double> n;
  Mat a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = cplx(n(rng), n(rng));
  Mat rho = a * a.adjoint();
  return rho / rho.trace();
}

Vec random_ket(int dim, std::mt19937& rng) {
  std::normal_distribution<double> n;
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = cplx(n(rng), n(rng));
  v.normalize();
  return v;
}

std::vector<ConfusionMatrix> perfect(int k) {
  return std::vector<ConfusionMatrix>(k, ConfusionMatrix{1.0, 1.0});
}

DensityMatrix reconstruct_infinite_shot(const Mat& rho, int k,
                                        const std::vector<ConfusionMatrix>& conf) {
  std::vector<SettingProbabilities> records;
  for (const auto& setting : all_settings(k)) {
    std::vector<double> probs = readout_distribution(rho, setting, conf);
    MitigationResult mit = mitigate_readout(probs, conf);
    records.push_back({setting, mit.probs});
  }
  return reconstruct_density(records);
}

}  // namespace

TEST_CASE("setting enumeration is lexicographic with the first qubit slowest") {
  auto s1 = all_settings(1);
  REQUIRE(s1.size() == 3);
  CHECK(s1[0][0] == PreRotation::id);
  CHECK(s1[1][0] == PreRotation::x_half);
  CHECK(s1[2][0] == PreRotation::y_half);

  auto s2 = all_settings(2);
  REQUIRE(s2.size() == 9);
  CHECK(s2[1][0] == PreRotation::id);
  CHECK(s2[1][1] == PreRotation::x_half);
  CHECK(s2[3][0] == PreRotation::x_half);
  CHECK(s2[3][1] == PreRotation::id);
  CHECK(all_settings(3).size() == 27);
}

TEST_CASE("pre-rotations move the named axes onto the measurement axis") {
  // X/2 brings a sigma_y eigenstate to the poles.
  Vec yplus(2);
  yplus << 1 / std::sqrt(2.0), cplx(0, 1) / std::sqrt(2.0);
  Mat rho = yplus * yplus.adjoint();
  auto probs = readout_distribution(rho, {PreRotation::x_half}, perfect(1));
  CHECK(probs[0] == doctest::Approx(1.0).epsilon(1e-10));

  // Y/2 brings a sigma_x eigenstate to the poles.
  Vec xplus(2);
  xplus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  rho = xplus * xplus.adjoint();
  probs = readout_distribution(rho, {PreRotation::y_half}, perfect(1));
  bool polar =
      std::abs(probs[0] - 1.0) < 1e-10 || std::abs(probs[1] - 1.0) < 1e-10;
  CHECK(polar);

  // Identity leaves the z populations.
  Vec e(2);
  e << 0, 1;
  rho = e * e.adjoint();
  probs = readout_distribution(rho, {PreRotation::id}, perfect(1));
  CHECK(probs[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("confusion matrices mix and invert consistently") {
  ConfusionMatrix c{0.95, 0.9};
  Eigen::Matrix2d m = c.matrix();
  CHECK(m(0, 0) == 0.95);
  CHECK(m(1, 0) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(m(0, 1) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(m(1, 1) == 0.9);
  CHECK(((m * c.inverse()) - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <
        1e-12);

  // Columns are stochastic: they conserve probability.
  Vec e = Vec::Zero(2);
  e(1) = 1;
  Mat rho = e * e.adjoint();
  auto probs = readout_distribution(rho, {PreRotation::id}, {c});
  CHECK(probs[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(probs[1] == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("readout mitigation undoes the confusion map") {
  std::mt19937 rng(23);
  std::vector<ConfusionMatrix> conf = {{0.982, 0.944}, {0.973, 0.947}};
  Mat rho = random_density(4, rng);
  auto setting = all_settings(2)[4];
  auto observed = readout_distribution(rho, setting, conf);
  auto truth = readout_distribution(rho, setting, perfect(2));
  MitigationResult mit = mitigate_readout(observed, conf);
  REQUIRE(mit.probs.size() == 4);
  for (int i = 0; i < 4; ++i)
    CHECK(mit.probs[i] == doctest::Approx(truth[i]).epsilon(1e-10));
  CHECK(mit.l1_deficit == doctest::Approx(0.0).epsilon(1e-12));

  // A distribution outside the image of the confusion map gets clipped and
  // the removed weight reported.
  std::vector<double> impossible = {1.0, 0.0, 0.0, 0.0};
  MitigationResult clipped = mitigate_readout(impossible, conf);
  double sum = 0;
  for (double p : clipped.probs) {
    CHECK(p >= 0.0);
    sum += p;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(clipped.l1_deficit > 0.0);
}

TEST_CASE("infinite-shot state reconstruction round-trips 200 random states") {
  std::mt19937 rng(31);
  int checked = 0;
  for (int it = 0; it < 200; ++it) {
    int k = 1 + it % 3;
    int dim = 1 << k;
    Mat rho = (it % 2 == 0) ? random_density(dim, rng)
                            : Mat(random_ket(dim, rng) * random_ket(dim, rng).adjoint());
    if (it % 2 == 1) {
      Vec v = random_ket(dim, rng);
      rho = v * v.adjoint();
    }
    DensityMatrix recon = reconstruct_infinite_shot(rho, k, perfect(k));
    CHECK(state_fidelity(recon.matrix(), rho) > 1.0 - 1e-8);
    ++checked;
  }
  CHECK(checked == 200);
}

TEST_CASE("reconstruction also undoes realistic readout errors") {
  DeviceConfig dev = default_device();
  std::vector<ConfusionMatrix> conf;
  for (int j = 1; j <= 3; ++j) {
    const QubitConfig& q = dev.qubits.at("Q" + std::to_string(j) + "A");
    conf.push_back({q.readout_f_g, q.readout_f_e});
  }
  GhzPrepResult ghz = run_ghz_prep("A", dev);
  DensityMatrix recon = reconstruct_infinite_shot(ghz.rho, 3, conf);
  CHECK(state_fidelity(recon.matrix(), ghz.rho) > 1.0 - 1e-8);
}

TEST_CASE("malformed reconstruction inputs are rejected") {
  CHECK_THROWS(reconstruct_density({}));

  // Incomplete setting set.
  std::vector<SettingProbabilities> partial;
  partial.push_back({{PreRotation::id}, {0.5, 0.5}});
  CHECK_THROWS(reconstruct_density(partial));

  // Outcome count inconsistent with the setting length.
  std::vector<SettingProbabilities> bad;
  for (const auto& s : all_settings(1)) bad.push_back({s, {0.25, 0.25, 0.25, 0.25}});
  CHECK_THROWS(reconstruct_density(bad));
}

TEST_CASE("sampled readout is deterministic per seed and integrates to shots") {
  DeviceConfig dev = default_device();
  GhzPrepResult ghz = run_ghz_prep("A", dev);
  std::vector<ConfusionMatrix> conf = {{0.98, 0.94}, {0.98, 0.94}, {0.98, 0.94}};
  auto setting = all_settings(3)[7];

  ShotRecord a = simulate_readout(ghz.rho, setting, conf, 3000, 42, 7);
  ShotRecord b = simulate_readout(ghz.rho, setting, conf, 3000, 42, 7);
  REQUIRE(a.counts.size() == 8);
  CHECK(a.counts == b.counts);
  CHECK(a.setting_index == 7);
  std::int64_t total = 0;
  for (auto c : a.counts) total += c;
  CHECK(total == 3000);

  ShotRecord c = simulate_readout(ghz.rho, setting, conf, 3000, 43, 7);
  CHECK(a.counts != c.counts);
}

TEST_CASE("three-qubit ghz reconstruction from 3000 sampled shots") {
  DeviceConfig dev = default_device();
  GhzPrepResult ghz = run_ghz_prep("A", dev);
  std::vector<ConfusionMatrix> conf;
  for (int j = 1; j <= 3; ++j) {
    const QubitConfig& q = dev.qubits.at("Q" + std::to_string(j) + "A");
    conf.push_back({q.readout_f_g, q.readout_f_e});
  }
  auto settings = all_settings(3);
  std::vector<SettingProbabilities> records;
  for (std::size_t i = 0; i < settings.size(); ++i) {
    ShotRecord rec = simulate_readout(ghz.rho, settings[i], conf, 3000,
                                      grid_point_seed(11, i), static_cast<int>(i));
    std::vector<double> obs(rec.counts.size());
    for (std::size_t o = 0; o < obs.size(); ++o)
      obs[o] = static_cast<double>(rec.counts[o]) / rec.shots;
    MitigationResult mit = mitigate_readout(obs, conf);
    records.push_back({settings[i], mit.probs});
  }
  Vec target = Vec::Zero(8);
  target(0) = target(7) = 1 / std::sqrt(2.0);
  double f = state_fidelity(reconstruct_density(records).matrix(), target);
  CHECK(f == doctest::Approx(0.92648230733336123).epsilon(1e-10));
  // Within sampling noise of the true 0.9287.
  CHECK(std::abs(f - 0.92870527999999974) < 0.02);
}

TEST_CASE("process tomography round-trips unitary channels") {
  // Single qubit: a generic rotation.
  std::mt19937 rng(47);
  Mat u1 = Mat::Zero(2, 2);
  {
    double a = 0.7, b = 1.3, c = 0.4;
    Mat rz = Mat::Zero(2, 2), ry = Mat::Zero(2, 2), rz2 = Mat::Zero(2, 2);
    rz << std::exp(cplx(0, -a / 2)), 0, 0, std::exp(cplx(0, a / 2));
    ry << std::cos(b / 2), -std::sin(b / 2), std::sin(b / 2), std::cos(b / 2);
    rz2 << std::exp(cplx(0, -c / 2)), 0, 0, std::exp(cplx(0, c / 2));
    u1 = rz * ry * rz2;
  }
  std::vector<Mat> inputs, outputs;
  for (const Vec& v : process_input_kets()) {
    Mat rho = v * v.adjoint();
    inputs.push_back(rho);
    outputs.push_back(u1 * rho * u1.adjoint());
  }
  ProcessMatrix chi1 = reconstruct_process(inputs, outputs);
  CHECK(process_fidelity(chi1, process_of_unitary(u1)) ==
        doctest::Approx(1.0).epsilon(1e-9));

  // Two qubits: CZ from the sixteen tensor-product inputs.
  Mat cz = Mat::Identity(4, 4);
  cz(3, 3) = -1;
  inputs.clear();
  outputs.clear();
  auto kets = process_input_kets();
  for (const Vec& a : kets)
    for (const Vec& b : kets) {
      Vec v(4);
      v << a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1);
      Mat rho = v * v.adjoint();
      inputs.push_back(rho);
      outputs.push_back(cz * rho * cz.adjoint());
    }
  ProcessMatrix chi2 = reconstruct_process(inputs, outputs);
  CHECK(process_fidelity(chi2, process_of_unitary(cz)) ==
        doctest::Approx(1.0).epsilon(1e-9));

  // The chi of a unitary is rank one with unit trace.
  ProcessMatrix ideal = process_of_unitary(cz);
  CHECK(std::abs(ideal.chi().trace().real() - 1.0) < 1e-12);
  Eigen::SelfAdjointEigenSolver<Mat> es(ideal.chi());
  CHECK(es.eigenvalues().maxCoeff() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(es.eigenvalues().minCoeff() > -1e-10);
}

TEST_CASE("identity process concentrates all weight on II...I") {
  ProcessMatrix chi = process_of_unitary(Mat::Identity(4, 4));
  CHECK(chi.chi()(0, 0).real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(chi.chi().cwiseAbs().sum() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("shot records survive a csv round trip") {
  testutil::TempDir tmp;
  std::vector<ShotRecord> records;
  ShotRecord r;
  r.setting_index = 2;
  r.counts = {1200, 0, 35, 1765};
  r.shots = 3000;
  records.push_back(r);
  ShotRecord r2;
  r2.setting_index = 5;
  r2.counts = {10, 20, 30, 2940};
  r2.shots = 3000;
  records.push_back(r2);

  std::string path = tmp.str("shots.csv");
  write_shot_records_csv(path, records, 2);
  auto back = read_shot_records_csv(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].setting_index == 2);
  CHECK(back[0].counts == records[0].counts);
  CHECK(back[0].shots == 3000);
  CHECK(back[1].counts == records[1].counts);
}

TEST_CASE("complex matrices survive a json round trip") {
  std::mt19937 rng(53);
  Mat m = random_density(4, rng);
  std::string text = matrix_to_json(m);
  Mat back = matrix_from_json(text);
  CHECK((m - back).cwiseAbs().maxCoeff() == 0.0);
  CHECK(text.find("\"qnetsim-matrix-v1\"") != std::string::npos);
}
