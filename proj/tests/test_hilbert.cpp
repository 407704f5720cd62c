#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "doctest.h"
#include "qnetsim/hilbert.hpp"

using namespace qnetsim;

namespace {

HilbertSpace two_qubit_one_mode() {
  return HilbertSpace({{"QA", SiteKind::qubit, 2},
                       {"QB", SiteKind::qubit, 2},
                       {"M1", SiteKind::mode, 3}});
}

Vec random_ket(int dim, std::mt19937& rng) {
  std::normal_distribution<double> n;
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = cplx(n(rng), n(rng));
  v.normalize();
  return v;
}

Mat random_density(int dim, std::mt19937& rng) {
  std::normal_distribution<double> n;
  Mat a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = cplx(n(rng), n(rng));
  Mat rho = a * a.adjoint();
  return rho / rho.trace();
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

TEST_CASE("composite space indexing puts the first site most significant") {
  HilbertSpace s = two_qubit_one_mode();
  CHECK(s.dim() == 12);
  CHECK(s.num_sites() == 3);
  CHECK(s.stride(0) == 6);
  CHECK(s.stride(1) == 3);
  CHECK(s.stride(2) == 1);
  // index 7 = 1*6 + 0*3 + 1
  CHECK(s.level_of(7, 0) == 1);
  CHECK(s.level_of(7, 1) == 0);
  CHECK(s.level_of(7, 2) == 1);
  CHECK(s.site_index("QB") == 1);
  CHECK(s.has_site("M1"));
  CHECK(!s.has_site("M2"));
  CHECK_THROWS(s.site_index("M2"));

  Vec e = s.basis_ket("QB", 1);
  CHECK(std::abs(e(3) - cplx(1, 0)) < 1e-15);
  CHECK(std::abs(e.norm() - 1.0) < 1e-15);
}

TEST_CASE("embedding a single-site operator matches the kron layout") {
  HilbertSpace s = two_qubit_one_mode();
  Mat n3 = Mat::Zero(3, 3);
  n3(1, 1) = 1;
  n3(2, 2) = 2;
  Mat id2 = Mat::Identity(2, 2);
  Mat want = kron(kron(id2, id2), n3);
  Mat got = embed_operator(s, "M1", n3);
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-15);

  Mat x = pauli_x();
  want = kron(kron(id2, x), Mat::Identity(3, 3));
  got = embed_operator(s, "QB", x);
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("two-site embedding ravels the first label most significant") {
  HilbertSpace s = two_qubit_one_mode();
  Mat cz = Mat::Identity(4, 4);
  cz(3, 3) = -1;
  const std::vector<std::string> fwd = {"QA", "QB"};
  const std::vector<std::string> rev = {"QB", "QA"};
  Mat got = embed_operator(s, fwd, cz);
  Mat want = kron(cz, Mat::Identity(3, 3));
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-15);

  // Reversed label order must transpose the qubit roles, not the matrix.
  Mat swap = Mat::Zero(4, 4);
  swap(0, 0) = swap(3, 3) = 1;
  swap(1, 2) = swap(2, 1) = 1;
  Mat a = embed_operator(s, fwd, swap);
  Mat b = embed_operator(s, rev, swap);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-15);  // SWAP is symmetric
}

TEST_CASE("partial trace of a product state recovers the factors") {
  HilbertSpace s = two_qubit_one_mode();
  std::mt19937 rng(5);
  Mat ra = random_density(2, rng);
  Mat rb = random_density(2, rng);
  Mat rm = random_density(3, rng);
  Mat rho = kron(kron(ra, rb), rm);

  CHECK((partial_trace(s, rho, {"QA"}) - ra).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((partial_trace(s, rho, {"M1"}) - rm).cwiseAbs().maxCoeff() < 1e-12);
  Mat rab = partial_trace(s, rho, {"QA", "QB"});
  CHECK((rab - kron(ra, rb)).cwiseAbs().maxCoeff() < 1e-12);
  // Keep order does not permute the result.
  Mat rab2 = partial_trace(s, rho, {"QB", "QA"});
  CHECK((rab - rab2).cwiseAbs().maxCoeff() < 1e-15);

  HilbertSpace red = reduced_space(s, {"QB", "M1"});
  CHECK(red.dim() == 6);
  CHECK(red.site(0).label == "QB");
  CHECK(red.site(1).label == "M1");
}

TEST_CASE("partial trace of a Bell pair is maximally mixed") {
  HilbertSpace s({{"QA", SiteKind::qubit, 2}, {"QB", SiteKind::qubit, 2}});
  Vec bell = Vec::Zero(4);
  bell(0) = bell(3) = 1 / std::sqrt(2.0);
  Mat rho = bell * bell.adjoint();
  Mat r = partial_trace(s, rho, {"QA"});
  CHECK((r - 0.5 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("embed_state is a right inverse of partial_trace") {
  HilbertSpace s = two_qubit_one_mode();
  std::mt19937 rng(7);
  Mat sub = random_density(4, rng);
  Mat full = embed_state(s, sub, {"QA", "QB"});
  CHECK(std::abs(full.trace() - cplx(1, 0)) < 1e-12);
  Mat back = partial_trace(s, full, {"QA", "QB"});
  CHECK((back - sub).cwiseAbs().maxCoeff() < 1e-12);
  // Unlisted sites sit in their ground state.
  Mat m = partial_trace(s, full, {"M1"});
  CHECK(std::abs(m(0, 0) - cplx(1, 0)) < 1e-12);
}

TEST_CASE("fidelity of pure states reduces to the overlap") {
  std::mt19937 rng(11);
  for (int it = 0; it < 20; ++it) {
    Vec a = random_ket(4, rng);
    Vec b = random_ket(4, rng);
    Mat rho = a * a.adjoint();
    double want = std::norm(a.dot(b));
    CHECK(state_fidelity(rho, b) == doctest::Approx(want).epsilon(1e-10));
    // Uhlmann form must agree on (pure, pure). Rank-1 square roots go
    // through two eigendecompositions, so allow their noise floor.
    Mat sig = b * b.adjoint();
    CHECK(state_fidelity(rho, sig) == doctest::Approx(want).epsilon(1e-6));
  }
  Vec unnorm = Vec::Ones(4);
  CHECK_THROWS(state_fidelity(Mat::Identity(4, 4) / 4.0, unnorm));
}

TEST_CASE("uhlmann fidelity is symmetric and one on identical states") {
  std::mt19937 rng(13);
  Mat a = random_density(4, rng);
  Mat b = random_density(4, rng);
  CHECK(state_fidelity(a, a) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(state_fidelity(a, b) == doctest::Approx(state_fidelity(b, a)).epsilon(1e-9));
  CHECK(state_fidelity(a, b) > 0);
  CHECK(state_fidelity(a, b) < 1);
}

TEST_CASE("pauli basis is hermitian, orthogonal and ordered") {
  for (int n : {1, 2, 3}) {
    auto basis = pauli_basis(n);
    int d = 1 << n;
    REQUIRE(static_cast<int>(basis.size()) == d * d);
    for (const Mat& m : basis) {
      CHECK((m - m.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
    }
    for (std::size_t i = 0; i < basis.size(); ++i)
      for (std::size_t j = i; j < basis.size(); ++j) {
        cplx tr = (basis[i] * basis[j]).trace();
        double want = (i == j) ? d : 0.0;
        CHECK(std::abs(tr - want) < 1e-12);
      }
  }
  // Lexicographic order, first factor most significant: element 1 of the
  // 2-qubit basis is I (x) X.
  auto b2 = pauli_basis(2);
  Mat ix = Mat::Zero(4, 4);
  ix(0, 1) = ix(1, 0) = ix(2, 3) = ix(3, 2) = 1;
  CHECK((b2[1] - ix).cwiseAbs().maxCoeff() < 1e-15);
  Mat xi = Mat::Zero(4, 4);
  xi(0, 2) = xi(2, 0) = xi(1, 3) = xi(3, 1) = 1;
  CHECK((b2[4] - xi).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS(pauli_basis(0));
  CHECK_THROWS(pauli_basis(7));
}

TEST_CASE("physical projection clips negative weight and keeps the trace") {
  Mat m = Mat::Zero(3, 3);
  m(0, 0) = 0.8;
  m(1, 1) = 0.4;
  m(2, 2) = -0.2;
  Mat p = project_to_physical(m, true);
  Eigen::SelfAdjointEigenSolver<Mat> es(p);
  CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  CHECK(std::abs(p.trace() - cplx(1, 0)) < 1e-12);
  // Already physical input passes through untouched.
  Mat ok = Mat::Zero(2, 2);
  ok(0, 0) = 0.25;
  ok(1, 1) = 0.75;
  CHECK((project_to_physical(ok, true) - ok).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("density matrix constructor validates physicality") {
  HilbertSpace s({{"Q", SiteKind::qubit, 2}});
  Mat good = Mat::Zero(2, 2);
  good(0, 0) = 0.5;
  good(1, 1) = 0.5;
  CHECK_NOTHROW(DensityMatrix(s, good));

  Mat off_trace = good * 1.1;
  CHECK_THROWS(DensityMatrix(s, off_trace));

  Mat neg = Mat::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK_THROWS(DensityMatrix(s, neg));

  Mat nonherm = good;
  nonherm(0, 1) = cplx(0.3, 0.1);
  CHECK_THROWS(DensityMatrix(s, nonherm));

  Vec psi = Vec::Zero(2);
  psi(1) = 1;
  DensityMatrix pure = DensityMatrix::pure(s, psi);
  CHECK(std::abs(pure.matrix()(1, 1) - cplx(1, 0)) < 1e-15);
}
