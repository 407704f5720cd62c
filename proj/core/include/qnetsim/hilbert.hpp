#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

namespace qnetsim {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

enum class SiteKind { qubit, mode };

struct Site {
  std::string label;
  SiteKind kind = SiteKind::qubit;
  int dim = 2;
};

// Composite Hilbert space over an ordered list of sites. Tensor-product
// ordering is the declaration order: the first site varies slowest
// (most significant digit of the basis index).
class HilbertSpace {
 public:
  HilbertSpace() = default;
  explicit HilbertSpace(std::vector<Site> sites);

  int dim() const { return dim_; }
  int num_sites() const { return static_cast<int>(sites_.size()); }
  const std::vector<Site>& sites() const { return sites_; }
  const Site& site(int i) const { return sites_.at(i); }
  const Site& site(const std::string& label) const;
  bool has_site(const std::string& label) const;
  int site_index(const std::string& label) const;  // throws if missing

  // Stride of site i: basis index advances by this much when the site's
  // level increments by one.
  int stride(int i) const { return strides_.at(i); }

  // Digit of `basis_index` belonging to site i.
  int level_of(int basis_index, int i) const {
    return (basis_index / strides_[i]) % sites_[i].dim;
  }

  // Basis vector with the given level on one site, ground elsewhere.
  Vec basis_ket(const std::string& label, int level) const;

  bool operator==(const HilbertSpace& o) const;

 private:
  std::vector<Site> sites_;
  std::vector<int> strides_;
  int dim_ = 1;
};

struct Operator {
  HilbertSpace space;
  Mat matrix;
};

// Density matrix with validated physicality invariants:
// Hermitian within 1e-10, trace within 1e-8 of 1, min eigenvalue >= -1e-8.
class DensityMatrix {
 public:
  DensityMatrix(HilbertSpace space, Mat m);
  static DensityMatrix pure(const HilbertSpace& space, const Vec& psi);

  const HilbertSpace& space() const { return space_; }
  const Mat& matrix() const { return m_; }

 private:
  HilbertSpace space_;
  Mat m_;
};

// Chi matrix in the Pauli basis {I,X,Y,Z}^n, unit-trace convention.
class ProcessMatrix {
 public:
  ProcessMatrix(int n_qubits, Mat chi);

  int n_qubits() const { return n_; }
  const Mat& chi() const { return chi_; }

 private:
  int n_;
  Mat chi_;
};

// I x ... x local x ... x I with `local` at the labeled site.
Mat embed_operator(const HilbertSpace& space, const std::string& label,
                   const Mat& local);

// Multi-site embedding: `local` acts on the listed sites in the listed
// order (its row/col index raveled with the first label most significant).
Mat embed_operator(const HilbertSpace& space,
                   const std::vector<std::string>& labels, const Mat& local);

// Reduced matrix on the kept sites, which stay in their original relative
// order regardless of the order given here.
Mat partial_trace(const HilbertSpace& space, const Mat& rho,
                  const std::vector<std::string>& keep);
HilbertSpace reduced_space(const HilbertSpace& space,
                           const std::vector<std::string>& keep);

// Inverse direction: place a matrix defined on the listed sites (first label
// most significant) into the full space, every other site in its ground
// state. partial_trace(space, embed_state(space, r, s), s) == r.
Mat embed_state(const HilbertSpace& space, const Mat& rho_sub,
                const std::vector<std::string>& sites);

// <psi|rho|psi>. Target must be normalized within 1e-10.
double state_fidelity(const Mat& rho, const Vec& psi);
// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 for two states.
double state_fidelity(const Mat& rho, const Mat& sigma);

// Tr(chi * chi_ideal), real part; imaginary part must vanish within 1e-10.
double process_fidelity(const ProcessMatrix& chi, const ProcessMatrix& ideal);
double process_fidelity(const Mat& chi, const Mat& chi_ideal);

// Nearest PSD matrix by eigenvalue clipping; negative weight is
// redistributed uniformly over the remaining positive eigenvalues until
// none are negative. With unit_trace the spectrum is first scaled to sum
// to one.
Mat project_to_physical(const Mat& m, bool unit_trace);

// {I,X,Y,Z}^n in lexicographic order, first factor most significant.
std::vector<Mat> pauli_basis(int n_qubits);

// Single-qubit Paulis.
Mat pauli_i();
Mat pauli_x();
Mat pauli_y();
Mat pauli_z();

}  // namespace qnetsim
