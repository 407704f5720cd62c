#include "qnetsim/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qnetsim {

namespace {

void check_hermitian(const Mat& m, double tol, const char* what) {
  double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (dev > tol) {
    throw std::invalid_argument(std::string(what) + ": not Hermitian, max |m - m^dag| = " +
                                std::to_string(dev));
  }
}

}  // namespace

HilbertSpace::HilbertSpace(std::vector<Site> sites) : sites_(std::move(sites)) {
  if (sites_.empty()) throw std::invalid_argument("HilbertSpace: no sites");
  for (size_t i = 0; i < sites_.size(); ++i) {
    const Site& s = sites_[i];
    if (s.label.empty()) throw std::invalid_argument("HilbertSpace: empty site label");
    if (s.kind == SiteKind::qubit && s.dim != 2 && s.dim != 3)
      throw std::invalid_argument("HilbertSpace: qubit dim must be 2 or 3, site " + s.label);
    if (s.kind == SiteKind::mode && s.dim < 2)
      throw std::invalid_argument("HilbertSpace: mode dim must be >= 2, site " + s.label);
    for (size_t j = 0; j < i; ++j)
      if (sites_[j].label == s.label)
        throw std::invalid_argument("HilbertSpace: duplicate site label " + s.label);
  }
  strides_.assign(sites_.size(), 1);
  for (int i = static_cast<int>(sites_.size()) - 2; i >= 0; --i)
    strides_[i] = strides_[i + 1] * sites_[i + 1].dim;
  dim_ = strides_[0] * sites_[0].dim;
}

const Site& HilbertSpace::site(const std::string& label) const {
  return sites_[site_index(label)];
}

bool HilbertSpace::has_site(const std::string& label) const {
  for (const Site& s : sites_)
    if (s.label == label) return true;
  return false;
}

int HilbertSpace::site_index(const std::string& label) const {
  for (size_t i = 0; i < sites_.size(); ++i)
    if (sites_[i].label == label) return static_cast<int>(i);
  throw std::invalid_argument("HilbertSpace: unknown site label " + label);
}

Vec HilbertSpace::basis_ket(const std::string& label, int level) const {
  int i = site_index(label);
  if (level < 0 || level >= sites_[i].dim)
    throw std::invalid_argument("basis_ket: level out of range for site " + label);
  Vec v = Vec::Zero(dim_);
  v(level * strides_[i]) = 1.0;
  return v;
}

bool HilbertSpace::operator==(const HilbertSpace& o) const {
  if (sites_.size() != o.sites_.size()) return false;
  for (size_t i = 0; i < sites_.size(); ++i) {
    if (sites_[i].label != o.sites_[i].label || sites_[i].kind != o.sites_[i].kind ||
        sites_[i].dim != o.sites_[i].dim)
      return false;
  }
  return true;
}

DensityMatrix::DensityMatrix(HilbertSpace space, Mat m)
    : space_(std::move(space)), m_(std::move(m)) {
  if (m_.rows() != space_.dim() || m_.cols() != space_.dim())
    throw std::invalid_argument("DensityMatrix: matrix dimension mismatch");
  check_hermitian(m_, 1e-10, "DensityMatrix");
  double tr = m_.trace().real();
  if (std::abs(tr - 1.0) > 1e-8)
    throw std::invalid_argument("DensityMatrix: trace deviates from 1 by " +
                                std::to_string(tr - 1.0));
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m_ + m_.adjoint()),
                                        Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  if (lo < -1e-8)
    throw std::invalid_argument("DensityMatrix: negative eigenvalue " + std::to_string(lo));
}

DensityMatrix DensityMatrix::pure(const HilbertSpace& space, const Vec& psi) {
  if (psi.size() != space.dim())
    throw std::invalid_argument("DensityMatrix::pure: vector dimension mismatch");
  double n = psi.norm();
  if (std::abs(n - 1.0) > 1e-10)
    throw std::invalid_argument("DensityMatrix::pure: state not normalized");
  return DensityMatrix(space, psi * psi.adjoint());
}

ProcessMatrix::ProcessMatrix(int n_qubits, Mat chi) : n_(n_qubits), chi_(std::move(chi)) {
  if (n_ != 1 && n_ != 2)
    throw std::invalid_argument("ProcessMatrix: n_qubits must be 1 or 2");
  int d = 1 << (2 * n_);
  if (chi_.rows() != d || chi_.cols() != d)
    throw std::invalid_argument("ProcessMatrix: chi must be 4^n x 4^n");
  check_hermitian(chi_, 1e-10, "ProcessMatrix");
  if (std::abs(chi_.trace().real() - 1.0) > 1e-8)
    throw std::invalid_argument("ProcessMatrix: trace must be 1");
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (chi_ + chi_.adjoint()),
                                        Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-8)
    throw std::invalid_argument("ProcessMatrix: not PSD");
}

Mat embed_operator(const HilbertSpace& space, const std::string& label, const Mat& local) {
  return embed_operator(space, std::vector<std::string>{label}, local);
}

Mat embed_operator(const HilbertSpace& space, const std::vector<std::string>& labels,
                   const Mat& local) {
  if (labels.empty()) throw std::invalid_argument("embed_operator: no target sites");
  std::vector<int> tgt;
  tgt.reserve(labels.size());
  int local_dim = 1;
  for (const std::string& l : labels) {
    int i = space.site_index(l);
    for (int j : tgt)
      if (j == i) throw std::invalid_argument("embed_operator: repeated site " + l);
    tgt.push_back(i);
    local_dim *= space.site(i).dim;
  }
  if (local.rows() != local_dim || local.cols() != local_dim)
    throw std::invalid_argument("embed_operator: local operator dimension mismatch");

  // Weight of each target site inside the local index (first label most
  // significant, matching the full-space convention).
  std::vector<int> lw(tgt.size(), 1);
  for (int i = static_cast<int>(tgt.size()) - 2; i >= 0; --i)
    lw[i] = lw[i + 1] * space.site(tgt[i + 1]).dim;

  // Full-space offsets of each local row/col index.
  std::vector<int> off(local_dim, 0);
  for (int k = 0; k < local_dim; ++k) {
    int o = 0;
    for (size_t t = 0; t < tgt.size(); ++t)
      o += ((k / lw[t]) % space.site(tgt[t]).dim) * space.stride(tgt[t]);
    off[k] = o;
  }

  // Offsets contributed by all non-target sites.
  std::vector<int> rest;
  for (int i = 0; i < space.num_sites(); ++i)
    if (std::find(tgt.begin(), tgt.end(), i) == tgt.end()) rest.push_back(i);
  int rest_dim = 1;
  for (int i : rest) rest_dim *= space.site(i).dim;
  std::vector<int> base(rest_dim, 0);
  for (int k = 0; k < rest_dim; ++k) {
    int o = 0, q = k;
    for (int r = static_cast<int>(rest.size()) - 1; r >= 0; --r) {
      int d = space.site(rest[r]).dim;
      o += (q % d) * space.stride(rest[r]);
      q /= d;
    }
    base[k] = o;
  }

  Mat out = Mat::Zero(space.dim(), space.dim());
  for (int b = 0; b < rest_dim; ++b)
    for (int r = 0; r < local_dim; ++r)
      for (int c = 0; c < local_dim; ++c)
        out(base[b] + off[r], base[b] + off[c]) = local(r, c);
  return out;
}

Mat embed_state(const HilbertSpace& space, const Mat& rho_sub,
                const std::vector<std::string>& sites) {
  if (sites.empty()) throw std::invalid_argument("embed_state: no target sites");
  std::vector<int> tgt;
  tgt.reserve(sites.size());
  int local_dim = 1;
  for (const std::string& l : sites) {
    int i = space.site_index(l);
    for (int j : tgt)
      if (j == i) throw std::invalid_argument("embed_state: repeated site " + l);
    tgt.push_back(i);
    local_dim *= space.site(i).dim;
  }
  if (rho_sub.rows() != local_dim || rho_sub.cols() != local_dim)
    throw std::invalid_argument("embed_state: matrix dimension mismatch");

  std::vector<int> lw(tgt.size(), 1);
  for (int i = static_cast<int>(tgt.size()) - 2; i >= 0; --i)
    lw[i] = lw[i + 1] * space.site(tgt[i + 1]).dim;
  std::vector<int> off(local_dim, 0);
  for (int k = 0; k < local_dim; ++k) {
    int o = 0;
    for (size_t t = 0; t < tgt.size(); ++t)
      o += ((k / lw[t]) % space.site(tgt[t]).dim) * space.stride(tgt[t]);
    off[k] = o;
  }

  Mat out = Mat::Zero(space.dim(), space.dim());
  for (int r = 0; r < local_dim; ++r)
    for (int c = 0; c < local_dim; ++c) out(off[r], off[c]) = rho_sub(r, c);
  return out;
}

HilbertSpace reduced_space(const HilbertSpace& space, const std::vector<std::string>& keep) {
  std::vector<Site> kept;
  for (int i = 0; i < space.num_sites(); ++i) {
    const Site& s = space.site(i);
    if (std::find(keep.begin(), keep.end(), s.label) != keep.end()) kept.push_back(s);
  }
  if (kept.size() != keep.size())
    throw std::invalid_argument("reduced_space: unknown or repeated site label");
  return HilbertSpace(kept);
}

Mat partial_trace(const HilbertSpace& space, const Mat& rho,
                  const std::vector<std::string>& keep) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
  if (rho.rows() != space.dim() || rho.cols() != space.dim())
    throw std::invalid_argument("partial_trace: matrix dimension mismatch");
  std::vector<int> kept, traced;
  for (int i = 0; i < space.num_sites(); ++i) {
    if (std::find(keep.begin(), keep.end(), space.site(i).label) != keep.end())
      kept.push_back(i);
    else
      traced.push_back(i);
  }
  if (kept.size() != keep.size())
    throw std::invalid_argument("partial_trace: unknown or repeated site label");

  int dk = 1;
  for (int i : kept) dk *= space.site(i).dim;
  int dt = 1;
  for (int i : traced) dt *= space.site(i).dim;

  // Precompute full-space offsets for every kept and traced multi-index.
  std::vector<int> koff(dk, 0);
  for (int k = 0; k < dk; ++k) {
    int o = 0, q = k;
    for (int r = static_cast<int>(kept.size()) - 1; r >= 0; --r) {
      int d = space.site(kept[r]).dim;
      o += (q % d) * space.stride(kept[r]);
      q /= d;
    }
    koff[k] = o;
  }
  std::vector<int> toff(dt, 0);
  for (int k = 0; k < dt; ++k) {
    int o = 0, q = k;
    for (int r = static_cast<int>(traced.size()) - 1; r >= 0; --r) {
      int d = space.site(traced[r]).dim;
      o += (q % d) * space.stride(traced[r]);
      q /= d;
    }
    toff[k] = o;
  }

  Mat out = Mat::Zero(dk, dk);
  for (int r = 0; r < dk; ++r)
    for (int c = 0; c < dk; ++c) {
      cplx s = 0.0;
      for (int t = 0; t < dt; ++t) s += rho(koff[r] + toff[t], koff[c] + toff[t]);
      out(r, c) = s;
    }
  return out;
}

double state_fidelity(const Mat& rho, const Vec& psi) {
  if (rho.rows() != psi.size())
    throw std::invalid_argument("state_fidelity: dimension mismatch");
  if (std::abs(psi.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("state_fidelity: target not normalized");
  cplx f = psi.adjoint() * rho * psi;
  if (std::abs(f.imag()) > 1e-10)
    throw std::runtime_error("state_fidelity: imaginary part too large");
  return f.real();
}

double state_fidelity(const Mat& rho, const Mat& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
    throw std::invalid_argument("state_fidelity: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho + rho.adjoint()));
  Vec ev = es.eigenvalues().cast<cplx>();
  for (int i = 0; i < ev.size(); ++i)
    ev(i) = std::sqrt(std::max(0.0, ev(i).real()));
  Mat sq = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  Mat a = sq * sigma * sq;
  Eigen::SelfAdjointEigenSolver<Mat> es2(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (int i = 0; i < es2.eigenvalues().size(); ++i)
    s += std::sqrt(std::max(0.0, es2.eigenvalues()(i)));
  return s * s;
}

double process_fidelity(const Mat& chi, const Mat& chi_ideal) {
  if (chi.rows() != chi_ideal.rows() || chi.cols() != chi_ideal.cols())
    throw std::invalid_argument("process_fidelity: size mismatch");
  cplx f = (chi * chi_ideal).trace();
  if (std::abs(f.imag()) > 1e-10)
    throw std::runtime_error("process_fidelity: imaginary part too large");
  return f.real();
}

double process_fidelity(const ProcessMatrix& chi, const ProcessMatrix& ideal) {
  if (chi.n_qubits() != ideal.n_qubits())
    throw std::invalid_argument("process_fidelity: qubit count mismatch");
  return process_fidelity(chi.chi(), ideal.chi());
}

Mat project_to_physical(const Mat& m, bool unit_trace) {
  if (m.rows() != m.cols()) throw std::invalid_argument("project_to_physical: not square");
  check_hermitian(m, 1e-8, "project_to_physical");
  Mat h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  Eigen::VectorXd ev = es.eigenvalues();

  if (unit_trace) {
    double tr = ev.sum();
    if (tr <= 0.0)
      throw std::invalid_argument("project_to_physical: nonpositive trace");
    ev /= tr;
  }

  // Clip negatives to zero, spreading the clipped weight uniformly over the
  // still-positive eigenvalues; repeat until the spectrum is nonnegative.
  for (int iter = 0; iter < ev.size() + 1; ++iter) {
    double deficit = 0.0;
    int n_pos = 0;
    for (int i = 0; i < ev.size(); ++i) {
      if (ev(i) < 0.0) {
        deficit += ev(i);
        ev(i) = 0.0;
      } else if (ev(i) > 0.0) {
        ++n_pos;
      }
    }
    if (deficit == 0.0) break;
    if (n_pos == 0) break;
    double shift = deficit / n_pos;
    for (int i = 0; i < ev.size(); ++i)
      if (ev(i) > 0.0) ev(i) += shift;
  }
  for (int i = 0; i < ev.size(); ++i) ev(i) = std::max(0.0, ev(i));

  return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

Mat pauli_i() { return Mat::Identity(2, 2); }

Mat pauli_x() {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Mat pauli_y() {
  Mat m(2, 2);
  m << cplx(0, 0), cplx(0, -1), cplx(0, 1), cplx(0, 0);
  return m;
}

Mat pauli_z() {
  Mat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

std::vector<Mat> pauli_basis(int n_qubits) {
  if (n_qubits < 1 || n_qubits > 6)
    throw std::invalid_argument("pauli_basis: n_qubits must be in [1, 6]");
  std::vector<Mat> one = {pauli_i(), pauli_x(), pauli_y(), pauli_z()};
  std::vector<Mat> out = one;
  for (int q = 1; q < n_qubits; ++q) {
    std::vector<Mat> next;
    next.reserve(out.size() * 4);
    for (const Mat& a : out)
      for (const Mat& b : one) {
        const int ra = static_cast<int>(a.rows());
        Mat k(2 * ra, 2 * ra);
        for (int i = 0; i < ra; ++i)
          for (int j = 0; j < ra; ++j) k.block(2 * i, 2 * j, 2, 2) = a(i, j) * b;
        next.push_back(std::move(k));
      }
    out = std::move(next);
  }
  return out;
}

}  // namespace qnetsim
