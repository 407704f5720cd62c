#include "qnetsim/benchmarking.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>

#include "json.hpp"
#include "qnetsim/io.hpp"

namespace qnetsim {
namespace {

constexpr double kSqrtHalf = 0.70710678118654752440;

Mat rot(const Mat& axis, double angle) {
  Mat u = std::cos(angle / 2) * Mat::Identity(2, 2) -
          cplx(0, std::sin(angle / 2)) * axis;
  return u;
}

struct Generator {
  std::string name;
  Mat unitary;
};

const std::vector<Generator>& generators() {
  static const std::vector<Generator> gens = [] {
    Mat x = pauli_x(), y = pauli_y();
    std::vector<Generator> g;
    g.push_back({"X/2", rot(x, M_PI / 2)});
    g.push_back({"-X/2", rot(x, -M_PI / 2)});
    g.push_back({"Y/2", rot(y, M_PI / 2)});
    g.push_back({"-Y/2", rot(y, -M_PI / 2)});
    g.push_back({"X", rot(x, M_PI)});
    g.push_back({"Y", rot(y, M_PI)});
    return g;
  }();
  return gens;
}

// Key invariant under global phase. Every nonzero entry of a 1-qubit
// Clifford has magnitude >= 1/sqrt(2), so the first entry above 0.5 is a
// deterministic phase reference no matter which product produced the matrix.
std::string phase_key(const Mat& u) {
  cplx ph(1, 0);
  bool found = false;
  for (int i = 0; i < 2 && !found; ++i)
    for (int j = 0; j < 2 && !found; ++j)
      if (std::abs(u(i, j)) > 0.5) {
        ph = u(i, j) / std::abs(u(i, j));
        found = true;
      }
  char buf[128];
  std::string key;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      cplx v = u(i, j) / ph;
      double re = std::round(v.real() * 1e6) / 1e6;
      double im = std::round(v.imag() * 1e6) / 1e6;
      if (re == 0.0) re = 0.0;
      if (im == 0.0) im = 0.0;
      std::snprintf(buf, sizeof buf, "%.6f,%.6f;", re, im);
      key += buf;
    }
  return key;
}

Mat kron2(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat amplitude_damp_1q(const Mat& rho, double gamma) {
  Mat k0(2, 2), k1(2, 2);
  k0 << 1, 0, 0, std::sqrt(1.0 - gamma);
  k1 << 0, std::sqrt(gamma), 0, 0;
  return k0 * rho * k0.adjoint() + k1 * rho * k1.adjoint();
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(seed + 0x9e3779b97f4a7c15ULL * (a + 1)) +
                    0xbf58476d1ce4e5b9ULL * (b + 1));
}

double golden_min(const std::function<double(double)>& f, double lo, double hi) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

const std::vector<CliffordElement>& clifford_group_1q() {
  static const std::vector<CliffordElement> group = [] {
    std::vector<CliffordElement> elems;
    std::map<std::string, int> seen;

    CliffordElement id;
    id.index = 0;
    id.unitary = Mat::Identity(2, 2);
    elems.push_back(id);
    seen[phase_key(id.unitary)] = 0;

    // Breadth-first closure; the first path found gives each element its
    // shortest generator decomposition.
    for (size_t head = 0; head < elems.size(); ++head) {
      CliffordElement cur = elems[head];
      for (const Generator& g : generators()) {
        Mat u = g.unitary * cur.unitary;
        std::string key = phase_key(u);
        if (seen.count(key)) continue;
        CliffordElement next;
        next.index = static_cast<int>(elems.size());
        next.unitary = u;
        next.decomposition = cur.decomposition;
        next.decomposition.push_back(g.name);
        seen[key] = next.index;
        elems.push_back(std::move(next));
      }
    }
    if (elems.size() != 24)
      throw std::logic_error("clifford closure produced " +
                             std::to_string(elems.size()) + " elements");
    return elems;
  }();
  return group;
}

Mat apply_error_channel(const Mat& rho, const ErrorChannelSpec& error) {
  int d = static_cast<int>(rho.rows());
  switch (error.kind) {
    case ErrorChannelSpec::Kind::none:
      return rho;
    case ErrorChannelSpec::Kind::depolarizing: {
      double q = error.strength;
      if (q < 0 || q > 1)
        throw std::invalid_argument("depolarizing strength must be in [0, 1]");
      return (1.0 - q) * rho +
             q * rho.trace() / static_cast<double>(d) * Mat::Identity(d, d);
    }
    case ErrorChannelSpec::Kind::amplitude_damping: {
      if (d == 2) return amplitude_damp_1q(rho, error.strength);
      if (d != 4) throw std::invalid_argument("error channel supports 1-2 qubits");
      Mat k0(2, 2), k1(2, 2);
      double gamma = error.strength;
      k0 << 1, 0, 0, std::sqrt(1.0 - gamma);
      k1 << 0, std::sqrt(gamma), 0, 0;
      Mat out = Mat::Zero(4, 4);
      for (const Mat& ka : {k0, k1})
        for (const Mat& kb : {k0, k1}) {
          Mat k = kron2(ka, kb);
          out += k * rho * k.adjoint();
        }
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

DecayFit fit_exponential_decay(const std::vector<int>& x,
                               const std::vector<double>& y, bool fix_b_zero) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("decay fit needs at least two points");
  int n = static_cast<int>(x.size());

  // Linear subproblem: best (a, b) for a fixed p.
  auto sse_at = [&](double p, double* a_out, double* b_out) {
    double s_vv = 0, s_v = 0, s_y = 0, s_vy = 0;
    for (int i = 0; i < n; ++i) {
      double v = std::pow(p, x[i]);
      s_vv += v * v;
      s_v += v;
      s_y += y[i];
      s_vy += v * y[i];
    }
    double a, b;
    if (fix_b_zero) {
      a = s_vv > 0 ? s_vy / s_vv : 0.0;
      b = 0.0;
    } else {
      double det = n * s_vv - s_v * s_v;
      if (std::abs(det) < 1e-30) {
        a = 0.0;
        b = s_y / n;
      } else {
        a = (n * s_vy - s_v * s_y) / det;
        b = (s_vv * s_y - s_v * s_vy) / det;
      }
    }
    double sse = 0;
    for (int i = 0; i < n; ++i) {
      double r = y[i] - (a * std::pow(p, x[i]) + b);
      sse += r * r;
    }
    if (a_out) *a_out = a;
    if (b_out) *b_out = b;
    return sse;
  };

  double p_best = golden_min([&](double p) { return sse_at(p, nullptr, nullptr); },
                             1e-6, 1.0 - 1e-9);
  DecayFit fit;
  double sse = sse_at(p_best, &fit.a, &fit.b);

  // A constant series carries no decay information; report p = 1 rather
  // than an arbitrary interior minimizer of a flat objective.
  double mean = 0;
  for (double v : y) mean += v;
  mean /= n;
  double sse_const = 0;
  for (double v : y) sse_const += (v - mean) * (v - mean);
  if (sse_const <= sse + 1e-15) {
    fit.p = 1.0;
    fit.a = fix_b_zero ? mean : 0.0;
    fit.b = fix_b_zero ? 0.0 : mean;
  } else {
    fit.p = p_best;
  }
  return fit;
}

RbResult rb_run(const std::vector<int>& lengths, int n_sequences,
                const ErrorChannelSpec& error, std::uint64_t seed) {
  if (lengths.empty()) throw std::invalid_argument("rb_run: no sequence lengths");
  for (int m : lengths)
    if (m < 1) throw std::invalid_argument("rb_run: lengths must be >= 1");
  if (n_sequences < 10)
    throw std::invalid_argument("rb_run: need at least 10 sequences");

  const auto& group = clifford_group_1q();

  RbResult res;
  std::vector<int> xs;
  std::vector<double> ys;
  for (size_t li = 0; li < lengths.size(); ++li) {
    int m = lengths[li];
    double sum = 0, sum2 = 0;
    for (int s = 0; s < n_sequences; ++s) {
      std::mt19937_64 rng(derive_seed(seed, li, s));

      Mat rho = Mat::Zero(2, 2);
      rho(0, 0) = 1.0;
      Mat u_total = Mat::Identity(2, 2);
      for (int g = 0; g < m; ++g) {
        const Mat& u = group[rng() % group.size()].unitary;
        rho = u * rho * u.adjoint();
        rho = apply_error_channel(rho, error);
        u_total = u * u_total;
      }
      // Recovery: the group element that undoes the accumulated unitary.
      const CliffordElement* rec = nullptr;
      for (const auto& el : group) {
        Mat prod = el.unitary * u_total;
        if (std::abs(std::abs(prod(0, 0)) - 1.0) < 1e-9 &&
            std::abs(prod(0, 1)) < 1e-9) {
          rec = &el;
          break;
        }
      }
      if (!rec) throw std::logic_error("rb_run: no recovery Clifford found");
      rho = rec->unitary * rho * rec->unitary.adjoint();
      rho = apply_error_channel(rho, error);

      double ret = rho(0, 0).real();
      sum += ret;
      sum2 += ret * ret;
    }
    double mean = sum / n_sequences;
    double var = std::max(0.0, sum2 / n_sequences - mean * mean);
    res.points.push_back({m, mean, std::sqrt(var)});
    xs.push_back(m);
    ys.push_back(mean);
  }

  res.fit = fit_exponential_decay(xs, ys, /*fix_b_zero=*/false);
  res.error_per_clifford = (1.0 - res.fit.p) / 2.0;
  res.avg_gate_fidelity = 1.0 - res.error_per_clifford;
  return res;
}

XebResult xeb_run(const std::vector<int>& depths, int n_circuits,
                  const ErrorChannelSpec& two_qubit_error, std::uint64_t seed,
                  const ErrorChannelSpec& single_qubit_error) {
  if (depths.empty()) throw std::invalid_argument("xeb_run: no depths");
  if (n_circuits < 1) throw std::invalid_argument("xeb_run: need circuits");

  // Single-qubit layer gate set: quarter turns about X, Y and the diagonal
  // W = (X + Y)/sqrt(2).
  Mat x = pauli_x(), y = pauli_y();
  Mat w = kSqrtHalf * (x + y);
  std::vector<Mat> layer_gates{rot(x, M_PI / 2),  rot(x, -M_PI / 2),
                               rot(y, M_PI / 2),  rot(y, -M_PI / 2),
                               rot(w, M_PI / 2),  rot(w, -M_PI / 2)};
  Mat cz = Mat::Identity(4, 4);
  cz(3, 3) = -1.0;

  XebResult res;
  std::vector<int> xs;
  std::vector<double> ys;
  for (size_t di = 0; di < depths.size(); ++di) {
    int depth = depths[di];
    double num_sum = 0, den_sum = 0;
    for (int c = 0; c < n_circuits; ++c) {
      std::mt19937_64 rng(derive_seed(seed, di, c));

      Vec psi = Vec::Zero(4);
      psi(0) = 1.0;
      Mat rho = psi * psi.adjoint();
      for (int d = 0; d < depth; ++d) {
        Mat g0 = layer_gates[rng() % layer_gates.size()];
        Mat g1 = layer_gates[rng() % layer_gates.size()];
        Mat u = cz * kron2(g0, g1);
        psi = u * psi;
        rho = u * rho * u.adjoint();
        if (single_qubit_error.kind != ErrorChannelSpec::Kind::none) {
          Mat i2 = Mat::Identity(2, 2);
          // qubit channels act independently; expand each to the pair
          if (single_qubit_error.kind == ErrorChannelSpec::Kind::depolarizing) {
            double q = single_qubit_error.strength;
            for (int qb = 0; qb < 2; ++qb) {
              Mat acc = Mat::Zero(4, 4);
              for (const Mat& p : {pauli_i(), x, y, pauli_z()}) {
                Mat pe = qb == 0 ? kron2(p, i2) : kron2(i2, p);
                acc += pe * rho * pe.adjoint();
              }
              rho = (1.0 - q) * rho + q / 4.0 * acc;
            }
          } else {
            for (int qb = 0; qb < 2; ++qb) {
              Mat k0(2, 2), k1(2, 2);
              double gamma = single_qubit_error.strength;
              k0 << 1, 0, 0, std::sqrt(1.0 - gamma);
              k1 << 0, std::sqrt(gamma), 0, 0;
              Mat a = qb == 0 ? kron2(k0, i2) : kron2(i2, k0);
              Mat b = qb == 0 ? kron2(k1, i2) : kron2(i2, k1);
              rho = a * rho * a.adjoint() + b * rho * b.adjoint();
            }
          }
        }
        rho = apply_error_channel(rho, two_qubit_error);
      }

      double pn_pi = 0, pi_pi = 0;
      for (int outcome = 0; outcome < 4; ++outcome) {
        double p_ideal = std::norm(psi(outcome));
        pn_pi += rho(outcome, outcome).real() * p_ideal;
        pi_pi += p_ideal * p_ideal;
      }
      num_sum += 4.0 * pn_pi - 1.0;
      den_sum += 4.0 * pi_pi - 1.0;
    }
    // A uniform ideal distribution (always the case at depth 1, where every
    // layer gate turns |0> into an equal superposition) carries no XEB
    // signal; such depths are dropped rather than fit through 0/0 noise.
    if (std::abs(den_sum) < 1e-9 * n_circuits) continue;
    double f = num_sum / den_sum;
    res.points.push_back({depth, f});
    xs.push_back(depth);
    ys.push_back(f);
  }
  if (xs.empty())
    throw std::runtime_error("xeb_run: every requested depth is degenerate");

  res.fit = fit_exponential_decay(xs, ys, /*fix_b_zero=*/true);
  res.error_per_cycle = 1.0 - res.fit.p;
  return res;
}

void write_rb_csv(const std::string& path, const RbResult& result) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << "length,mean_return_prob,std\n";
  char buf[160];
  for (const auto& pt : result.points) {
    std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g\n", pt.length,
                  pt.mean_return_prob, pt.std_dev);
    f << buf;
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

void write_xeb_csv(const std::string& path, const XebResult& result) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << "depth,fidelity\n";
  char buf[96];
  for (const auto& pt : result.points) {
    std::snprintf(buf, sizeof buf, "%d,%.12g\n", pt.depth, pt.fidelity);
    f << buf;
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string rb_fit_json(const RbResult& result) {
  nlohmann::json j;
  j["schema"] = "qnetsim-rb-fit-v1";
  j["a"] = result.fit.a;
  j["p"] = result.fit.p;
  j["b"] = result.fit.b;
  j["error_per_clifford"] = result.error_per_clifford;
  j["avg_gate_fidelity"] = result.avg_gate_fidelity;
  return j.dump(2) + "\n";
}

std::string xeb_fit_json(const XebResult& result) {
  nlohmann::json j;
  j["schema"] = "qnetsim-xeb-fit-v1";
  j["a"] = result.fit.a;
  j["p"] = result.fit.p;
  j["error_per_cycle"] = result.error_per_cycle;
  return j.dump(2) + "\n";
}

}  // namespace qnetsim
