#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>

#include "doctest.h"
#include "qnetsim/device.hpp"
#include "qnetsim/protocols.hpp"
#include "qnetsim/tomography.hpp"

using namespace qnetsim;

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

Mat cz_ideal4() {
  Mat u = Mat::Identity(4, 4);
  u(3, 3) = -1;
  return u;
}

Vec ghz_ket(int dim) {
  Vec v = Vec::Zero(dim);
  v(0) = 1 / std::sqrt(2.0);
  v(dim - 1) = 1 / std::sqrt(2.0);
  return v;
}

}  // namespace

TEST_CASE("calibrated transfer operating points") {
  TransferParams full = transfer_defaults(TransferVariant::full);
  CHECK(full.detuning_a_rad / kTau / 1e6 == doctest::Approx(-0.95).epsilon(1e-12));
  CHECK(full.detuning_b_rad / kTau / 1e6 == doctest::Approx(-1.79).epsilon(1e-12));
  CHECK(full.g_a_rad / kTau / 1e6 == doctest::Approx(4.08).epsilon(1e-12));
  CHECK(full.g_b_rad / kTau / 1e6 == doctest::Approx(4.06).epsilon(1e-12));
  CHECK(full.tau_s == doctest::Approx(72e-9).epsilon(1e-12));
  CHECK(full.delta_tau_s == doctest::Approx(13e-9).epsilon(1e-12));

  TransferParams half = transfer_defaults(TransferVariant::half);
  CHECK(half.detuning_a_rad / kTau / 1e6 == doctest::Approx(4.7).epsilon(1e-12));
  CHECK(half.detuning_b_rad / kTau / 1e6 == doctest::Approx(5.4).epsilon(1e-12));
  CHECK(half.g_a_rad / kTau / 1e6 == doctest::Approx(2.89).epsilon(1e-12));
  CHECK(half.g_b_rad / kTau / 1e6 == doctest::Approx(6.11).epsilon(1e-12));
  CHECK(half.tau_s == doctest::Approx(62.8e-9).epsilon(1e-12));
  CHECK(half.delta_tau_s == doctest::Approx(5e-9).epsilon(1e-12));
}

TEST_CASE("transfer schedule opens the couplers in three staggered frames") {
  DeviceConfig dev = default_device();
  TransferParams p = transfer_defaults(TransferVariant::full);
  PulseSchedule sched = schedule_state_transfer(p, dev);
  REQUIRE(sched.items.size() == 3);

  const auto& lead = std::get<ControlFrame>(sched.items[0]);
  const auto& both = std::get<ControlFrame>(sched.items[1]);
  const auto& lag = std::get<ControlFrame>(sched.items[2]);
  // Each coupler stays on for a window of tau; the receiver lags by
  // delta_tau, so the legs run delta_tau / tau - delta_tau / delta_tau.
  CHECK(lead.duration_s == doctest::Approx(13e-9).epsilon(1e-12));
  CHECK(both.duration_s == doctest::Approx(59e-9).epsilon(1e-12));
  CHECK(lag.duration_s == doctest::Approx(13e-9).epsilon(1e-12));
  CHECK(lead.g_a_rad == p.g_a_rad);
  CHECK(lead.g_b_rad == 0.0);
  CHECK(both.g_a_rad == p.g_a_rad);
  CHECK(both.g_b_rad == p.g_b_rad);
  CHECK(lag.g_a_rad == 0.0);
  CHECK(lag.g_b_rad == p.g_b_rad);

  // Symmetric window: a single frame with both couplers on.
  TransferParams sym = p;
  sym.delta_tau_s = 0;
  PulseSchedule ssched = schedule_state_transfer(sym, dev);
  REQUIRE(ssched.items.size() == 1);
  CHECK(std::get<ControlFrame>(ssched.items[0]).duration_s ==
        doctest::Approx(72e-9).epsilon(1e-12));

  HilbertSpace space = transfer_space(dev);
  CHECK(space.num_sites() == 7);
  CHECK(space.site(0).label == "Q2A");
  CHECK(space.site(1).label == "Q2B");
  CHECK(space.site(2).label == "M1");
  CHECK(space.site(6).label == "M5");
  CHECK(space.dim() == 128);
}

TEST_CASE("coupler-loaded T1 interpolates through the measured anchor") {
  // The anchor itself: 7 us intrinsic loaded to 1.4 us at g/2pi = 5.5 MHz.
  CHECK(loaded_t1(7e-6, 5.5e6, 1.0) == doctest::Approx(1.4e-6).epsilon(1e-12));
  // Rate model: the added rate scales with g^2, so half the coupling puts
  // 1/T1 at 1/7 + (1/1.4 - 1/7)/4 = 2/7 per us, i.e. exactly 3.5 us.
  CHECK(loaded_t1(7e-6, 2.75e6, 1.0) == doctest::Approx(3.5e-6).epsilon(1e-9));
  // Zero coupling: intrinsic lifetime untouched.
  CHECK(loaded_t1(7e-6, 0.0, 1.0) == doctest::Approx(7e-6).epsilon(1e-12));
}

TEST_CASE("state transfer lands 0.871 of the excitation on the receiver") {
  DeviceConfig dev = default_device();
  TransferParams p = transfer_defaults(TransferVariant::full);
  DecoherenceOverrides ov = transfer_overrides(dev, p, true);
  TransferRun run = run_state_transfer(dev, p, ov);

  CHECK(run.receiver_population == doctest::Approx(0.87107481258670005).epsilon(1e-12));
  CHECK(run.receiver_population > 0.86);
  CHECK(run.receiver_population < 0.90);
  CHECK(run.trajectory.max_trace_drift < 1e-9);

  // Without qubit relaxation only the channel losses remain.
  DecoherenceOverrides t1_off;
  double inf = std::numeric_limits<double>::infinity();
  t1_off["Q2A"].t1_s = inf;
  t1_off["Q2B"].t1_s = inf;
  TransferRun lossier = run_state_transfer(dev, p, t1_off);
  CHECK(lossier.receiver_population ==
        doctest::Approx(0.89550478924535171).epsilon(1e-10));
  CHECK(lossier.receiver_population > run.receiver_population);
}

TEST_CASE("transfer process fidelity lands at 0.929 anchored, 0.922 flat") {
  DeviceConfig dev = default_device();
  TransferParams p = transfer_defaults(TransferVariant::full);
  ProcessMatrix ideal = process_of_unitary(Mat::Identity(2, 2));

  ProcessMatrix anchored =
      transfer_process_matrix(dev, p, transfer_overrides(dev, p, true));
  double f_anch = process_fidelity(anchored, ideal);
  CHECK(f_anch == doctest::Approx(0.92934686851432358).epsilon(1e-10));
  CHECK(std::abs(anchored.chi().trace().real() - 1.0) < 1e-9);

  ProcessMatrix flat =
      transfer_process_matrix(dev, p, transfer_overrides(dev, p, false, 1.4e-6));
  CHECK(process_fidelity(flat, ideal) ==
        doctest::Approx(0.92212043426857448).epsilon(1e-10));
}

TEST_CASE("half transfer plus local corrections yields a 0.918 Bell pair") {
  DeviceConfig dev = default_device();
  TransferParams p = transfer_defaults(TransferVariant::half);
  BellResult bell = run_bell_st_half(dev, p, transfer_overrides(dev, p, false, 1.4e-6));
  CHECK(bell.rho.rows() == 4);
  CHECK(std::abs(bell.rho.trace().real() - 1.0) < 1e-9);
  CHECK(bell.fidelity == doctest::Approx(0.91810182675381469).epsilon(1e-12));
}

TEST_CASE("gate windows follow the closed forms") {
  double g = kTau * 16.7e6;
  CHECK(iswap_duration(g) * 1e9 == doctest::Approx(14.970059880239521).epsilon(1e-12));
  CHECK(cz_duration(g) * 1e9 == doctest::Approx(21.170861712172083).epsilon(1e-12));
  CHECK(iswap_duration(g) == doctest::Approx(M_PI / (2 * g)).epsilon(1e-15));
  CHECK(cz_duration(g) == doctest::Approx(M_PI / (std::sqrt(2.0) * g)).epsilon(1e-15));
}

TEST_CASE("cz calibration pins the conditional phase at pi") {
  DeviceConfig dev = default_device();
  CzCalibration cal = calibrate_cz("A", 1, dev);
  CHECK(cal.duration_s == doctest::Approx(cz_duration(kTau * 16.7e6)).epsilon(1e-15));
  CHECK(cal.stark_rad / kTau / 1e6 == doctest::Approx(1.4898672403724227).epsilon(1e-9));
  // Detuning = qubit anharmonicity offset plus the calibrated Stark shift.
  CHECK(cal.detuning_rad / kTau / 1e6 == doctest::Approx(-148.51013275962757).epsilon(1e-9));

  Mat blk = cz_qubit_block("A", 1, dev);
  REQUIRE(blk.rows() == 4);
  // Excitation number is conserved, so the only off-diagonal weight is the
  // residual ge<->eg exchange the detuned frame cannot fully suppress
  // (order g/Delta); everything coupling different sectors is exactly zero.
  double off = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j && !((i == 1 && j == 2) || (i == 2 && j == 1)))
        off = std::max(off, std::abs(blk(i, j)));
  CHECK(off < 1e-12);
  CHECK(std::abs(blk(1, 2)) == doctest::Approx(std::abs(blk(2, 1))).epsilon(1e-9));
  CHECK(std::abs(blk(1, 2)) < 0.15);
  CHECK(std::abs(blk(0, 0)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(blk(1, 1)) == doctest::Approx(0.98997384675206224).epsilon(1e-9));
  CHECK(std::abs(blk(2, 2)) == doctest::Approx(0.98997384675206201).epsilon(1e-9));
  CHECK(std::abs(blk(3, 3)) == doctest::Approx(0.99239447483032195).epsilon(1e-9));
  // Phase pattern (1, 1, 1, -1).
  CHECK(std::abs(std::arg(blk(0, 0))) < 1e-9);
  CHECK(std::abs(std::arg(blk(1, 1))) < 1e-9);
  CHECK(std::abs(std::arg(blk(2, 2))) < 1e-9);
  CHECK(std::abs(std::abs(std::arg(blk(3, 3))) - M_PI) < 1e-9);
  // Plain unitary overlap with the ideal CZ, leakage included.
  double overlap = std::norm((cz_ideal4().adjoint() * blk).trace()) / 16.0;
  CHECK(overlap == doctest::Approx(0.986219).epsilon(1e-5));
}

TEST_CASE("cz process tomography at the calibrated point") {
  DeviceConfig dev = default_device();
  ProcessMatrix ideal = process_of_unitary(cz_ideal4());

  // Lossless run: limited only by leakage. The chi route normalizes away
  // part of the leakage, so it sits above the raw block overlap.
  ProcessMatrix lossless = simulate_cz_process("A", 1, dev, true);
  CHECK(process_fidelity(lossless, ideal) ==
        doctest::Approx(0.98996919575140285).epsilon(1e-10));

  ProcessMatrix noisy = simulate_cz_process("A", 1, dev, false);
  double f = process_fidelity(noisy, ideal);
  CHECK(f == doctest::Approx(0.9801589041724339).epsilon(1e-10));
  CHECK(f > 0.93);
  CHECK(f < 0.99);
}

TEST_CASE("dynamic phase ledger integrates detuning over the schedule") {
  PulseSchedule sched;
  ControlFrame f;
  f.duration_s = 30e-9;
  f.detunings_rad = {{"Q1A", kTau * 10e6}, {"Q2A", -kTau * 3e6}};
  sched.items.push_back(f);
  sched.items.push_back(InstantGate{"Q1A", 'x', M_PI});
  ControlFrame f2;
  f2.duration_s = 10e-9;
  f2.detunings_rad = {{"Q1A", kTau * 10e6}};
  sched.items.push_back(f2);

  auto ledger = dynamic_phase_ledger(sched);
  // 2pi * 10 MHz * 40 ns = 0.8 * pi, already inside (-pi, pi].
  CHECK(ledger.at("Q1A") == doctest::Approx(0.8 * M_PI).epsilon(1e-9));
  // 2pi * -3 MHz * 30 ns = -0.18 * pi.
  CHECK(ledger.at("Q2A") == doctest::Approx(-0.18 * M_PI).epsilon(1e-9));
}

TEST_CASE("idle decoherence damps population and coherence analytically") {
  HilbertSpace s({{"Q1A", SiteKind::qubit, 2}, {"Q2A", SiteKind::qubit, 2}});
  Vec plus = Vec::Zero(4);
  plus(0) = plus(2) = 1 / std::sqrt(2.0);  // (|0> + |1>)/sqrt(2) on Q1A
  Mat rho = plus * plus.adjoint();
  double t = 500e-9, t1 = 2e-6, t_phi = 3e-6;
  Mat out = apply_idle_decoherence(s, rho, "Q1A", t, t1, t_phi);

  CHECK(out(2, 2).real() == doctest::Approx(0.5 * std::exp(-t / t1)).epsilon(1e-12));
  double gamma2 = 0.5 / t1 + 1.0 / t_phi;
  CHECK(std::abs(out(0, 2)) ==
        doctest::Approx(0.5 * std::exp(-gamma2 * t)).epsilon(1e-12));
  CHECK(std::abs(out.trace().real() - 1.0) < 1e-12);
}

TEST_CASE("process application and the depolarizing proxy") {
  HilbertSpace s({{"Q1A", SiteKind::qubit, 2}, {"Q2A", SiteKind::qubit, 2}});
  Vec psi = Vec::Zero(4);
  psi(2) = 1;  // |1>_Q1A
  Mat rho = psi * psi.adjoint();

  // Identity process leaves the state alone.
  Mat same = apply_process(s, rho, process_of_unitary(Mat::Identity(4, 4)),
                           {"Q1A", "Q2A"});
  CHECK((same - rho).cwiseAbs().maxCoeff() < 1e-10);

  // p = 0 proxy CNOT is the exact unitary: |10> -> |11>.
  Mat flipped = apply_proxy_cnot(s, rho, "Q1A", "Q2A", 0.0);
  CHECK(flipped(3, 3).real() == doctest::Approx(1.0).epsilon(1e-9));

  CHECK(kCzProcessFidelity == 0.958);
  CHECK(depolarizing_p_for_process_fidelity(0.958) ==
        doctest::Approx((1 - 0.958) * 16.0 / 15.0).epsilon(1e-12));
  CHECK(depolarizing_p_for_process_fidelity(1.0) == 0.0);
}

TEST_CASE("ghz preparation reaches 0.929 with proxy gates, 1 with ideal ones") {
  DeviceConfig dev = default_device();
  GhzPrepResult res = run_ghz_prep("A", dev);
  CHECK(res.rho.rows() == 8);
  CHECK(res.fidelity == doctest::Approx(0.92870527999999974).epsilon(1e-12));
  CHECK(res.fidelity ==
        doctest::Approx(state_fidelity(res.rho, ghz_ket(8))).epsilon(1e-12));

  GhzPrepResult ideal = run_ghz_prep("A", dev, true);
  CHECK(ideal.fidelity == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ghz handoff to the far node drops the fidelity to 0.671") {
  DeviceConfig dev = default_device();
  GhzTransferResult res = run_ghz_transfer(dev);
  CHECK(res.fidelity_in == doctest::Approx(0.92870527999999974).epsilon(1e-12));
  CHECK(res.fidelity == doctest::Approx(0.67127660811310896).epsilon(1e-12));
  CHECK(res.fidelity > 0.5);  // entanglement survives the move

  // The ideal flag only idealizes the move (identity channel, no idling);
  // the input state still comes from the noisy prep, so nothing is lost.
  GhzTransferResult ideal = run_ghz_transfer(dev, true);
  CHECK(ideal.fidelity == doctest::Approx(ideal.fidelity_in).epsilon(1e-12));
  CHECK(ideal.fidelity == doctest::Approx(0.92870527999999974).epsilon(1e-12));
}

TEST_CASE("network entanglement fans out at 0.918, 0.849, 0.767") {
  DeviceConfig dev = default_device();
  NetworkGhzResult res = run_network_ghz(dev);
  CHECK(res.fidelity_bell == doctest::Approx(0.91810182675381469).epsilon(1e-12));
  CHECK(res.fidelity_ghz4 == doctest::Approx(0.84850625016704084).epsilon(1e-12));
  CHECK(res.fidelity_ghz6 == doctest::Approx(0.76691802934703901).epsilon(1e-12));
  CHECK(res.rho_bell.rows() == 4);
  CHECK(res.rho_ghz4.rows() == 16);
  CHECK(res.rho_ghz6.rows() == 64);
  // Every stage certifies genuine multipartite entanglement (> 1/2).
  CHECK(res.fidelity_ghz6 > 0.5);

  NetworkGhzResult ideal = run_network_ghz(dev, true);
  CHECK(ideal.fidelity_bell == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ideal.fidelity_ghz4 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ideal.fidelity_ghz6 == doctest::Approx(1.0).epsilon(1e-9));
}
