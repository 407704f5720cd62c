#include "qnetsim/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "qnetsim/benchmarking.hpp"
#include "qnetsim/circuit.hpp"
#include "qnetsim/dynamics.hpp"
#include "qnetsim/io.hpp"
#include "qnetsim/protocols.hpp"
#include "qnetsim/tomography.hpp"

namespace qnetsim {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

// Resolved parameter set of one run (defaults overlaid with the scenario's
// overrides, then with sweep-axis values for grid points).
struct Params {
  std::map<std::string, double> num;
  std::map<std::string, std::string> str;

  double get(const std::string& key) const {
    auto it = num.find(key);
    if (it == num.end()) throw std::runtime_error("missing parameter: " + key);
    return it->second;
  }
  std::string get_str(const std::string& key) const {
    auto it = str.find(key);
    if (it == str.end()) throw std::runtime_error("missing parameter: " + key);
    return it->second;
  }
};

using Scalars = std::vector<std::pair<std::string, double>>;

struct Ctx {
  const ScenarioSpec* spec = nullptr;
  const RunOptions* opts = nullptr;
  DeviceConfig device;
  Params params;
  std::uint64_t seed = 1;
  std::int64_t shots = 0;
  int jobs = 1;
  fs::path out;
  std::vector<std::string>* artifacts = nullptr;

  std::string claim(const std::string& rel) {
    fs::path abs = out / rel;
    if (fs::exists(abs) && !opts->force)
      throw std::runtime_error("artifact already exists: " + abs.string() +
                               " (pass --force to overwrite)");
    if (abs.has_parent_path()) fs::create_directories(abs.parent_path());
    artifacts->push_back(rel);
    return abs.string();
  }
  void emit_text(const std::string& rel, const std::string& text) {
    write_text_file(claim(rel), text);
  }
  void emit_json(const std::string& rel, const json& j) {
    emit_text(rel, j.dump(2) + "\n");
  }
};

struct ExperimentDef {
  std::map<std::string, double> num_defaults;
  std::map<std::string, std::string> str_defaults;
  // Scalar outputs for one parameter point; used by sweeps and summaries.
  std::function<Scalars(const Ctx&, const Params&, std::uint64_t)> point;
  // Rich artifact writer for non-sweep runs; falls back to point + summary.
  std::function<void(Ctx&)> full;
};

void emit_summary(Ctx& ctx, const Scalars& scalars, json extra = json::object()) {
  json results = json::object();
  for (const auto& [k, v] : scalars) results[k] = v;
  json j{{"schema", "qnetsim-summary-v1"},
         {"experiment", ctx.spec->experiment},
         {"seed", ctx.seed},
         {"results", results}};
  for (auto& [k, v] : extra.items()) j[k] = v;
  ctx.emit_json("summary.json", j);
}

template <typename F>
void parallel_for(int jobs, std::size_t n, F&& fn) {
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!err) err = std::current_exception();
          next.store(n);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

std::string resolve_input(const std::string& path, const std::string& base_dir) {
  fs::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  fs::path cand = fs::path(base_dir) / p;
  if (fs::exists(cand)) return cand.string();
  return path;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stoi(tok));
  }
  if (out.empty()) throw std::runtime_error("empty integer list: '" + text + "'");
  return out;
}

// ---------------------------------------------------------------------------
// Shared pieces of the transfer-family experiments.
// ---------------------------------------------------------------------------

TransferVariant variant_from(const Params& p) {
  const std::string v = p.get_str("variant");
  if (v == "full") return TransferVariant::full;
  if (v == "half") return TransferVariant::half;
  throw std::runtime_error("variant must be 'full' or 'half', got '" + v + "'");
}

TransferParams transfer_params_from(const Params& p) {
  TransferParams tp = transfer_defaults(variant_from(p));
  auto maybe = [&](const char* key, double& dst, double scale) {
    double v = p.get(key);
    if (!std::isnan(v)) dst = v * scale;
  };
  maybe("detuning_a_mhz", tp.detuning_a_rad, kTwoPi * 1e6);
  maybe("detuning_b_mhz", tp.detuning_b_rad, kTwoPi * 1e6);
  maybe("g_a_mhz", tp.g_a_rad, kTwoPi * 1e6);
  maybe("g_b_mhz", tp.g_b_rad, kTwoPi * 1e6);
  maybe("tau_ns", tp.tau_s, 1e-9);
  maybe("delta_tau_ns", tp.delta_tau_s, 1e-9);
  return tp;
}

DecoherenceOverrides overrides_from(const DeviceConfig& dev, const Params& p,
                                    const TransferParams& tp) {
  bool anchored = p.get("anchored") != 0.0;
  double flat = p.get("flat_t1_us") * 1e-6;
  return transfer_overrides(dev, tp, anchored, flat);
}

std::map<std::string, double> transfer_family_defaults(double anchored) {
  return {{"anchored", anchored}, {"flat_t1_us", 1.4},    {"sample_stride", 10},
          {"detuning_a_mhz", kNaN}, {"detuning_b_mhz", kNaN}, {"g_a_mhz", kNaN},
          {"g_b_mhz", kNaN},        {"tau_ns", kNaN},          {"delta_tau_ns", kNaN}};
}

json transfer_point_json(const TransferParams& tp) {
  return json{{"detuning_a_mhz", tp.detuning_a_rad / (kTwoPi * 1e6)},
              {"detuning_b_mhz", tp.detuning_b_rad / (kTwoPi * 1e6)},
              {"g_a_mhz", tp.g_a_rad / (kTwoPi * 1e6)},
              {"g_b_mhz", tp.g_b_rad / (kTwoPi * 1e6)},
              {"tau_ns", tp.tau_s * 1e9},
              {"delta_tau_ns", tp.delta_tau_s * 1e9}};
}

Vec ghz_target(int dim) {
  Vec v = Vec::Zero(dim);
  v(0) = v(dim - 1) = 1.0 / std::sqrt(2.0);
  return v;
}

// ---------------------------------------------------------------------------
// Vacuum-Rabi experiments: one qubit against the full mode ladder.
// ---------------------------------------------------------------------------

HilbertSpace chevron_space(const DeviceConfig& dev) {
  std::vector<Site> sites{{"Q2A", SiteKind::qubit, 2}};
  for (int m = 1; m <= dev.mode_count; ++m)
    sites.push_back({"M" + std::to_string(m), SiteKind::mode, 2});
  return HilbertSpace(sites);
}

Trajectory chevron_point(const Ctx& ctx, double detuning_mhz, double g_mhz,
                         double duration_s, double t1_s, int stride) {
  HilbertSpace space = chevron_space(ctx.device);
  ControlFrame frame;
  frame.duration_s = duration_s;
  frame.g_a_rad = kTwoPi * g_mhz * 1e6;
  frame.detunings_rad["Q2A"] = kTwoPi * detuning_mhz * 1e6;
  PulseSchedule sched;
  sched.items.emplace_back(frame);
  Vec psi = space.basis_ket("Q2A", 1);
  Mat rho0 = psi * psi.adjoint();
  EvolveOptions opts;
  opts.sample_stride = stride;
  opts.overrides["Q2A"].t1_s = t1_s;
  return evolve_master_equation(rho0, sched, ctx.device, space, opts);
}

// ---------------------------------------------------------------------------
// Circuit-model fitting experiments.
// ---------------------------------------------------------------------------

std::vector<QSample> read_q_samples(const std::string& path) {
  CsvTable t = read_csv(path);
  if (t.header.size() < 2 || t.header[0] != "freq_hz" || t.header[1] != "q_value")
    throw std::runtime_error("expected header freq_hz,q_value in " + path);
  std::vector<QSample> out;
  for (const auto& row : t.rows)
    out.push_back({std::stod(row.at(0)), std::stod(row.at(1))});
  return out;
}

std::vector<CouplerSample> read_coupler_samples(const std::string& path) {
  CsvTable t = read_csv(path);
  if (t.header.size() < 2 || t.header[0] != "delta_rad" || t.header[1] != "g_hz")
    throw std::runtime_error("expected header delta_rad,g_hz in " + path);
  std::vector<CouplerSample> out;
  for (const auto& row : t.rows)
    out.push_back({std::stod(row.at(0)), std::stod(row.at(1))});
  return out;
}

struct CircuitContext {
  double l_m;
  double omega_m;
  double omega_q;
  double l_q;
};

CircuitContext circuit_context(const DeviceConfig& dev) {
  StandingModeParams sm =
      standing_mode_params(dev.channel, dev.fsr_hz, dev.comm_mode_index);
  // Coupling curves are quoted at resonance: the qubit tuned onto the
  // communication mode, both at the tabulated mode frequency.
  double omega = kTwoPi * dev.comm_freq_hz;
  return {sm.l_m, omega, omega, dev.qubits.at("Q2A").l_q};
}

// ---------------------------------------------------------------------------
// Experiment registry.
// ---------------------------------------------------------------------------

const std::map<std::string, ExperimentDef>& experiment_table() {
  static const std::map<std::string, ExperimentDef> table = [] {
    std::map<std::string, ExperimentDef> t;

    {
      ExperimentDef d;
      d.num_defaults = transfer_family_defaults(1.0);
      d.str_defaults = {{"variant", "full"}};
      d.point = [](const Ctx& ctx, const Params& p, std::uint64_t) {
        TransferParams tp = transfer_params_from(p);
        TransferRun run = run_state_transfer(ctx.device, tp,
                                             overrides_from(ctx.device, p, tp));
        return Scalars{{"receiver_population", run.receiver_population}};
      };
      d.full = [](Ctx& ctx) {
        const Params& p = ctx.params;
        TransferParams tp = transfer_params_from(p);
        EvolveOptions opts;
        opts.sample_stride = static_cast<int>(p.get("sample_stride"));
        TransferRun run = run_state_transfer(
            ctx.device, tp, overrides_from(ctx.device, p, tp), opts);
        write_trajectory_csv(run.trajectory, ctx.claim("trajectory.csv"));
        emit_summary(ctx, {{"receiver_population", run.receiver_population}},
                     json{{"operating_point", transfer_point_json(tp)}});
      };
      t["transfer"] = std::move(d);
    }

    {
      ExperimentDef d;
      d.num_defaults = transfer_family_defaults(1.0);
      d.str_defaults = {{"variant", "full"}};
      auto compute = [](const Ctx& ctx, const Params& p) {
        TransferParams tp = transfer_params_from(p);
        ProcessMatrix chi = transfer_process_matrix(
            ctx.device, tp, overrides_from(ctx.device, p, tp));
        double f = process_fidelity(chi, process_of_unitary(Mat::Identity(2, 2)));
        return std::make_pair(chi, f);
      };
      d.point = [compute](const Ctx& ctx, const Params& p, std::uint64_t) {
        return Scalars{{"process_fidelity", compute(ctx, p).second}};
      };
      d.full = [compute](Ctx& ctx) {
        auto [chi, f] = compute(ctx, ctx.params);
        ctx.emit_text("chi.json", matrix_to_json(chi.chi()));
        emit_summary(ctx, {{"process_fidelity", f}});
      };
      t["transfer-tomo"] = std::move(d);
    }

    {
      ExperimentDef d;
      d.num_defaults = transfer_family_defaults(0.0);
      d.str_defaults = {{"variant", "half"}};
      d.point = [](const Ctx& ctx, const Params& p, std::uint64_t) {
        TransferParams tp = transfer_params_from(p);
        BellResult res = run_bell_st_half(ctx.device, tp,
                                          overrides_from(ctx.device, p, tp));
        return Scalars{{"fidelity", res.fidelity}};
      };
      d.full = [](Ctx& ctx) {
        const Params& p = ctx.params;
        TransferParams tp = transfer_params_from(p);
        BellResult res = run_bell_st_half(ctx.device, tp,
                                          overrides_from(ctx.device, p, tp));
        ctx.emit_text("rho.json", matrix_to_json(res.rho));
        emit_summary(ctx, {{"fidelity", res.fidelity}},
                     json{{"operating_point", transfer_point_json(tp)}});
      };
      t["bell-st-half"] = std::move(d);
    }

    {
      ExperimentDef d;
      d.num_defaults = {{"ideal", 0.0}};
      d.str_defaults = {{"node", "A"}};
      d.point = [](const Ctx& ctx, const Params& p, std::uint64_t) {
        GhzPrepResult res =
            run_ghz_prep(p.get_str("node"), ctx.device, p.get("ideal") != 0.0);
        return Scalars{{"fidelity", res.fidelity}};
      };
      d.full = [](Ctx& ctx) {
        const Params& p = ctx.params;
        const std::string node = p.get_str("node");
        GhzPrepResult res = run_ghz_prep(node, ctx.device, p.get("ideal") != 0.0);
        ctx.emit_text("rho.json", matrix_to_json(res.rho));
        Scalars scalars{{"fidelity", res.fidelity}};
        json extra = json::object();
        if (ctx.shots > 0) {
          std::vector<ConfusionMatrix> confusion;
          for (int j = 1; j <= 3; ++j) {
            const QubitConfig& q =
                ctx.device.qubits.at("Q" + std::to_string(j) + node);
            confusion.push_back({q.readout_f_g, q.readout_f_e});
          }
          auto settings = all_settings(3);
          std::vector<ShotRecord> records;
          std::vector<SettingProbabilities> probs;
          double deficit = 0;
          for (std::size_t i = 0; i < settings.size(); ++i) {
            ShotRecord rec =
                simulate_readout(res.rho, settings[i], confusion, ctx.shots,
                                 grid_point_seed(ctx.seed, i),
                                 static_cast<int>(i));
            std::vector<double> observed(rec.counts.size());
            for (std::size_t o = 0; o < observed.size(); ++o)
              observed[o] = static_cast<double>(rec.counts[o]) / rec.shots;
            MitigationResult mit = mitigate_readout(observed, confusion);
            deficit += mit.l1_deficit;
            records.push_back(std::move(rec));
            probs.push_back({settings[i], std::move(mit.probs)});
          }
          DensityMatrix recon = reconstruct_density(probs);
          write_shot_records_csv(ctx.claim("shots.csv"), records, 3);
          scalars.emplace_back("reconstructed_fidelity",
                               state_fidelity(recon.matrix(), ghz_target(8)));
          extra["shots"] = ctx.shots;
          extra["mitigation_l1_deficit"] = deficit;
        }
        emit_summary(ctx, scalars, extra);
      };
      t["ghz-prep"] = std::move(d);
    }

    {
      ExperimentDef d;
      d.num_defaults = {{"ideal", 0.0}};
      d.point = [](const Ctx& ctx, const Params& p, std::uint64_t) {
        GhzTransferResult res = run_ghz_transfer(ctx.device, p.get("ideal") != 0.0);
        return Scalars{{"fidelity_in", res.fidelity_in}, {"fidelity", res.fidelity}};
      };
      d.full = [](Ctx& ctx) {
        GhzTransferResult res =
            run_ghz_transfer(ctx.device, ctx.params.get("ideal") != 0.0);
        ctx.emit_text("rho.json", matrix_to_json(res.rho));
        emit_summary(ctx, {{"fidelity_in", res.fidelity_in},
                           {"fidelity", res.fidelity}});
      };
      t["ghz-transfer"] = std::move(d);
    }

    {
      ExperimentDef d;
      d.num_defaults = {{"ideal", 0.0}};
      d.point = [](const Ctx& ctx, const Params& p, std::uint64_t) {
        NetworkGhzResult res = run_network_ghz(ctx.device, p.get("ideal") != 0.0);
        return Scalars{{"fidelity_bell", res.fidelity_bell},
                       {"fidelity_ghz4", res.fidelity_ghz4},
                       {"fidelity_ghz6", res.fidelity_ghz6}};
      };
      d.full = [](Ctx& ctx) {
        NetworkGhzResult res =
            run_network_ghz(ctx.device, ctx.params.get("ideal") != 0.0);
        ctx.emit_text("rho_bell.json", matrix_to_json(res.rho_bell));
        ctx.emit_text("rho_ghz4.json", matrix_to_json(res.rho_ghz4));
        ctx.emit_text("rho_ghz6.json", matrix_to_json(res.rho_ghz6));
        emit_summary(ctx, {{"fidelity_bell", res.fidelity_bell},
                           {"fidelity_ghz4", res.fidelity_ghz4},
                           {"fidelity_ghz6", res.fidelity_ghz6}});
      };
      t["network-ghz"] = std::move(d);
    }

    {
      ExperimentDef d;
      d.num_defaults = {{"partner", 1.0}, {"lossless", 0.0}};
      d.str_defaults = {{"node", "A"}};
      auto compute = [](const Ctx& ctx, const Params& p) {
        const std::string node = p.get_str("node");
        int j = static_cast<int>(p.get("partner"));
        CzCalibration cal = calibrate_cz(node, j, ctx.device);
        ProcessMatrix chi =
            simulate_cz_process(node, j, ctx.device, p.get("lossless") != 0.0);
        Mat cz4 = Mat::Identity(4, 4);
        cz4(3, 3) = -1.0;
        double f = process_fidelity(chi, process_of_unitary(cz4));
        Scalars scalars{{"process_fidelity", f},
                        {"duration_ns", cal.duration_s * 1e9},
                        {"detuning_mhz", cal.detuning_rad / (kTwoPi * 1e6)},
                        {"stark_mhz", cal.stark_rad / (kTwoPi * 1e6)}};
        return std::make_pair(chi, scalars);
      };
      d.point = [compute](const Ctx& ctx, const Params& p, std::uint64_t) {
        return compute(ctx, p).second;
      };
      d.full = [compute](Ctx& ctx) {
        auto [chi, scalars] = compute(ctx, ctx.params);
        ctx.emit_text("chi.json", matrix_to_json(chi.chi()));
        emit_summary(ctx, scalars);
      };
      t["cz-tomo"] = std::move(d);
    }

    {
      ExperimentDef d;
      d.num_defaults = {{"strength", 0.0052}, {"sequences", 50.0}};
      d.str_defaults = {{"lengths", "1,2,3,4,6,8,12,16,24,32"},
                        {"error", "depolarizing"}};
      auto channel = [](const Params& p) {
        ErrorChannelSpec err;
        const std::string kind = p.get_str("error");
        if (kind == "none")
          err.kind = ErrorChannelSpec::Kind::none;
        else if (kind == "depolarizing")
          err.kind = ErrorChannelSpec::Kind::depolarizing;
        else if (kind == "amplitude_damping")
          err.kind = ErrorChannelSpec::Kind::amplitude_damping;
        else
          throw std::runtime_error("unknown error channel '" + kind + "'");
        err.strength = p.get("strength");
        return err;
      };
      auto compute = [channel](const Ctx&, const Params& p, std::uint64_t seed) {
        return rb_run(parse_int_list(p.get_str("lengths")),
                      static_cast<int>(p.get("sequences")), channel(p), seed);
      };
      d.point = [compute](const Ctx& ctx, const Params& p, std::uint64_t seed) {
        RbResult res = compute(ctx, p, seed);
        return Scalars{{"decay_p", res.fit.p},
                       {"error_per_clifford", res.error_per_clifford},
                       {"avg_gate_fidelity", res.avg_gate_fidelity}};
      };
      d.full = [compute](Ctx& ctx) {
        RbResult res = compute(ctx, ctx.params, ctx.seed);
        write_rb_csv(ctx.claim("rb.csv"), res);
        ctx.emit_text("fit.json", rb_fit_json(res));
        emit_summary(ctx, {{"decay_p", res.fit.p},
                           {"error_per_clifford", res.error_per_clifford},
                           {"avg_gate_fidelity", res.avg_gate_fidelity}});
      };
      t["rb"] = std::move(d);
    }

    {
      ExperimentDef d;
      d.num_defaults = {{"cz_depolarizing", 0.041},
                        {"q1_depolarizing", 0.0},
                        {"circuits", 50.0}};
      d.str_defaults = {{"depths", "1,2,3,4,5,6,7,8"}};
      auto compute = [](const Ctx&, const Params& p, std::uint64_t seed) {
        std::vector<int> depths = parse_int_list(p.get_str("depths"));
        int circuits = static_cast<int>(p.get("circuits"));
        ErrorChannelSpec cz{ErrorChannelSpec::Kind::depolarizing,
                            p.get("cz_depolarizing")};
        ErrorChannelSpec q1{ErrorChannelSpec::Kind::none, 0.0};
        if (p.get("q1_depolarizing") > 0.0)
          q1 = {ErrorChannelSpec::Kind::depolarizing, p.get("q1_depolarizing")};
        XebResult res = xeb_run(depths, circuits, cz, seed, q1);
        Scalars scalars{{"decay_p", res.fit.p},
                        {"error_per_cycle", res.error_per_cycle}};
        if (q1.kind != ErrorChannelSpec::Kind::none) {
          // Reference run without the two-qubit channel isolates the CZ error:
          // the single-qubit factors cancel exactly in the per-depth ratio.
          XebResult ref = xeb_run(depths, circuits,
                                  {ErrorChannelSpec::Kind::none, 0.0}, seed, q1);
          std::vector<int> xs;
          std::vector<double> ratio;
          for (std::size_t i = 0;
               i < res.points.size() && i < ref.points.size(); ++i) {
            if (std::abs(ref.points[i].fidelity) < 1e-12) continue;
            xs.push_back(res.points[i].depth);
            ratio.push_back(res.points[i].fidelity / ref.points[i].fidelity);
          }
          DecayFit rf = fit_exponential_decay(xs, ratio, true);
          scalars.emplace_back("cz_error", 1.0 - rf.p);
        }
        return std::make_pair(res, scalars);
      };
      d.point = [compute](const Ctx& ctx, const Params& p, std::uint64_t seed) {
        return compute(ctx, p, seed).second;
      };
      d.full = [compute](Ctx& ctx) {
        auto [res, scalars] = compute(ctx, ctx.params, ctx.seed);
        write_xeb_csv(ctx.claim("xeb.csv"), res);
        ctx.emit_text("fit.json", xeb_fit_json(res));
        emit_summary(ctx, scalars);
      };
      t["xeb"] = std::move(d);
    }

    {
      ExperimentDef d;
      d.num_defaults = {{"det_min_mhz", -260.0}, {"det_max_mhz", 260.0},
                        {"det_points", 53.0},    {"duration_ns", 250.0},
                        {"g_mhz", 5.5},          {"t1_us", 1.4},
                        {"sample_stride", 20.0}, {"detuning_mhz", 0.0}};
      d.point = [](const Ctx& ctx, const Params& p, std::uint64_t) {
        Trajectory traj = chevron_point(
            ctx, p.get("detuning_mhz"), p.get("g_mhz"),
            p.get("duration_ns") * 1e-9, p.get("t1_us") * 1e-6,
            static_cast<int>(p.get("sample_stride")));
        return Scalars{
            {"qubit_population", excitation_populations(traj, "Q2A").back()}};
      };
      d.full = [](Ctx& ctx) {
        const Params& p = ctx.params;
        int n = static_cast<int>(p.get("det_points"));
        if (n < 1) throw std::runtime_error("det_points must be >= 1");
        double d0 = p.get("det_min_mhz");
        double d1 = p.get("det_max_mhz");
        std::vector<double> dets(n);
        for (int i = 0; i < n; ++i)
          dets[i] = n == 1 ? d0 : d0 + (d1 - d0) * i / (n - 1);
        std::vector<std::string> blocks(n);
        parallel_for(ctx.jobs, dets.size(), [&](std::size_t i) {
          Trajectory traj = chevron_point(
              ctx, dets[i], p.get("g_mhz"), p.get("duration_ns") * 1e-9,
              p.get("t1_us") * 1e-6, static_cast<int>(p.get("sample_stride")));
          std::vector<double> pop = excitation_populations(traj, "Q2A");
          std::string block;
          for (std::size_t k = 0; k < traj.times_s.size(); ++k)
            block += fmt(dets[i]) + "," + fmt(traj.times_s[k] * 1e9) + "," +
                     fmt(pop[k]) + "\n";
          blocks[i] = std::move(block);
        });
        std::string csv = "detuning_mhz,time_ns,population\n";
        for (const auto& b : blocks) csv += b;
        ctx.emit_text("chevron.csv", csv);
        emit_summary(ctx, {{"detuning_points", static_cast<double>(n)},
                           {"fsr_mhz", ctx.device.fsr_hz / 1e6}});
      };
      t["rabi-chevron"] = std::move(d);
    }

    {
      ExperimentDef d;
      d.num_defaults = {{"detuning_mhz", 0.0}, {"duration_ns", 500.0},
                        {"g_mhz", 5.5},        {"t1_us", 1.4},
                        {"sample_stride", 10.0}};
      d.point = [](const Ctx& ctx, const Params& p, std::uint64_t) {
        Trajectory traj = chevron_point(
            ctx, p.get("detuning_mhz"), p.get("g_mhz"),
            p.get("duration_ns") * 1e-9, p.get("t1_us") * 1e-6,
            static_cast<int>(p.get("sample_stride")));
        return Scalars{
            {"qubit_population", excitation_populations(traj, "Q2A").back()}};
      };
      d.full = [](Ctx& ctx) {
        const Params& p = ctx.params;
        Trajectory traj = chevron_point(
            ctx, p.get("detuning_mhz"), p.get("g_mhz"),
            p.get("duration_ns") * 1e-9, p.get("t1_us") * 1e-6,
            static_cast<int>(p.get("sample_stride")));
        write_trajectory_csv(traj, ctx.claim("trajectory.csv"));
        const std::string comm = "M" + std::to_string(ctx.device.comm_mode_index);
        emit_summary(
            ctx,
            {{"qubit_population", excitation_populations(traj, "Q2A").back()},
             {"comm_mode_population", excitation_populations(traj, comm).back()}});
      };
      t["rabi-slice"] = std::move(d);
    }

    {
      ExperimentDef d;
      d.num_defaults = {{"cpw_length_mm", 3.0}};
      d.str_defaults = {{"samples", "data/samples/wirebond_q.csv"}};
      auto compute = [](const Ctx& ctx, const Params& p) {
        ChannelConfig cfg = ctx.device.channel;
        cfg.cpw_length_m = p.get("cpw_length_mm") * 1e-3;
        StandingModeParams sm =
            standing_mode_params(cfg, ctx.device.fsr_hz, ctx.device.comm_mode_index);
        auto samples = read_q_samples(
            resolve_input(p.get_str("samples"), ctx.spec->base_dir));
        WirebondFit fit = fit_wirebond_loss(samples, cfg, sm.l_m);
        return std::make_tuple(fit, samples, cfg, sm.l_m);
      };
      d.point = [compute](const Ctx& ctx, const Params& p, std::uint64_t) {
        WirebondFit fit = std::get<0>(compute(ctx, p));
        return Scalars{{"r_s_ohm", fit.model.r_s_ohm},
                       {"q0", fit.model.q0},
                       {"residual_rms", fit.residual_rms}};
      };
      d.full = [compute](Ctx& ctx) {
        auto [fit, samples, cfg, l_m] = compute(ctx, ctx.params);
        std::string csv = "freq_hz,q_value,q_model\n";
        for (const QSample& s : samples) {
          double qm = channel_mode_q(kTwoPi * s.freq_hz, fit.model, l_m, cfg);
          csv += fmt(s.freq_hz) + "," + fmt(s.q_value) + "," + fmt(qm) + "\n";
        }
        ctx.emit_text("fit.csv", csv);
        emit_summary(ctx, {{"r_s_ohm", fit.model.r_s_ohm},
                           {"q0", fit.model.q0},
                           {"residual_rms", fit.residual_rms}});
      };
      t["fit-wirebond"] = std::move(d);
    }

    {
      ExperimentDef d;
      d.str_defaults = {{"samples", "data/samples/coupler_g.csv"}};
      auto compute = [](const Ctx& ctx, const Params& p) {
        CircuitContext cc = circuit_context(ctx.device);
        auto samples = read_coupler_samples(
            resolve_input(p.get_str("samples"), ctx.spec->base_dir));
        const CouplerConfig& base = ctx.device.couplers.at("A");
        CouplerFit fit = fit_coupler_l_t(samples, base, cc.omega_m, cc.omega_q,
                                         cc.l_q, cc.l_m);
        return std::make_tuple(fit, samples, cc, base);
      };
      d.point = [compute](const Ctx& ctx, const Params& p, std::uint64_t) {
        CouplerFit fit = std::get<0>(compute(ctx, p));
        return Scalars{{"l_t_nh", fit.l_t * 1e9},
                       {"residual_rms_hz", fit.residual_rms}};
      };
      d.full = [compute](Ctx& ctx) {
        auto [fit, samples, cc, base] = compute(ctx, ctx.params);
        CouplerConfig fitted = base;
        fitted.l_t = fit.l_t;
        std::string csv = "delta_rad,g_hz,g_hz_model\n";
        for (const CouplerSample& s : samples) {
          double mc = coupler_inductance(s.delta_rad, fitted);
          double gm = qubit_mode_coupling(mc, cc.omega_m, cc.omega_q, cc.l_q,
                                          fitted.l_g, cc.l_m) /
                      kTwoPi;
          csv += fmt(s.delta_rad) + "," + fmt(s.g_hz) + "," + fmt(gm) + "\n";
        }
        ctx.emit_text("fit.csv", csv);
        emit_summary(ctx, {{"l_t_nh", fit.l_t * 1e9},
                           {"residual_rms_hz", fit.residual_rms}});
      };
      t["fit-coupler"] = std::move(d);
    }

    {
      ExperimentDef d;
      d.num_defaults = {{"delta_min_rad", M_PI / 2},
                        {"delta_max_rad", M_PI},
                        {"points", 61.0},
                        {"delta_rad", M_PI}};
      auto t1_at = [](const Ctx& ctx, double delta) {
        return qubit_loaded_t1(delta, ctx.device.qubits.at("Q2A"),
                               ctx.device.couplers.at("A"), ctx.device.channel);
      };
      d.point = [t1_at](const Ctx& ctx, const Params& p, std::uint64_t) {
        return Scalars{{"t1_us", t1_at(ctx, p.get("delta_rad")) * 1e6}};
      };
      d.full = [t1_at](Ctx& ctx) {
        const Params& p = ctx.params;
        CircuitContext cc = circuit_context(ctx.device);
        const CouplerConfig& cpl = ctx.device.couplers.at("A");
        int n = static_cast<int>(p.get("points"));
        if (n < 2) throw std::runtime_error("points must be >= 2");
        double lo = p.get("delta_min_rad");
        double hi = p.get("delta_max_rad");
        std::string csv = "delta_rad,m_c_nh,g_mhz,t1_us\n";
        for (int i = 0; i < n; ++i) {
          double delta = lo + (hi - lo) * i / (n - 1);
          double mc = coupler_inductance(delta, cpl);
          double g = qubit_mode_coupling(mc, cc.omega_m, cc.omega_q, cc.l_q,
                                         cpl.l_g, cc.l_m);
          csv += fmt(delta) + "," + fmt(mc * 1e9) + "," +
                 fmt(g / (kTwoPi * 1e6)) + "," + fmt(t1_at(ctx, delta) * 1e6) +
                 "\n";
        }
        ctx.emit_text("t1_curve.csv", csv);
        double d55 = coupler_phase_for_coupling(kTwoPi * 5.5e6, cpl, cc.omega_m,
                                                cc.omega_q, cc.l_q, cc.l_m);
        emit_summary(ctx, {{"delta_rad_at_g5p5mhz", d55},
                           {"t1_us_at_g5p5mhz", t1_at(ctx, d55) * 1e6}});
      };
      t["fit-loaded-t1"] = std::move(d);
    }

    return t;
  }();
  return table;
}

const ExperimentDef& lookup_experiment(const std::string& name) {
  const auto& table = experiment_table();
  auto it = table.find(name);
  if (it == table.end())
    throw std::runtime_error("unknown experiment '" + name +
                             "'; registered: " + join(registered_experiments()));
  return it->second;
}

void validate_spec(const ScenarioSpec& spec) {
  const ExperimentDef& def = lookup_experiment(spec.experiment);
  auto known_numeric = [&](const std::string& k) {
    return def.num_defaults.count(k) > 0;
  };
  for (const auto& [k, v] : spec.numbers) {
    (void)v;
    if (!known_numeric(k))
      throw std::runtime_error("unknown numeric parameter '" + k + "' for " +
                               spec.experiment + "; accepted: " +
                               join(sweepable_parameters(spec.experiment)));
  }
  for (const auto& [k, v] : spec.strings) {
    (void)v;
    if (!def.str_defaults.count(k))
      throw std::runtime_error("unknown string parameter '" + k + "' for " +
                               spec.experiment);
  }
  std::vector<std::string> seen;
  for (const SweepAxis& axis : spec.sweep) {
    if (!known_numeric(axis.parameter))
      throw std::runtime_error("sweep axis '" + axis.parameter +
                               "' is not a numeric parameter of " +
                               spec.experiment);
    if (axis.values.empty())
      throw std::runtime_error("sweep axis '" + axis.parameter + "' has no values");
    if (std::find(seen.begin(), seen.end(), axis.parameter) != seen.end())
      throw std::runtime_error("duplicate sweep axis '" + axis.parameter + "'");
    seen.push_back(axis.parameter);
  }
}

Params merged_params(const ScenarioSpec& spec, const ExperimentDef& def) {
  Params p{def.num_defaults, def.str_defaults};
  for (const auto& [k, v] : spec.numbers) p.num[k] = v;
  for (const auto& [k, v] : spec.strings) p.str[k] = v;
  return p;
}

void run_sweep(Ctx& ctx, const ExperimentDef& def) {
  const auto& axes = ctx.spec->sweep;
  std::size_t total = 1;
  for (const auto& axis : axes) total *= axis.values.size();
  std::vector<std::size_t> strides(axes.size(), 1);
  for (int i = static_cast<int>(axes.size()) - 2; i >= 0; --i)
    strides[i] = strides[i + 1] * axes[i + 1].values.size();

  std::vector<Scalars> results(total);
  std::vector<std::vector<double>> coords(total);
  parallel_for(ctx.jobs, total, [&](std::size_t idx) {
    Params p = ctx.params;
    std::vector<double> at(axes.size());
    for (std::size_t a = 0; a < axes.size(); ++a) {
      std::size_t vi = (idx / strides[a]) % axes[a].values.size();
      at[a] = axes[a].values[vi];
      p.num[axes[a].parameter] = at[a];
    }
    results[idx] = def.point(ctx, p, grid_point_seed(ctx.seed, idx));
    coords[idx] = std::move(at);
  });

  std::string csv;
  for (const auto& axis : axes) csv += axis.parameter + ",";
  for (std::size_t s = 0; s < results[0].size(); ++s)
    csv += results[0][s].first + (s + 1 < results[0].size() ? "," : "\n");
  for (std::size_t idx = 0; idx < total; ++idx) {
    if (results[idx].size() != results[0].size())
      throw std::logic_error("inconsistent scalar set across grid points");
    for (double c : coords[idx]) csv += fmt(c) + ",";
    for (std::size_t s = 0; s < results[idx].size(); ++s)
      csv += fmt(results[idx][s].second) +
             (s + 1 < results[idx].size() ? "," : "\n");
  }
  ctx.emit_text("sweep.csv", csv);

  json axes_json = json::array();
  for (const auto& axis : axes)
    axes_json.push_back(
        {{"parameter", axis.parameter},
         {"points", static_cast<std::int64_t>(axis.values.size())}});
  emit_summary(ctx, {{"grid_points", static_cast<double>(total)}},
               json{{"axes", axes_json}});
}

}  // namespace

const std::vector<std::string>& registered_experiments() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, def] : experiment_table()) {
      (void)def;
      out.push_back(name);
    }
    return out;
  }();
  return names;
}

const std::vector<std::string>& sweepable_parameters(const std::string& experiment) {
  static std::map<std::string, std::vector<std::string>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(experiment);
  if (it == cache.end()) {
    const ExperimentDef& def = lookup_experiment(experiment);
    std::vector<std::string> out;
    for (const auto& [k, v] : def.num_defaults) {
      (void)v;
      out.push_back(k);
    }
    it = cache.emplace(experiment, std::move(out)).first;
  }
  return it->second;
}

std::uint64_t grid_point_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed + 0x9e3779b97f4a7c15ULL * (index + 1));
}

ScenarioSpec parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("scenario parse error: ") + e.what());
  }
  if (!j.is_object()) throw std::runtime_error("scenario must be a JSON object");
  if (j.contains("schema") && j["schema"] != "qnetsim-scenario-v1")
    throw std::runtime_error("unsupported scenario schema: " +
                             j["schema"].dump());
  ScenarioSpec spec;
  for (auto& [key, value] : j.items()) {
    if (key == "schema") continue;
    if (key == "experiment")
      spec.experiment = value.get<std::string>();
    else if (key == "seed")
      spec.seed = value.get<std::uint64_t>();
    else if (key == "shots")
      spec.shots = value.get<std::int64_t>();
    else if (key == "device")
      spec.device_path = value.get<std::string>();
    else if (key == "out")
      spec.out_hint = value.get<std::string>();
    else if (key == "parameters") {
      if (!value.is_object())
        throw std::runtime_error("parameters must be an object");
      for (auto& [pk, pv] : value.items()) {
        if (pv.is_number())
          spec.numbers[pk] = pv.get<double>();
        else if (pv.is_boolean())
          spec.numbers[pk] = pv.get<bool>() ? 1.0 : 0.0;
        else if (pv.is_string())
          spec.strings[pk] = pv.get<std::string>();
        else
          throw std::runtime_error("parameter '" + pk +
                                   "' must be a number, bool or string");
      }
    } else if (key == "sweep") {
      if (!value.is_array()) throw std::runtime_error("sweep must be an array");
      for (auto& av : value) {
        SweepAxis axis;
        axis.parameter = av.at("parameter").get<std::string>();
        for (auto& vv : av.at("values")) axis.values.push_back(vv.get<double>());
        spec.sweep.push_back(std::move(axis));
      }
    } else {
      throw std::runtime_error("unknown scenario key: '" + key + "'");
    }
  }
  if (spec.experiment.empty())
    throw std::runtime_error("scenario is missing the 'experiment' key");
  validate_spec(spec);
  return spec;
}

ScenarioSpec load_scenario(const std::string& path) {
  ScenarioSpec spec = parse_scenario(read_text_file(path));
  spec.base_dir = fs::path(path).parent_path().string();
  return spec;
}

std::string serialize_scenario(const ScenarioSpec& spec) {
  json params = json::object();
  for (const auto& [k, v] : spec.numbers) params[k] = v;
  for (const auto& [k, v] : spec.strings) params[k] = v;
  json j{{"schema", "qnetsim-scenario-v1"},
         {"experiment", spec.experiment},
         {"seed", spec.seed},
         {"shots", spec.shots}};
  if (!spec.device_path.empty()) j["device"] = spec.device_path;
  if (!spec.out_hint.empty()) j["out"] = spec.out_hint;
  if (!params.empty()) j["parameters"] = params;
  if (!spec.sweep.empty()) {
    json sweep = json::array();
    for (const auto& axis : spec.sweep)
      sweep.push_back({{"parameter", axis.parameter}, {"values", axis.values}});
    j["sweep"] = sweep;
  }
  return j.dump(2) + "\n";
}

RunSummary run_scenario(const ScenarioSpec& spec, const RunOptions& opts) {
  auto t0 = std::chrono::steady_clock::now();
  validate_spec(spec);
  const ExperimentDef& def = lookup_experiment(spec.experiment);

  DeviceConfig device =
      spec.device_path.empty()
          ? default_device()
          : load_device_config(resolve_input(spec.device_path, spec.base_dir));

  fs::path out(opts.out_dir);
  fs::create_directories(out);
  fs::path manifest_path = out / "manifest.json";
  if (fs::exists(manifest_path) && !opts.force)
    throw std::runtime_error("output directory already holds a run: " +
                             manifest_path.string() +
                             " (pass --force to overwrite)");

  std::vector<std::string> artifacts;
  Ctx ctx;
  ctx.spec = &spec;
  ctx.opts = &opts;
  ctx.device = std::move(device);
  ctx.params = merged_params(spec, def);
  ctx.seed = opts.seed.value_or(spec.seed);
  ctx.shots = spec.shots;
  ctx.jobs = std::max(1, opts.jobs);
  ctx.out = out;
  ctx.artifacts = &artifacts;

  if (!spec.sweep.empty()) {
    run_sweep(ctx, def);
  } else if (def.full) {
    def.full(ctx);
  } else {
    emit_summary(ctx, def.point(ctx, ctx.params, ctx.seed));
  }

  double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json artifact_list = json::array();
  for (const std::string& rel : artifacts)
    artifact_list.push_back(
        {{"path", rel}, {"sha256", sha256_file_hex((out / rel).string())}});
  json manifest{
      {"schema", "qnetsim-manifest-v1"},
      {"experiment", spec.experiment},
      {"seed", ctx.seed},
      {"jobs", ctx.jobs},
      {"versions",
       {{"qnetsim", kVersion},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                      std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)}}},
      {"inputs",
       {{"scenario_sha256", sha256_hex(serialize_scenario(spec))},
        {"device_sha256", sha256_hex(serialize_device_config(ctx.device))}}},
      {"artifacts", artifact_list},
      {"wall_time_s", wall}};
  write_text_file(manifest_path.string(), manifest.dump(2) + "\n");

  RunSummary summary;
  summary.out_dir = out.string();
  summary.manifest_path = manifest_path.string();
  summary.artifacts = std::move(artifacts);
  summary.wall_time_s = wall;
  return summary;
}

}  // namespace qnetsim
