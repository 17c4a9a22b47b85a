// Acceptance run: one PASS/FAIL line per criterion. Experiments run with the
// shipped defaults through run_experiment, so the artifacts under the output
// root (argv[1], default ./acceptance_runs) are the evidence for each line.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "chaosbench/experiments.hpp"
#include "small_configs.hpp"

namespace cb = chaosbench;
namespace fs = std::filesystem;

namespace {

fs::path g_root = "acceptance_runs";
int g_failures = 0;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

cb::RunResult run(cb::ExperimentKind kind, const std::string& tag, const std::string& text = "") {
  cb::ExperimentConfig cfg(kind);
  if (!text.empty()) cfg.merge_text(text, tag);
  cfg.set("run.tag", tag);
  cb::RunOptions o;
  o.out_root = g_root;
  o.jobs = 0;
  o.timestamp = "acceptance";
  return cb::run_experiment(cfg, o);
}

void report(int n, const std::string& name, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  if (!v.pass) ++g_failures;
  std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << n << " (" << name << "): " << v.detail << " ["
            << fmt(seconds_since(t0), 3) << " s]" << std::endl;
}

bool within(double x, double want, double tol) { return std::fabs(x - want) <= tol; }

// ---- 1 --------------------------------------------------------------------------

double g_ks_lorenz = 0.906;

Verdict lyapunov() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run(cb::ExperimentKind::Lyapunov, "c1", "[precision]\nbits = 113\n[lyapunov]\nt_total = 6000\n");
  const double wall = seconds_since(t0);
  const auto ex = r.summary["exponents"].get<std::vector<double>>();
  const std::vector<double> want{0.906, 0.0, -14.572};
  bool ok = ex.size() == 3 && wall <= 120.0;
  for (std::size_t i = 0; ok && i < 3; ++i) ok = within(ex[i], want[i], 0.02);
  const double sum = r.summary["sum"].get<double>();
  ok = ok && within(sum, -41.0 / 3.0, 0.01 * 41.0 / 3.0);
  g_ks_lorenz = r.summary["ks_entropy"].get<double>();
  return {ok, "113-bit, 6000 LTU: (" + fmt(ex[0], 5) + ", " + fmt(ex[1], 3) + ", " + fmt(ex[2], 6) + ") vs (0.906, 0, -14.572) +-0.02; sum " +
                  fmt(sum, 6) + " vs -13.667 +-1%; " + fmt(wall, 3) + " s of 120 s"};
}

// ---- 2 --------------------------------------------------------------------------

Verdict horizon() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run(cb::ExperimentKind::Horizon, "c2");
  const double wall = seconds_since(t0);
  const auto& j = r.summary;
  std::string rungs;
  double top = 0.0;
  for (const auto& e : j["entries"]) {
    rungs += (rungs.empty() ? "" : ", ") + std::to_string(e["mantissa_bits"].get<int>()) + ":" + fmt(e["T_c"].get<double>(), 4);
    top = e["T_c"].get<double>();
  }
  const bool inc = j["strictly_increasing"].get<bool>();
  const double r2 = j["fit_vs_digits"]["r_squared"].get<double>();
  const bool ok = inc && r2 >= 0.9 && top >= 500.0 && wall <= 600.0 && j["entries"].size() >= 4;
  return {ok, "T_c [bits:LTU] " + rungs + "; strictly increasing " + (inc ? "yes" : "no") + "; r^2 vs digits " + fmt(r2, 4) +
                  "; top " + fmt(top, 4) + " LTU (need >= 500); " + fmt(wall, 3) + " s of 600 s"};
}

// ---- 3, 4 -------------------------------------------------------------------------

cb::Json g_quantum;

Verdict entropy_curves() {
  const auto c = run(cb::ExperimentKind::EntropyClassical, "c3-classical");
  const auto& cj = c.summary;
  const double ks = g_ks_lorenz;
  bool slope_ok = false;
  std::string slope_txt;
  if (cj["slope_window"].contains("slope")) {
    const double s = cj["slope_window"]["slope"].get<double>();
    slope_ok = within(s, ks, 0.3 * ks);
    slope_txt = "classical slope " + fmt(s) + " on t in [" + fmt(cj["slope_window"]["t_start"].get<double>(), 3) + ", " +
                fmt(cj["slope_window"]["t_end"].get<double>(), 3) + "] vs h_KS " + fmt(ks) + " +-30%";
  } else {
    slope_txt = "classical slope: " + cj["slope_window"]["error"].get<std::string>();
  }

  g_quantum = run(cb::ExperimentKind::EntropyQuantum, "c3-quantum").summary;
  const double lnN = g_quantum["ceiling_lnN"].get<double>();
  cb::ExperimentConfig qcfg(cb::ExperimentKind::EntropyQuantum);
  const auto curve = cb::detail::quantum_run(qcfg, 50).curve;
  const double s50 = curve.entropy[50];
  const double peak = g_quantum["max_entropy"].get<double>();
  const bool sat_ok = within(s50, lnN, 0.05 * lnN) && peak <= lnN + 1e-10;

  bool rise_ok = true;
  std::string rises;
  for (const auto& e : cj["ceilings"]) {
    if (e["rise"].is_null()) continue;
    const double r = e["rise"].get<double>();
    rise_ok = rise_ok && within(r, std::log(2.0), 0.2 * std::log(2.0));
    rises += (rises.empty() ? "" : ", ") + fmt(r, 3);
  }

  const auto q16 = run(cb::ExperimentKind::EntropyQuantum, "c3-quantum-m16", "[quantum]\nM = 16\n").summary;
  cb::ExperimentConfig q16cfg(cb::ExperimentKind::EntropyQuantum);
  q16cfg.set("quantum.M", "16");
  const double ceil8 = cb::curve_ceiling(cb::detail::quantum_run(qcfg, 60).curve);
  const double ceil16 = cb::curve_ceiling(cb::detail::quantum_run(q16cfg, 60).curve);
  const bool fixed_ok = within(ceil16, ceil8, 0.2 * std::log(2.0)) && within(ceil8, lnN, 0.05 * lnN) &&
                        q16["max_entropy"].get<double>() <= lnN + 1e-10;

  return {slope_ok && sat_ok && rise_ok && fixed_ok,
          slope_txt + (slope_ok ? " ok" : " MISS") + "; quantum S(50) " + fmt(s50, 5) + " vs ln128 " + fmt(lnN, 5) +
              " +-5%, max " + fmt(peak, 6) + (sat_ok ? " ok" : " MISS") + "; classical ceiling rise per eps-halving [" +
              rises + "] vs ln2 " + fmt(std::log(2.0), 3) + " +-20%" + (rise_ok ? " ok" : " MISS") +
              " (ln K = " + fmt(cj["ln_members"].get<double>(), 3) + " caps the ceiling)" + "; quantum ceiling M=8 " +
              fmt(ceil8, 5) + " vs M=16 " + fmt(ceil16, 5) + (fixed_ok ? " ok" : " MISS")};
}

Verdict quantum_slope() {
  if (g_quantum.is_null()) g_quantum = run(cb::ExperimentKind::EntropyQuantum, "c3-quantum").summary;
  const double h = cb::cat_map_ks_entropy();
  const double s = g_quantum["initial_slope"]["slope"].get<double>();
  const bool ok = s >= h / 2.0 && s <= 2.0 * h;
  return {ok, "slope over kicks 0-" + fmt(g_quantum["initial_slope"]["t_end"].get<double>(), 2) + " = " + fmt(s, 6) +
                  " vs ln((3+sqrt5)/2) = " + fmt(h, 6) + " (factor " + fmt(s / h, 4) + ", need within 2)"};
}

// ---- 5 --------------------------------------------------------------------------

Verdict supremacy() {
  const auto r = run(cb::ExperimentKind::SupremacyReport, "c5");
  const auto j = cb::Json::parse(cb::testing::slurp(r.dir / "supremacy.json"));
  const bool has = j.contains("digital") && j["digital"].contains("horizon_cycles") && j.contains("analog") &&
                   j["analog"].contains("N_c") && j.contains("ratio");
  if (!has) return {false, "supremacy.json lacks digital horizon, N_c or ratio"};
  const double nc = j["analog"]["N_c"].get<double>();
  const double dig = j["digital"]["horizon_cycles"].get<double>();
  const double ratio = j["ratio"].get<double>();
  const bool ok = nc >= 1e3 && nc <= 1e4 && !j["analog"]["at_ceiling"].get<bool>() && dig > 0.0 &&
                  within(ratio, nc / dig, 1e-9 * ratio) && !j["extrapolation"]["asserted"].get<bool>();
  return {ok, "analog N_c " + fmt(nc, 6) + " cycles (need [1e3, 1e4]); digital 53-bit horizon " + fmt(dig, 5) +
                  " cycles; ratio " + fmt(ratio, 5) + "; quartz extrapolation " +
                  fmt(j["extrapolation"]["ratio"].get<double>(), 4) + " recorded, not asserted"};
}

// ---- 6 --------------------------------------------------------------------------

Verdict sampling() {
  const auto r = run(cb::ExperimentKind::SampleCompare, "c6");
  const auto& j = r.summary;
  double worst = 0.0;
  for (const auto& p : j["pairs"]) worst = std::max(worst, p["tv"].get<double>());
  const double mean = j["mean_tv"].get<double>();
  const double ratio = j["tv_ratio_on_doubling"].is_null() ? 0.0 : j["tv_ratio_on_doubling"].get<double>();
  const bool ok = worst < 0.1 && ratio >= 1.0 && ratio <= 4.0;
  return {ok, std::to_string(j["pairs"].size()) + " pairs of " + std::to_string(j["cycles"].get<std::size_t>()) + "-cycle sets, " +
                  std::to_string(j["grid"].get<std::size_t>()) + "^2 grid: tv mean " + fmt(mean) + ", worst " + fmt(worst) +
                  " (need < 0.1); tv(1e4)/tv(2e4) = " + fmt(ratio) + " (need [1, 4])"};
}

// ---- 7 --------------------------------------------------------------------------

Verdict determinism() {
  std::string bad;
  std::size_t files = 0;
  for (auto kind : cb::all_experiments()) {
    const std::string name(cb::experiment_name(kind));
    cb::RunOptions a, b;
    a.out_root = g_root / "c7-a";
    b.out_root = g_root / "c7-b";
    a.jobs = 1;
    b.jobs = 0;
    a.timestamp = "first";
    b.timestamp = "second";
    const auto ra = cb::run_experiment(cb::testing::small_config(kind, "det"), a);
    const auto rb = cb::run_experiment(cb::testing::small_config(kind, "det"), b);
    const auto fa = cb::testing::artifact_bytes(ra.dir), fb = cb::testing::artifact_bytes(rb.dir);
    files += fa.size();
    if (fa != fb || fa.empty()) bad += (bad.empty() ? "" : ", ") + name;
  }
  return {bad.empty(), std::to_string(cb::all_experiments().size()) + " experiments rerun, " + std::to_string(files) +
                           " artifacts compared byte for byte (manifest excluded)" + (bad.empty() ? "" : "; differ: " + bad)};
}

// ---- 8 --------------------------------------------------------------------------

double worst_jacobian_error() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  auto check = [&](auto field, auto jac, const std::vector<double>& s) {
    const auto J = jac(std::span<const double>(s));
    cb::PrecisionScope scope(128);
    const cb::BigFloat h(1e-8);
    for (std::size_t j = 0; j < s.size(); ++j) {
      std::vector<cb::BigFloat> sp(s.begin(), s.end()), sm(s.begin(), s.end());
      sp[j] += h;
      sm[j] -= h;
      const auto fp = field(std::span<const cb::BigFloat>(sp));
      const auto fm = field(std::span<const cb::BigFloat>(sm));
      for (std::size_t i = 0; i < s.size(); ++i) {
        const double fd = cb::to_double((fp[i] - fm[i]) / (cb::BigFloat(2.0) * h));
        worst = std::max(worst, std::fabs(fd - J(i, j)) / std::max(1.0, std::fabs(J(i, j))));
      }
    }
  };
  const cb::LorenzParams lp{};
  const cb::DuffingParams dp{};
  for (int k = 0; k < 200; ++k) {
    check([&](auto x) { return cb::lorenz_field<cb::BigFloat>(lp, x); }, [&](auto x) { return cb::lorenz_jacobian<double>(lp, x); },
          {20 * u(rng), 25 * u(rng), 25 + 25 * u(rng)});
    check([&](auto x) { return cb::duffing_field<cb::BigFloat>(dp, x); }, [&](auto x) { return cb::duffing_jacobian<double>(dp, x); },
          {2 * u(rng), 2 * u(rng), 10 * u(rng)});
  }
  return worst;
}

double harmonic_error(int order, double h) {
  const std::vector<double> x0{1.0, 0.0};
  const double T = std::round(std::numbers::pi / h) * h;
  const auto tr = cb::integrate<double>(cb::make_harmonic(), x0, T, cb::PrecisionConfig{53, order, h, 1000000});
  const auto s = tr.final_state();
  return std::hypot(s[0] - std::cos(T), s[1] + std::sin(T));
}

Verdict hygiene() {
  const double jac = worst_jacobian_error();
  bool order_ok = true;
  std::string orders;
  for (int order : {4, 6, 8}) {
    const double e1 = harmonic_error(order, 0.4), e2 = harmonic_error(order, 0.2), e3 = harmonic_error(order, 0.1);
    const double want = std::pow(2.0, order);
    for (double r : {e1 / e2, e2 / e3}) order_ok = order_ok && r >= want / 4 && r <= want * 4;
    orders += (orders.empty() ? "" : ", ") + std::to_string(order) + ":" + fmt(e1 / e2, 3) + "/" + fmt(e2 / e3, 3);
  }
  const auto model = cb::cat_map_unitary(128);
  const cb::MeasurementPartition part(128, 8);
  auto rho = cb::DensityMatrix::coherent_state(128, 0.29 * 128, 0.17 * 128);
  double tr = 0.0, herm = 0.0;
  for (int k = 0; k < 1000; ++k) {
    rho = cb::measured_step(rho, model, part);
    tr = std::max(tr, rho.trace_error());
    herm = std::max(herm, rho.hermiticity_error());
  }
  const bool ok = jac <= 1e-6 && order_ok && tr <= 1e-10 && herm <= 1e-12;
  return {ok, "worst Jacobian vs FD (rel) " + fmt(jac, 3) + " over 400 states; harmonic error ratios per halving [order:r1/r2] " + orders +
                  " (need 2^order within x4); quantum 1e3 steps N=128 M=8: trace err " + fmt(tr, 3) + ", Hermiticity err " + fmt(herm, 3)};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_root = argv[1];
  fs::create_directories(g_root);
  std::cout << "artifacts under " << fs::absolute(g_root).string() << std::endl;
  report(1, "Lyapunov spectrum", lyapunov);
  report(2, "horizon scaling", horizon);
  report(3, "entropy curves", entropy_curves);
  report(4, "quantum initial slope", quantum_slope);
  report(5, "analog vs digital", supremacy);
  report(6, "sampling consistency", sampling);
  report(7, "determinism", determinism);
  report(8, "numerical hygiene", hygiene);
  std::cout << (g_failures == 0 ? "all criteria passed" : std::to_string(g_failures) + " criteria failed") << std::endl;
  return g_failures == 0 ? 0 : 1;
}
