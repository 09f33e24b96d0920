// End-to-end acceptance gate. Each numbered check prints one PASS or FAIL
// line with the measured values next to its pinned window, then the process
// exits nonzero if anything failed. Windows live here and nowhere else.

#include <hdqkd/io.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

using namespace hdqkd;
using clock_type = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int idx, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", idx, detail.c_str());
  if (!pass) ++g_failures;
}

bool window(std::string& detail, const char* name, double value, double target, double tol) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%s=%.4f (want %.4f+/-%.4f) ", name, value, target, tol);
  detail += buf;
  return std::abs(value - target) <= tol;
}

int worker_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min(hw == 0 ? 1u : hw, 8u));
}

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

Bench load_bench(const char* preset) {
  const auto data = io::default_data_dir();
  return make_bench(io::load_preset(preset, data));
}

Bench ideal_bench(int l) {
  RunSettings s;
  s.subspace_l = l;
  return make_bench(s);
}

constexpr std::int64_t kTrialsPerMode = 100000;

// Noisy bench metrics against their windows, shared by checks 1 and 2.
bool metric_windows(std::string& detail, const SecurityReport& r, double i_ab, double f_e, double i_ae, double rate) {
  bool ok = true;
  ok &= window(detail, "I_AB", r.measured.mutual_info_ab, i_ab, 0.03);
  ok &= window(detail, "F_E", r.measured.cloning_fidelity, f_e, 0.01);
  ok &= window(detail, "I_AE", r.measured.mutual_info_ae, i_ae, 0.02);
  ok &= window(detail, "R", r.measured.key_rate, rate, 0.03);
  return ok;
}

void criterion_1() {
  const Bench bench = load_bench("paper_l10");
  const auto t0 = clock_type::now();
  const CrosstalkMatrix m = estimate_crosstalk(bench, kTrialsPerMode, 9001, worker_count());
  const double elapsed = seconds_since(t0);
  const SecurityReport r = build_report(m);

  std::string detail;
  bool ok = metric_windows(detail, r, 1.76, 0.41, 0.13, 1.63);
  ok &= window(detail, "Q", r.measured.qber, 0.03, 0.005);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "elapsed=%.1fs (limit 60s)", elapsed);
  detail += buf;
  ok &= elapsed < 60.0;
  report(1, ok, detail);
}

void criterion_2() {
  const Bench bench = load_bench("paper_l1");
  const CrosstalkMatrix m = estimate_crosstalk(bench, kTrialsPerMode, 9002, worker_count());
  const SecurityReport r = build_report(m);
  std::string detail;
  const bool ok = metric_windows(detail, r, 1.69, 0.44, 0.17, 1.52);
  report(2, ok, detail);
}

void criterion_3() {
  const SecurityMetrics m = metrics_from_fidelity(1.0, 4);
  std::string detail;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "I_AB=%.14f F_E=%.14f I_AE=%.14f R=%.14f (exact 2, 0.25, 0, 2)",
                m.mutual_info_ab, m.cloning_fidelity, m.mutual_info_ae, m.key_rate);
  detail = buf;
  const bool ok = std::abs(m.mutual_info_ab - 2.0) < 1e-12 && std::abs(m.cloning_fidelity - 0.25) < 1e-12 &&
                  std::abs(m.mutual_info_ae) < 1e-12 && std::abs(m.key_rate - 2.0) < 1e-12;
  report(3, ok, detail);
}

void criterion_4(const Bench& ideal_l10, const CrosstalkMatrix& born_l10) {
  // The clean vector analyser must separate its own codebook one mode per
  // port, and the first two modes must land on their designated detectors.
  double dev = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      dev = std::max(dev, std::abs(born_l10.p(i, j) - (i == j ? 1.0 : 0.0)));
    }
  }
  const double delta = ideal_l10.settings.delta_pi * std::numbers::pi;
  const auto out00 = vector_analyse(ideal_l10.modes[0], delta, 0.5, ideal_l10.ports);
  const auto out01 = vector_analyse(ideal_l10.modes[1], delta, 0.5, ideal_l10.ports);
  const bool ports_ok = out00.click && out01.click &&
                        *out00.port == DetectorPort{MubBasis::vector, Path::d, -1} &&
                        *out01.port == DetectorPort{MubBasis::vector, Path::c, 1};

  char buf[128];
  std::snprintf(buf, sizeof(buf), "vector block deviation from one-per-port=%.2e (limit 1e-9), routing %s",
                dev, ports_ok ? "v00->(d,-) v01->(c,+)" : "WRONG PORT");
  report(4, dev < 1e-9 && ports_ok, buf);
}

void criterion_5(const CrosstalkMatrix& born_l10, const CrosstalkMatrix& mc_l10) {
  double born_dev = 0.0;
  int mc_misses = 0;
  const double sigma = std::sqrt(0.25 * 0.75 / double(kTrialsPerMode));
  for (int i = 0; i < 8; ++i) {
    const int other = i < 4 ? 4 : 0;
    for (int j = other; j < other + 4; ++j) {
      born_dev = std::max(born_dev, std::abs(born_l10.p(i, j) - 0.25));
      if (std::abs(mc_l10.p(i, j) - 0.25) > 3 * sigma) ++mc_misses;
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "analytic cross-basis deviation=%.2e (limit 1e-9), sampled cells beyond 3 sigma=%d/32",
                born_dev, mc_misses);
  report(5, born_dev < 1e-9 && mc_misses == 0, buf);
}

void criterion_6(const Bench& ideal_l10) {
  const auto t0 = clock_type::now();
  const Transcript det = run_bb84(10000, DetectorScheme::deterministic, {}, ideal_l10, 9006, worker_count());
  const Transcript fil = run_bb84(10000, DetectorScheme::filter, {}, ideal_l10, 9006, worker_count());
  const double elapsed = seconds_since(t0);

  const double f_det = double(tally(det).sifted) / 10000.0;
  const double f_fil = double(tally(fil).sifted) / 10000.0;
  const double ratio = f_det / f_fil;

  std::string detail;
  bool ok = window(detail, "sift_det", f_det, 0.50, 0.015);
  ok &= window(detail, "sift_filter", f_fil, 0.25, 0.015);
  ok &= window(detail, "ratio", ratio, 2.0, 0.15);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "elapsed=%.1fs (limit 10s)", elapsed);
  detail += buf;
  ok &= elapsed < 10.0;
  report(6, ok, detail);
}

void criterion_7(const Bench& ideal_l10) {
  const int runs = 400;
  double sifted_sum = 0.0;
  for (int s = 0; s < runs; ++s) {
    const Transcript t = run_bb84(100, DetectorScheme::deterministic, {}, ideal_l10, 9100 + std::uint64_t(s));
    sifted_sum += double(tally(t).sifted);
  }
  const double mean_sifted = sifted_sum / runs;
  const double mean_key_bits = 2.0 * mean_sifted;

  const Transcript t = run_bb84(100, DetectorScheme::deterministic, {}, ideal_l10, 9100);
  const SiftResult keys = sift(t);
  const std::vector<std::uint8_t> payload = {'k', 'e', 'y', ' ', 't', 'e', 's', 't'};
  const auto cipher = otp_encrypt(payload, keys.alice.bits);
  const auto plain = otp_decrypt(cipher.data, keys.bob.bits);
  const bool otp_ok = plain.data == payload && cipher.data != payload;

  std::string detail;
  bool ok = window(detail, "mean_retained", mean_sifted, 50.0, 1.0);
  ok &= window(detail, "mean_key_bits", mean_key_bits, 100.0, 2.0);
  detail += otp_ok ? "pad round-trip byte-exact" : "pad round-trip FAILED";
  ok &= otp_ok;
  report(7, ok, detail);
}

void criterion_8(const Bench& ideal_l10) {
  const EveStrategy eve{EveKind::intercept_resend, 0.5};
  const Transcript t = run_bb84(10000, DetectorScheme::deterministic, eve, ideal_l10, 9008, worker_count());
  const SiftResult keys = sift(t);
  const double q = qber(keys.alice, keys.bob);
  const double bound = qber_security_bound(4);
  const bool flagged = q > bound;

  std::string detail;
  bool ok = window(detail, "Q", q, 0.375, 0.01);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "bound=%.2f verdict=%s", bound, flagged ? "insecure" : "secure");
  detail += buf;
  ok &= flagged;
  report(8, ok, detail);
}

// Entrywise agreement of one sampled matrix with its exact counterpart.
// Certain cells must stay certain; the rest get a binomial 3 sigma band.
void compare_matrices(const CrosstalkMatrix& born, const CrosstalkMatrix& mc, int& misses, double& worst) {
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      const double p = born.p(i, j);
      if (p < 1e-12 || p > 1.0 - 1e-12) {
        if (mc.p(i, j) != (p > 0.5 ? 1.0 : 0.0)) ++misses;
        continue;
      }
      const double sigma = std::sqrt(p * (1.0 - p) / double(kTrialsPerMode));
      const double z = std::abs(mc.p(i, j) - p) / sigma;
      worst = std::max(worst, z);
      if (z > 3.0) ++misses;
    }
  }
}

void criterion_9(const CrosstalkMatrix& born_l1, const CrosstalkMatrix& mc_l1, const CrosstalkMatrix& born_l10,
                 const CrosstalkMatrix& mc_l10) {
  int misses = 0;
  double worst = 0.0;
  compare_matrices(born_l1, mc_l1, misses, worst);
  compare_matrices(born_l10, mc_l10, misses, worst);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "l=1 and l=10 cells beyond 3 sigma=%d/128 (worst z=%.2f)", misses, worst);
  report(9, misses == 0, buf);
}

}  // namespace

int main() {
  const int threads = worker_count();
  std::printf("acceptance gate, %d worker thread%s\n", threads, threads == 1 ? "" : "s");

  criterion_1();
  criterion_2();
  criterion_3();

  const Bench ideal_l10 = ideal_bench(10);
  const Bench ideal_l1 = ideal_bench(1);
  const CrosstalkMatrix born_l10 = born_crosstalk(ideal_l10);
  const CrosstalkMatrix born_l1 = born_crosstalk(ideal_l1);
  const CrosstalkMatrix mc_l10 = estimate_crosstalk(ideal_l10, kTrialsPerMode, 9010, threads);
  const CrosstalkMatrix mc_l1 = estimate_crosstalk(ideal_l1, kTrialsPerMode, 9011, threads);

  criterion_4(ideal_l10, born_l10);
  criterion_5(born_l10, mc_l10);
  criterion_6(ideal_l10);
  criterion_7(ideal_l10);
  criterion_8(ideal_l10);
  criterion_9(born_l1, mc_l1, born_l10, mc_l10);

  std::printf("INFO criterion 10: physical tabletop validation sits outside this codebase\n");

  if (g_failures == 0) {
    std::printf("acceptance gate clean\n");
  } else {
    std::printf("acceptance gate: %d criteria failed\n", g_failures);
  }
  return g_failures == 0 ? 0 : 1;
}
