// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pascalsim/equalize.hpp"
#include "pascalsim/gaussian_moments.hpp"
#include "pascalsim/montecarlo.hpp"
#include "pascalsim/ser_analytic.hpp"

using namespace pascalsim;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

std::vector<DroneParams> table1(std::size_t k) {
  std::vector<DroneParams> d{{10 * kDegree, 80.0, 1000.0, 1.0},
                             {25 * kDegree, 80.0, 2500.0, 1.0},
                             {40 * kDegree, 80.0, 4000.0, 1.0},
                             {55 * kDegree, 80.0, 5500.0, 1.0}};
  d.resize(k);
  return d;
}

Scenario base_scenario(int antennas, std::size_t drones, double snr_db, int pilots, int order) {
  Scenario s;
  s.system = SystemConfig::half_wavelength(antennas, 2e-3, 1e5, 0.0);
  s.drones = table1(drones);
  s.snr_db = snr_db;
  s.frame = {pilots, 100, order};
  return s;
}

MomentContext context_for(const Scenario& s, const LocalizationErrorModel& em, EqualizerKind kind,
                          std::size_t target, int taylor) {
  MomentContext c;
  c.system = s.resolved_system();
  c.drones = s.drones;
  c.errors = em;
  c.modulation_order = s.frame.modulation_order;
  c.kind = kind;
  c.target = target;
  c.approx = s.approx;
  c.approx.taylor_order = taylor;
  return c;
}

// Sampled-model scenario whose sigmas come from an AO-ML calibration run.
Scenario calibrated(Scenario s, std::size_t calibration_trials, std::size_t trials) {
  s.n_trials = calibration_trials;
  s.error_model = calibrate_error_model(s);
  s.error_source = ErrorSource::SampledModel;
  s.weights = WeightMode::Neumann;
  s.n_trials = trials;
  return s;
}

std::string sigmas_text(const LocalizationErrorModel& m) {
  std::string out;
  for (std::size_t k = 0; k < m.sigmas.size(); ++k)
    out += fmt("%s[th %.3g rad, d %.3g m, fd %.4g Hz]", k ? " " : "", m.sigmas[k].doa, m.sigmas[k].range,
               m.sigmas[k].doppler);
  return out;
}

// 1. Zeroth-order Neumann ZF with the nominal diagonal equals H^H / N and decides like MRC.
Outcome ac1() {
  std::mt19937_64 rng(20240101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t weight_mismatch = 0, decision_mismatch = 0, decisions = 0;
  for (int inst = 0; inst < 1000; ++inst) {
    const int k = 1 + static_cast<int>(rng() % 4);
    const int n = 1 + static_cast<int>(rng() % 8);
    const int m = 1 << (1 + rng() % 4);
    SystemConfig sys = SystemConfig::half_wavelength(n, 2e-3, 1e5, 0.0);
    std::vector<DroneParams> d(static_cast<std::size_t>(k));
    for (auto& p : d) p = {(-80.0 + 160.0 * u(rng)) * kDegree, 20.0 + 180.0 * u(rng), -2e4 + 4e4 * u(rng), 1.0};
    sys.noise_variance = noise_variance_for_snr(d[0], sys, -5.0 + 25.0 * u(rng));
    const ChannelMatrix h = channel_matrix(d, sys);
    const CMatrix w0 = zf_weights_neumann(h, 0, DiagonalMode::Nominal).matrix;
    const CMatrix ref = h.entries.adjoint() / static_cast<double>(n);
    if (!(w0.array() == ref.array()).all()) ++weight_mismatch;
    const CMatrix mrc = mrc_weights(h).matrix;
    std::normal_distribution<double> g(0.0, std::sqrt(0.5 * sys.noise_variance));
    for (int t = 0; t < 10; ++t) {
      CVector s(k);
      for (int p = 0; p < k; ++p) s[p] = mpsk_symbol(1 + static_cast<int>(rng() % m), m);
      CVector y = h.entries * s;
      for (int a = 0; a < n; ++a) y[a] += cplx(g(rng), g(rng));
      const CVector xm = mrc * y, xz = w0 * y;
      for (int p = 0; p < k; ++p, ++decisions)
        if (detect_mpsk(xm[p], m) != detect_mpsk(xz[p], m)) ++decision_mismatch;
    }
  }
  return {weight_mismatch == 0 && decision_mismatch == 0,
          fmt("1000 instances: %zu weight mismatches, %zu/%zu decisions differ from MRC", weight_mismatch,
              decision_mismatch, decisions)};
}

// 2. Neumann error decreases monotonically and is tiny at order 6.
Outcome ac2() {
  const SystemConfig sys = SystemConfig::half_wavelength(8, 2e-3, 1e5, 0.0);
  const std::vector<DroneParams> d{{0.0, 1.0, 0.0, 1.0}, {15 * kDegree, 1.0, 1000.0, 1.0}};
  const ChannelMatrix h = channel_matrix(d, sys);
  const CMatrix exact = zf_weights_exact(h).matrix;
  std::vector<double> err;
  for (int r = 0; r <= 6; ++r)
    err.push_back((zf_weights_neumann(h, r, DiagonalMode::Measured).matrix - exact).norm());
  bool monotone = true;
  for (std::size_t r = 1; r < err.size(); ++r) monotone = monotone && err[r] < err[r - 1];
  std::string list;
  for (double e : err) list += fmt(" %.2e", e);
  return {monotone && err[6] < 1e-6, fmt("||W_R - W||_F for R=0..6:%s", list.c_str())};
}

// 3. Closed-form moments against quadrature and 1e6-draw Monte Carlo.
Outcome ac3() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto log_uniform = [&](double lo, double hi) { return lo * std::pow(hi / lo, u(rng)); };
  constexpr int kCases = 200;
  constexpr int kDraws = 1'000'000;
  double worst_q1 = 0, worst_q3 = 0, worst_qg = 0, worst_m1 = 0, worst_m3 = 0, worst_mg = 0;
  double tq = 0, tm = 0;
  auto now = [] { return std::chrono::steady_clock::now(); };
  auto secs = [](auto a, auto b) { return std::chrono::duration<double>(b - a).count(); };

  const auto start = now();
  for (int c = 0; c < kCases; ++c) {
    // single-variable moment
    {
      double sigma, coeff, offset, quad;
      Interval b;
      Parity par;
      do {
        sigma = log_uniform(0.005, 0.1);
        coeff = -40.0 + 80.0 * u(rng);
        offset = -kPi + 2.0 * kPi * u(rng);
        b = (c % 2 == 0) ? Interval{-kPi, kPi} : Interval{-sigma * (0.5 + 3.5 * u(rng)), sigma * (0.5 + 3.5 * u(rng))};
        par = (rng() & 1) ? Parity::Cos : Parity::Sin;
        quad = oracle::gauss_expect(
            [&](double x) { return par == Parity::Cos ? std::cos(offset + coeff * x) : std::sin(offset + coeff * x); },
            sigma, b.lo, b.hi);
      } while (std::abs(quad) < 0.2);  // keeps the relative MC leg meaningful
      const double cf = gaussian_trig_moment(coeff, offset, sigma, b, par);
      worst_q1 = std::max(worst_q1, std::abs(cf - quad));
      const auto m0 = now();
      oracle::TruncatedNormal tn{sigma, b.lo, b.hi};
      double acc = 0.0;
      for (int i = 0; i < kDraws; ++i) {
        const double a = offset + coeff * tn(rng);
        acc += par == Parity::Cos ? std::cos(a) : std::sin(a);
      }
      worst_m1 = std::max(worst_m1, std::abs(acc / kDraws - cf) / std::abs(cf));
      tm += secs(m0, now());
    }
    // three-variable moment
    {
      TrigTriple t;
      TripleSigmas s;
      Parity par;
      double quad;
      do {
        s.doppler = log_uniform(50.0, 3000.0);
        const double span = 2.0 + 4.0 * u(rng);
        s.doppler_bounds = {-span * s.doppler, span * s.doppler};
        s.theta_k = log_uniform(0.005, 0.1);
        s.theta_q = log_uniform(0.005, 0.1);
        s.theta_bounds = (c % 2 == 0) ? Interval{-kPi, kPi} : Interval{-0.25, 0.25};
        t.c1 = -kPi + 2.0 * kPi * u(rng);
        t.c2 = 2.0 * kPi * (-8.0 + 16.0 * u(rng)) / 1e5;
        t.c3 = -30.0 + 60.0 * u(rng);
        t.c4 = -30.0 + 60.0 * u(rng);
        par = (rng() & 1) ? Parity::Cos : Parity::Sin;
        auto f = [&](double a) { return par == Parity::Cos ? std::cos(a) : std::sin(a); };
        const oracle::GaussWeight wf(s.doppler, s.doppler_bounds.lo, s.doppler_bounds.hi, 1e-12);
        const oracle::GaussWeight wk(s.theta_k, s.theta_bounds.lo, s.theta_bounds.hi, 1e-12);
        const oracle::GaussWeight wq(s.theta_q, s.theta_bounds.lo, s.theta_bounds.hi, 1e-12);
        quad = wf.expect([&](double df) {
          return wq.expect(
              [&](double tq) { return wk.expect([&](double tk) { return f(t.c1 + t.c2 * df + t.c3 * tk + t.c4 * tq); }); });
        });
      } while (std::abs(quad) < 0.2);
      const double cf = trig_moment_triple(t, s, par);
      worst_q3 = std::max(worst_q3, std::abs(cf - quad));
      const auto m0 = now();
      oracle::TruncatedNormal nf{s.doppler, s.doppler_bounds.lo, s.doppler_bounds.hi};
      oracle::TruncatedNormal nk{s.theta_k, s.theta_bounds.lo, s.theta_bounds.hi};
      oracle::TruncatedNormal nq{s.theta_q, s.theta_bounds.lo, s.theta_bounds.hi};
      double acc = 0.0;
      for (int i = 0; i < kDraws; ++i) {
        const double a = t.c1 + t.c2 * nf(rng) + t.c3 * nk(rng) + t.c4 * nq(rng);
        acc += par == Parity::Cos ? std::cos(a) : std::sin(a);
      }
      worst_m3 = std::max(worst_m3, std::abs(acc / kDraws - cf) / std::abs(cf));
      tm += secs(m0, now());
    }
    // Gamma moments, two drones
    {
      MomentContext ctx;
      const int n = 4 + static_cast<int>(rng() % 5);
      ctx.system = SystemConfig::half_wavelength(n, 2e-3, 1e5, 0.0);
      const double t1 = (-50.0 + 100.0 * u(rng)) * kDegree;
      double t2 = t1 + (rng() & 1 ? 1.0 : -1.0) * (20.0 + 40.0 * u(rng)) * kDegree;
      if (std::abs(t2) > 70 * kDegree) t2 = t1 - (t2 - t1);
      ctx.drones = {{t1, 50.0 + 100.0 * u(rng), 1000.0, 1.0}, {t2, 50.0 + 100.0 * u(rng), 2500.0, 1.0}};
      ctx.system.noise_variance = noise_variance_for_snr(ctx.drones[0], ctx.system, 5.0);
      ctx.errors.sigmas = {{log_uniform(0.005, 0.1), 0.0, 500.0}, {log_uniform(0.005, 0.1), 0.0, 500.0}};
      ctx.kind = (rng() & 1) ? EqualizerKind::ZF : EqualizerKind::MMSE;
      ctx.approx.neumann_order = 1 + static_cast<int>(rng() % 3);
      ctx.target = rng() % 2;
      const GammaMoments gm = gamma_moments(ctx);

      oracle::GammaSetup gs;
      gs.n_ant = n;
      gs.c = ctx.system.phase_factor();
      gs.doa = {t1, t2};
      gs.gain = {path_gain(ctx.drones[0].range, ctx.system), path_gain(ctx.drones[1].range, ctx.system)};
      gs.noise_variance = ctx.system.noise_variance;
      gs.regularizer = ctx.regularizer();
      gs.neumann_order = ctx.approx.neumann_order;
      gs.target = static_cast<int>(ctx.target);
      const double s1 = ctx.errors.sigmas[0].doa, s2 = ctx.errors.sigmas[1].doa;
      const oracle::GaussWeight w1(s1, -kPi, kPi, 1e-12), w2(s2, -kPi, kPi, 1e-12);
      auto moment = [&](int power) {
        return w1.expect([&](double a) {
          return w2.expect([&](double b) { return std::pow(oracle::gamma_small_angle_2(gs, a, b), power); });
        });
      };
      const double q1 = moment(1), q2 = moment(2);
      worst_qg = std::max({worst_qg, std::abs(gm.mean - q1) / q1, std::abs(gm.second - q2) / q2});
      const auto m0 = now();
      oracle::TruncatedNormal n1{s1, -kPi, kPi}, n2{s2, -kPi, kPi};
      double a1 = 0.0, a2 = 0.0;
      for (int i = 0; i < kDraws; ++i) {
        const double g = oracle::gamma_small_angle_2(gs, n1(rng), n2(rng));
        a1 += g;
        a2 += g * g;
      }
      a1 /= kDraws;
      a2 /= kDraws;
      worst_mg = std::max({worst_mg, std::abs(a1 - gm.mean) / gm.mean, std::abs(a2 - gm.second) / gm.second});
      tm += secs(m0, now());
    }
  }
  tq = secs(start, now()) - tm;
  const bool pass = worst_q1 < 1e-7 && worst_q3 < 1e-7 && worst_qg < 1e-7 && worst_m1 < 0.02 && worst_m3 < 0.02 &&
                    worst_mg < 0.02;
  return {pass, fmt("200 cases, worst quadrature error: trig %.1e, triple %.1e, gamma %.1e (rel); worst MC rel: "
                    "%.2f%%, %.2f%%, %.2f%% (quadrature %.0f s, sampling %.0f s)",
                    worst_q1, worst_q3, worst_qg, 100 * worst_m1, 100 * worst_m3, 100 * worst_mg, tq, tm)};
}

// 4. Closed form against simulation with calibrated sampled errors.
Outcome ac4() {
  bool pass = true;
  std::string detail;
  for (double snr : {12.0, 4.0}) {
    Scenario s = calibrated(base_scenario(5, 2, snr, 30, 4), 1000, 5000);
    s.seed = 404;
    const CampaignPoint cp = run_campaign_point(s);
    detail += fmt("%s%g dB sigmas %s;", detail.empty() ? "" : " | ", snr, sigmas_text(s.error_model).c_str());
    for (const auto& r : cp.ser)
      for (std::size_t k = 0; k < s.drones.size(); ++k) {
        const double a = average_ser(context_for(s, s.error_model, r.kind, k, 8));
        const auto& d = r.per_drone[k];
        const double tol = std::max(0.15 * a, 3.0 * d.ci95);
        const bool ok = std::abs(a - d.ser) <= tol;
        pass = pass && ok;
        detail += fmt(" %s/%zu mc %.3g ana %.3g%s", std::string(to_string(r.kind)).c_str(), k + 1, d.ser, a,
                      ok ? "" : " (out)");
      }
  }
  return {pass, detail};
}

// 5. Range errors leave ZF unchanged and move MMSE.
Outcome ac5() {
  Scenario s = base_scenario(5, 2, 4.0, 30, 4);
  LocalizationErrorModel em = LocalizationErrorModel::uniform(2, {0.018, 0.0, 2150.0});
  std::vector<double> zf, mmse;
  for (double sr : {0.0, 1.0, 10.0}) {
    for (auto& t : em.sigmas) t.range = sr;
    zf.push_back(average_ser(context_for(s, em, EqualizerKind::ZF, 0, 8)));
    mmse.push_back(average_ser(context_for(s, em, EqualizerKind::MMSE, 0, 8)));
  }
  const double dz = std::max(std::abs(zf[1] - zf[0]), std::abs(zf[2] - zf[0]));
  const double dm = std::max(std::abs(mmse[1] - mmse[0]), std::abs(mmse[2] - mmse[0]));
  return {dz < 1e-12 && dm > 1e-11,
          fmt("ZF %.6g %.6g %.6g (max change %.1e); MMSE %.6g %.6g %.6g (max change %.1e)", zf[0], zf[1], zf[2], dz,
              mmse[0], mmse[1], mmse[2], dm)};
}

// 6. Angle errors dominate the ZF loss.
Outcome ac6() {
  Scenario s = calibrated(base_scenario(4, 2, 1.0, 20, 4), 1000, 2000);
  s.seed = 606;
  s.equalizers = {EqualizerKind::ZF};
  const LocalizationErrorModel all = s.error_model;
  LocalizationErrorModel no_theta = all, ideal = all;
  for (auto& t : no_theta.sigmas) t.doa = 0.0;
  for (auto& t : ideal.sigmas) t = ParamTriple{};
  std::vector<SerResult> mc;
  std::vector<double> ana;
  for (const LocalizationErrorModel* m : std::initializer_list<const LocalizationErrorModel*>{&all, &no_theta, &ideal}) {
    s.error_model = *m;
    mc.push_back(run_campaign_point(s).ser[0]);
    ana.push_back(0.5 * (average_ser(context_for(s, *m, EqualizerKind::ZF, 0, 4)) +
                         average_ser(context_for(s, *m, EqualizerKind::ZF, 1, 4))));
  }
  const double ref_ratio = (0.148 - 0.130) / (0.286 - 0.130);
  const double ratio = (mc[1].ser - mc[2].ser) / (mc[0].ser - mc[2].ser);
  const double ana_ratio = (ana[1] - ana[2]) / (ana[0] - ana[2]);
  const double c01 = 3.0 * std::hypot(mc[0].ci95_halfwidth, mc[1].ci95_halfwidth);
  const double c12 = 3.0 * std::hypot(mc[1].ci95_halfwidth, mc[2].ci95_halfwidth);
  const bool ordered = mc[0].ser - mc[1].ser > c01 && mc[1].ser - mc[2].ser > c12;
  const bool pass = ordered && ratio < 0.25 && ratio > ref_ratio / 2.0 && ratio < ref_ratio * 2.0;
  return {pass, fmt("sigmas %s; ZF SER all/no-angle/ideal = %.4g/%.4g/%.4g (reference 0.286/0.148/0.130), "
                    "ratio %.3f vs reference %.3f (need < 0.25 and within 2x); analytic %.4g/%.4g/%.4g ratio %.3f",
                    sigmas_text(all).c_str(), mc[0].ser, mc[1].ser, mc[2].ser, ratio, ref_ratio, ana[0], ana[1],
                    ana[2], ana_ratio)};
}

// 7. Drone-2 errors move drone-1 SER for ZF and MMSE only.
Outcome ac7() {
  bool pass = true;
  std::string detail;
  for (int m : {2, 4}) {
    Scenario s = calibrated(base_scenario(4, 2, 5.0, 30, m), 1000, 5000);
    s.seed = 707;
    const LocalizationErrorModel on = s.error_model;
    LocalizationErrorModel off = on;
    off.sigmas[1] = ParamTriple{};
    const CampaignPoint a = run_campaign_point(s);
    s.error_model = off;
    const CampaignPoint b = run_campaign_point(s);
    detail += fmt("%s%s:", detail.empty() ? "" : " |", m == 2 ? "BPSK" : "QPSK");
    for (std::size_t e = 0; e < a.ser.size(); ++e) {
      const auto& x = a.ser[e].per_drone[0];
      const auto& y = b.ser[e].per_drone[0];
      const double band = 3.0 * std::hypot(x.ci95, y.ci95);
      const bool mrc = a.ser[e].kind == EqualizerKind::MRC;
      const bool ok = mrc ? std::abs(x.ser - y.ser) < band : (x.ser - y.ser) > band;
      pass = pass && ok;
      detail += fmt(" %s %.3g->%.3g (3CI %.2g)%s", std::string(to_string(a.ser[e].kind)).c_str(), y.ser, x.ser, band,
                    ok ? "" : " (out)");
    }
  }
  return {pass, detail + " [ideal->with drone-2 errors; reference BPSK ZF 4.4e-4->1e-3, MMSE 3e-4->5e-4]"};
}

// 8. MRC error floor with four drones; ZF worse than MRC at low SNR.
Outcome ac8() {
  Scenario s = base_scenario(5, 4, 0.0, 41, 4);
  s.n_trials = 600;
  s.seed = 808;
  const std::vector<double> snrs{-4, 0, 4, 8, 12, 16, 20};
  const auto pts = sweep_campaign(s, SweepAxis::Snr, snrs);
  auto ser = [&](std::size_t i, std::size_t e) { return pts[i].result.ser[e]; };
  const std::size_t lo = 0, mid = 4, hi = snrs.size() - 1;  // -4, 12, 20 dB
  const double mrc_ratio = ser(hi, 0).ser / ser(mid, 0).ser;
  const double zf_ratio = ser(hi, 1).ser / ser(mid, 1).ser;
  const double mmse_ratio = ser(hi, 2).ser / ser(mid, 2).ser;
  const double band = 3.0 * std::hypot(ser(lo, 1).ci95_halfwidth, ser(lo, 0).ci95_halfwidth);
  const bool low = ser(lo, 1).ser - ser(lo, 0).ser > band;
  std::string curve;
  for (std::size_t i = 0; i < snrs.size(); ++i)
    curve += fmt(" %g:%.3g/%.3g/%.3g", snrs[i], ser(i, 0).ser, ser(i, 1).ser, ser(i, 2).ser);
  const bool pass = mrc_ratio >= 0.9 && zf_ratio <= 0.9 && mmse_ratio <= 0.9 && low;
  return {pass, fmt("SER MRC/ZF/MMSE by SNR:%s; 12->20 dB ratio MRC %.3f ZF %.3f MMSE %.3f; ZF-MRC at -4 dB %.3g "
                    "(3CI %.2g)",
                    curve.c_str(), mrc_ratio, zf_ratio, mmse_ratio, ser(lo, 1).ser - ser(lo, 0).ser, band)};
}

// 9. AO-ML angle errors look Gaussian.
Outcome ac9() {
  Scenario s = base_scenario(5, 2, 12.0, 30, 4);
  s.n_trials = 2000;
  s.seed = 909;
  const CampaignPoint cp = run_campaign_point(s, {.simulate_data = false, .keep_errors = true});
  bool pass = true;
  std::string detail;
  for (std::size_t k = 0; k < s.drones.size(); ++k) {
    std::vector<double> v;
    for (const auto& e : cp.errors) v.push_back(e[k].doa);
    const auto m = oracle::moments_of(v);
    pass = pass && std::abs(m.skewness) < 0.15 && std::abs(m.excess_kurtosis) < 0.3;
    detail += fmt("%sdrone %zu: sd %.3g rad, skew %.3f, excess kurtosis %.3f", k ? "; " : "", k + 1, m.sd,
                  m.skewness, m.excess_kurtosis);
  }
  return {pass, detail};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 10. Golden CSV reproduced byte for byte.
Outcome ac10() {
  const std::string golden = slurp(PASCALSIM_GOLDEN_CSV);
  bool pass = !golden.empty();
  std::string detail;
  for (int run = 0; run < 2; ++run) {
    const std::string out = std::string(PASCALSIM_WORK_DIR) + "/golden_run" + std::to_string(run) + ".csv";
    const std::string cmd = std::string("\"") + PASCALSIM_CLI + "\" run \"" + PASCALSIM_EXAMPLE_SCENARIO +
                            "\" --seed 7 --out \"" + out + "\"";
    const int rc = std::system(cmd.c_str());
    const bool same = rc == 0 && slurp(out) == golden;
    pass = pass && same;
    detail += fmt("%srun %d: exit %d, %s", run ? "; " : "", run + 1, rc, same ? "identical" : "differs");
  }
  return {pass, detail};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "MRC-ZF identity", 5, ac1},
      {2, "Neumann convergence", 1, ac2},
      {3, "closed-form moments", 120, ac3},
      {4, "analytic vs simulation", 600, ac4},
      {5, "ZF range invariance", 60, ac5},
      {6, "angle-error dominance", 600, ac6},
      {7, "other-drone sensitivity", 600, ac7},
      {8, "MRC floor, ZF below MRC at low SNR", 900, ac8},
      {9, "AO-ML angle error Gaussianity", 600, ac9},
      {10, "golden determinism", 60, ac10},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = dt < c.limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("AC%-2d %s  %s: %s [%.1f s, limit %.0f s%s]\n", c.id, pass ? "PASS" : "FAIL", c.name,
                o.detail.c_str(), dt, c.limit_s, in_time ? "" : ", too slow");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
