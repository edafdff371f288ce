#pragma once

#include <sstream>

#include "harness.hpp"
#include "td_oracle.hpp"

namespace zakotfs {

struct Verdict {
  bool pass = false;
  std::string detail;
};

inline double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw ConfigError("size mismatch");
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(std::span<const cplx> a) {
  double m = 0;
  for (auto v : a) m = std::max(m, std::abs(v));
  return m;
}

// max |a - b| / max |b|
inline double rel_error(const DDSignal& a, const DDSignal& b) { return max_abs_diff(a.fd(), b.fd()) / max_abs(b.fd()); }

// ---- invariant suite -------------------------------------------------------

struct Check {
  std::string name;
  double error = 0;
  double tol = 0;
  bool pass() const { return error <= tol; }
};

namespace detail {

inline DDSignal random_signal(const ModulationParams& p, Rng& rng) {
  DDSignal x(p);
  for (auto& v : x.fd()) v = complex_normal(rng, 1.0);
  return x;
}

inline DDFilter random_filter(const ModulationParams& p, Rng& rng, int taps, int reach) {
  std::uniform_int_distribution<int> pos(-reach, reach);
  DDFilter f(p, SupportRegion{-reach, reach, -reach, reach});
  for (int i = 0; i < taps; ++i) f.at(pos(rng), pos(rng)) += complex_normal(rng, 1.0);
  return f;
}

// literal gather form of h *sigma x at any (k, l) in Z^2
inline cplx gather(const DDFilter& h, const DDSignal& x, long long k, long long l) {
  const auto box = h.box();
  const double L = double(x.params().L());
  cplx y = 0;
  for (int a = box.k_lo; a <= box.k_hi; ++a)
    for (int b = box.l_lo; b <= box.l_hi; ++b)
      if (h(a, b) != cplx(0))
        y += h(a, b) * evaluate(x, k - a, l - b) * std::polar(1.0, 2.0 * pi * double(b) * double(k - a) / L);
  return y;
}

}  // namespace detail

inline std::vector<Check> invariant_suite(std::uint64_t seed = 1) {
  using namespace detail;
  std::vector<Check> out;
  Rng rng = make_stream(seed, 0, 5);
  const auto small = ModulationParams::make(4, 3, 30e3);
  const auto full = ModulationParams::make(31, 37, 30e3);

  for (const auto& p : {small, full}) {
    const std::string tag = " M=" + std::to_string(p.M) + " N=" + std::to_string(p.N);
    const DDSignal x = random_signal(p, rng);
    const auto td = zak_inverse(x, 1);
    double etd = 0;
    for (auto v : td.samples) etd += std::norm(v);
    out.push_back({"zak unitarity (energy)" + tag, std::abs(etd - x.energy()) / x.energy(), 1e-12});
    out.push_back({"zak forward(inverse) identity" + tag, rel_error(zak_forward(td), x), 1e-12});
  }

  {
    const auto& p = small;
    const DDSignal x = random_signal(p, rng);
    const DDFilter a = random_filter(p, rng, 2, 2), b = random_filter(p, rng, 2, 2), c = random_filter(p, rng, 2, 2);
    const DDSignal lhs = twisted_convolve_fs(twisted_convolve_ff(a, b), x);
    const DDSignal rhs = twisted_convolve_fs(a, twisted_convolve_fs(b, x));
    out.push_back({"associativity (a*b)*x = a*(b*x)", rel_error(lhs, rhs), 1e-10});
    const DDFilter f1 = twisted_convolve_ff(twisted_convolve_ff(a, b), c);
    const DDFilter f2 = twisted_convolve_ff(a, twisted_convolve_ff(b, c));
    const auto box = SupportRegion::hull(f1.box(), f2.box());
    double d = 0, n = 0;
    for (int k = box.k_lo; k <= box.k_hi; ++k)
      for (int l = box.l_lo; l <= box.l_hi; ++l) {
        d = std::max(d, std::abs(f1(k, l) - f2(k, l)));
        n = std::max(n, std::abs(f2(k, l)));
      }
    out.push_back({"associativity (a*b)*c = a*(b*c)", d / n, 1e-10});
  }

  for (const auto& p : {small, full}) {
    const std::string tag = " M=" + std::to_string(p.M) + " N=" + std::to_string(p.N);
    const DDSignal x = random_signal(p, rng);
    const DDFilter h = random_filter(p, rng, 2, 2);
    const SupportRegion W{-3, 3, -3, 3};
    const DDFilter lhs = cross_ambiguity(twisted_convolve_fs(h, x), x, W);
    const auto hb = h.box();
    const SupportRegion Wx{W.k_lo - hb.k_hi, W.k_hi - hb.k_lo, W.l_lo - hb.l_hi, W.l_hi - hb.l_lo};
    const DDFilter rhs = twisted_convolve_ff(h, cross_ambiguity(x, x, Wx)).restricted(W);
    out.push_back({"ambiguity factorization" + tag, max_abs_diff(lhs.taps(), rhs.taps()) / max_abs(rhs.taps()), 1e-10});
  }

  {
    // every produced signal, evaluated off the fundamental domain
    const auto& p = small;
    const DDSignal x = random_signal(p, rng);
    const DDFilter h = random_filter(p, rng, 3, 2);
    std::uniform_int_distribution<int> kd(-9, 9), md(-3, 3);
    double worst = 0;
    const DDSignal y = twisted_convolve_fs(h, x);
    Rng noise_rng = make_stream(seed, 1, 5);
    const std::vector<DDSignal> produced{
        y,
        spread_pilot(p, {1, 2, 3}),
        data_signal(map_bits_to_symbols(p, Bits(2 * std::size_t(p.L()), 1))),
        apply_channel(h, x, {0.1}, noise_rng),
        zak_forward(zak_inverse(x, 1)),
    };
    for (int trial = 0; trial < 50; ++trial) {
      const int k = kd(rng), l = kd(rng), n = md(rng), m = md(rng);
      const cplx ph = std::polar(1.0, 2.0 * pi * double(n) * double(l) / p.N);
      for (const auto& s : produced)
        worst = std::max(worst, std::abs(evaluate(s, k + n * p.M, l + m * p.N) - ph * evaluate(s, k, l)));
      // the literal sum extends quasi-periodically on its own
      const cplx g0 = gather(h, x, k, l);
      const cplx g1 = gather(h, x, k + n * p.M, l + m * p.N);
      worst = std::max(worst, std::abs(g1 - ph * g0) / (1.0 + std::abs(g0)));
      if (k >= 0 && k < p.M && l >= 0 && l < p.N) worst = std::max(worst, std::abs(g0 - y(k, l)));
    }
    out.push_back({"quasi-periodicity of produced signals", worst, 1e-12});
  }

  for (const auto& p : {small, full}) {
    const std::string tag = " M=" + std::to_string(p.M) + " N=" + std::to_string(p.N);
    Bits bits(2 * std::size_t(p.L()));
    std::bernoulli_distribution coin(0.5);
    for (auto& b : bits) b = coin(rng);
    const SymbolGrid g = map_bits_to_symbols(p, bits);
    DDFilter taps(p, SupportRegion{0, p.M - 1, 0, p.N - 1});
    for (int k = 0; k < p.M; ++k)
      for (int l = 0; l < p.N; ++l) taps.at(k, l) = g(k, l);
    const DDSignal x0 = (1.0 / std::sqrt(double(p.L()))) * point_pilot(p, {0, 0, 0});
    out.push_back({"data signal: symbol grid == taps *sigma pulsone" + tag,
                   max_abs_diff(data_signal(g).fd(), twisted_convolve_fs(taps, x0).fd()), 1e-12});
  }
  return out;
}

// ---- criteria ----------------------------------------------------------------

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Point estimate, or the upper Wilson bound when fewer than 20 errors were seen.
inline double ber_reference(const IterationAggregate& a, bool* bounded = nullptr) {
  const bool b = a.errors < 20;
  if (bounded) *bounded = b;
  return b ? a.ber_hi : a.ber;
}

inline Verdict check_turbo_gap(const ExperimentResult& r, double close_factor = 3.0, double gap_factor = 20.0) {
  const auto& sep = r.mode(ReceiverMode::SeparateSensing_SeparateData);
  const auto& joint = r.mode(ReceiverMode::Joint_Turbo);
  bool bounded = false;
  const double ref = ber_reference(sep.final_iter(), &bounded);
  const double j0 = joint.iterations.front().ber, jT = joint.final_iter().ber;
  Verdict v;
  v.pass = jT <= close_factor * ref && j0 >= gap_factor * ref;
  v.detail = "separate " + sci(sep.final_iter().ber) + (bounded ? " (bound " + sci(ref) + ")" : "") + ", joint it0 " +
             sci(j0) + ", joint it" + std::to_string(joint.final_iter().iter) + " " + sci(jT) + "; ratio it" +
             std::to_string(joint.final_iter().iter) + "/ref " + sci(jT / ref) + " (<= " + sci(close_factor) +
             "), it0/ref " + sci(j0 / ref) + " (>= " + sci(gap_factor) + "), trials " +
             std::to_string(joint.trials.size());
  return v;
}

inline Verdict check_doppler_degradation(const ModeResult& low, const ModeResult& high, double factor = 3.0) {
  const double a = low.final_iter().ber, b = high.final_iter().ber;
  return {b >= factor * a && b > 0, "BER " + sci(a) + " -> " + sci(b) + ", ratio " + sci(b / a) + " (>= " + sci(factor) + ")"};
}

inline const ExperimentResult& point_at(const SweepResult& s, double v) {
  for (auto& p : s.points)
    if (p.sweep_value == v) return p;
  throw ConfigError("sweep value not present: " + detail::fmt(v));
}

inline Verdict check_u_shape(const SweepResult& s, double mid = 10, double lo = -15, double hi = 35) {
  const auto& J = ReceiverMode::Joint_Turbo;
  const double bm = point_at(s, mid).mode(J).final_iter().ber;
  const double bl = point_at(s, lo).mode(J).final_iter().ber;
  const double bh = point_at(s, hi).mode(J).final_iter().ber;
  bool ok = bm < bl && bm < bh;
  std::string d = "joint BER " + sci(bl) + " | " + sci(bm) + " | " + sci(bh) + " at " + detail::fmt_short(lo) + "/" +
                  detail::fmt_short(mid) + "/" + detail::fmt_short(hi) + " dB";
  // reference without residual pilot: no significant rise beyond mid
  bool flat = true;
  const IterationAggregate* prev = nullptr;
  std::string ref = "; clean-data ref";
  for (auto& pt : s.points) {
    if (pt.sweep_value < mid) continue;
    const auto& a = pt.mode(ReceiverMode::Ref_JointSensing_CleanData).final_iter();
    ref += " " + sci(a.ber);
    if (prev && a.ber_lo > prev->ber_hi) flat = false;
    prev = &a;
  }
  return {ok && flat, d + ref + (flat ? " (non-increasing)" : " (rises)")};
}

inline Verdict check_nmse_monotone(const ModeResult& m, double slack = 0.05) {
  const auto& it = m.iterations;
  bool ok = it.back().nmse < it.front().nmse;
  std::string d = "NMSE";
  for (std::size_t t = 0; t < it.size(); ++t) {
    d += " " + sci(it[t].nmse);
    if (t > 0 && it[t].nmse > (1.0 + slack) * it[t - 1].nmse) ok = false;
  }
  return {ok, d + ", trials " + std::to_string(m.trials.size())};
}

inline Verdict check_papr(const std::vector<PaprRow>& rows) {
  double point = NAN, spread = NAN;
  for (auto& r : rows) {
    if (r.signal == "point_pilot") point = r.papr_db;
    if (r.signal.rfind("spread_pilot_q", 0) == 0 && std::isnan(spread)) spread = r.papr_db;
  }
  const bool ok = std::abs(point - 15.0) <= 1.0 && spread >= 4.5 && spread <= 7.0;
  return {ok, "point " + sci(point) + " dB (15+-1), spread " + sci(spread) + " dB ([4.5,7])"};
}

struct OracleReport {
  double integer_bin = 0;
  double fractional = 0;
};

// Discrete model vs the time-domain oracle on an 8 x 8 grid.
inline OracleReport oracle_agreement(std::uint64_t seed = 1) {
  const auto p = ModulationParams::make(8, 8, 30e3, 0.6, 0.6);
  Rng rng = make_stream(seed, 0, 6);
  const DDSignal x = detail::random_signal(p, rng);
  OracleReport r;
  {
    // integer delay, no Doppler: the Doppler tails of the cascade decay
    // slowly, so the model keeps a very wide Doppler range
    const PhysicalChannel ch{{{1.0, 2.0 / p.B(), 0.0}}};
    const auto y_model = twisted_convolve_fs(effective_channel(ch, p, SupportRegion{0, 4, -100000, 100000}), x);
    r.integer_bin = rel_error(y_model, td_oracle(x, ch, {4, 4096}));
  }
  {
    const PhysicalChannel ch = draw_veha(6000, rng);
    const SupportRegion S = default_support(p, ch.tau_max(), 6000, 16);
    const auto y_model = twisted_convolve_fs(effective_channel(ch, p, S), x);
    r.fractional = rel_error(y_model, td_oracle(x, ch, {16, 1024}));
  }
  return r;
}

struct FlatnessReport {
  int grids = 0;
  double cv_of_mean = 0;     // std/mean over the window of E|A[k,l]|
  double mean_grid_cv = 0;   // std/mean over the window within one grid, averaged
};

inline FlatnessReport interference_flatness(const ModulationParams& p, const PilotSpec& pilot, const SupportRegion& S,
                                            int grids, std::uint64_t seed = 1) {
  const DDSignal xs = spread_pilot(p, pilot);
  std::vector<double> acc(S.size(), 0.0);
  FlatnessReport r;
  r.grids = grids;
  auto cv = [](const std::vector<double>& v) {
    double m = 0, s = 0;
    for (double a : v) m += a;
    m /= double(v.size());
    for (double a : v) s += (a - m) * (a - m);
    return std::sqrt(s / double(v.size())) / m;
  };
  for (int g = 0; g < grids; ++g) {
    Rng rng = make_stream(seed, std::uint64_t(g), 4);
    Bits bits(2 * std::size_t(p.L()));
    std::bernoulli_distribution coin(0.5);
    for (auto& b : bits) b = coin(rng);
    const DDFilter A = cross_ambiguity(data_signal(map_bits_to_symbols(p, bits)), xs, S);
    std::vector<double> mag(A.taps().size());
    for (std::size_t i = 0; i < mag.size(); ++i) {
      mag[i] = std::abs(A.taps()[i]);
      acc[i] += mag[i] / grids;
    }
    r.mean_grid_cv += cv(mag) / grids;
  }
  r.cv_of_mean = cv(acc);
  return r;
}

}  // namespace zakotfs
