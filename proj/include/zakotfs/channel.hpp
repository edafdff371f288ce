#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "pulse.hpp"
#include "rng.hpp"
#include "waveforms.hpp"

namespace zakotfs {

struct Path {
  cplx h;
  double tau;  // s
  double nu;   // Hz
};

struct PhysicalChannel {
  std::vector<Path> paths;

  double tau_max() const {
    double t = 0;
    for (auto& p : paths) t = std::max(t, p.tau);
    return t;
  }
  double gain() const {
    double g = 0;
    for (auto& p : paths) g += std::norm(p.h);
    return g;
  }
};

struct PowerDelayProfile {
  std::vector<double> delay_us;
  std::vector<double> power_db;

  static PowerDelayProfile veha() {
    return {{0.0, 0.31, 0.71, 1.09, 1.73, 2.51}, {0.0, -1.0, -9.0, -10.0, -15.0, -20.0}};
  }

  std::vector<double> linear_powers() const {
    std::vector<double> p;
    double s = 0;
    for (double d : power_db) s += undb10(d);
    for (double d : power_db) p.push_back(undb10(d) / s);
    return p;
  }
  double tau_max_s() const {
    double t = 0;
    for (double d : delay_us) t = std::max(t, d);
    return t * 1e-6;
  }

  void validate() const {
    if (delay_us.empty() || delay_us.size() != power_db.size())
      throw ConfigError("profile needs matching, nonempty delay and power lists");
    for (std::size_t i = 0; i < delay_us.size(); ++i)
      if (!(delay_us[i] >= 0) || !std::isfinite(delay_us[i]) || !std::isfinite(power_db[i]))
        throw ConfigError("profile delays must be finite and non-negative, powers finite");
  }
};

// Lines of "delay_us power_db"; '#' starts a comment.
inline PowerDelayProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open profile file: " + path);
  PowerDelayProfile p;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto c = line.find('#'); c != std::string::npos) line.erase(c);
    std::istringstream ss(line);
    double d, w;
    if (!(ss >> d)) continue;
    if (!(ss >> w)) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'delay_us power_db'");
    p.delay_us.push_back(d);
    p.power_db.push_back(w);
  }
  p.validate();
  return p;
}

inline PhysicalChannel draw_channel(const PowerDelayProfile& prof, double nu_max, Rng& rng) {
  if (!(nu_max >= 0)) throw ConfigError("nu_max must be non-negative");
  prof.validate();
  const auto pw = prof.linear_powers();
  std::uniform_real_distribution<double> theta(-pi, pi);
  PhysicalChannel ch;
  for (std::size_t i = 0; i < pw.size(); ++i) {
    const cplx h = complex_normal(rng, pw[i]);
    const double th = theta(rng);
    ch.paths.push_back({h, prof.delay_us[i] * 1e-6, nu_max == 0 ? 0.0 : nu_max * std::cos(th)});
  }
  return ch;
}

inline PhysicalChannel draw_veha(double nu_max, Rng& rng) {
  return draw_channel(PowerDelayProfile::veha(), nu_max, rng);
}

// k in [-margin, ceil(tau_max B) + margin], l in +-(ceil(nu_max N / nu_p) + margin)
inline SupportRegion default_support(const ModulationParams& p, double tau_max, double nu_max, int margin) {
  const int kd = int(std::ceil(tau_max * p.B() - 1e-9));
  const int ld = int(std::ceil(nu_max * p.N / p.nu_p - 1e-9));
  return {-margin, kd + margin, -(ld + margin), ld + margin};
}

struct NoiseSpec {
  double N0 = 0.0;
};

// Per-cell noise variance for a data SNR defined per information symbol.
inline double noise_variance_for_snr(const ModulationParams& p, double E_d, double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  return E_d / (double(p.L()) * undb10(snr_db));
}

enum class PulseModel { Exact, Separable };

// h_eff sampled on S. Exact evaluates the RRC transmit/receive cascade in
// closed form, including the delay-Doppler coupling of both pulses.
inline DDFilter effective_channel(const PhysicalChannel& phys, const ModulationParams& p,
                                  const SupportRegion& S, PulseModel model = PulseModel::Exact) {
  DDFilter h(p, S);
  const double B = p.B(), T = p.T(), L = double(p.L());
  for (const auto& path : phys.paths) {
    const double tb = path.tau * B;  // delay in bins
    const double vb = path.nu * T;   // Doppler in bins
    const double s1 = path.nu / B;
    for (int a = S.k_lo; a <= S.k_hi; ++a) {
      const double d = a - tb;
      if (model == PulseModel::Exact) {
        const cplx A1 = pulse::rrc_cross_ambiguity(d, s1, p.beta_tau);
        const cplx pre = path.h * std::polar(1.0, 2.0 * pi * s1 * d) * A1;
        for (int b = S.l_lo; b <= S.l_hi; ++b)
          h.at(a, b) += pre * pulse::rrc_cross_ambiguity(b - vb, -a / L, p.beta_nu);
      } else {
        const cplx pre = path.h * std::polar(1.0, 2.0 * pi * s1 * d) * pulse::raised_cosine(d, p.beta_tau);
        for (int b = S.l_lo; b <= S.l_hi; ++b) h.at(a, b) += pre * pulse::raised_cosine(b - vb, p.beta_nu);
      }
    }
  }
  return h;
}

inline DDSignal add_noise(DDSignal y, const NoiseSpec& noise, Rng& rng) {
  if (noise.N0 < 0) throw ConfigError("noise variance must be non-negative");
  if (noise.N0 > 0)
    for (auto& v : y.fd()) v += complex_normal(rng, noise.N0);
  return y;
}

inline DDSignal apply_channel(const DDFilter& h, const DDSignal& x, const NoiseSpec& noise, Rng& rng) {
  return add_noise(twisted_convolve_fs(h, x), noise, rng);
}

struct CrystallizationReport {
  bool period_ok = false;  // translates by the period lattice are disjoint
  bool spread_ok = false;  // pilot self-ambiguity sidelobes inside S - S below threshold
  int width = 0, height = 0;
  int delay_margin = 0, doppler_margin = 0;  // spare bins against M and N
  double max_sidelobe = 0;
  double threshold = 0.05;
  bool pass() const { return period_ok && spread_ok; }
};

inline CrystallizationReport crystallization_check(const SupportRegion& S, const ModulationParams& p,
                                                   const PilotSpec& pilot, double threshold = 0.05,
                                                   ChirpSupport support = ChirpSupport::FullPeriod) {
  CrystallizationReport r;
  r.threshold = threshold;
  r.width = S.nk();
  r.height = S.nl();
  r.delay_margin = p.M - r.width;
  r.doppler_margin = p.N - r.height;
  r.period_ok = r.width <= p.M && r.height <= p.N;
  const DDSignal xs = spread_pilot(p, pilot, support);
  const SupportRegion D{-(S.nk() - 1), S.nk() - 1, -(S.nl() - 1), S.nl() - 1};
  const DDFilter A = cross_ambiguity(xs, xs, D);
  const double peak = std::abs(A(0, 0));
  double worst = 0;
  for (int k = D.k_lo; k <= D.k_hi; ++k)
    for (int l = D.l_lo; l <= D.l_hi; ++l)
      if (k != 0 || l != 0) worst = std::max(worst, std::abs(A(k, l)) / peak);
  r.max_sidelobe = worst;
  r.spread_ok = worst < threshold;
  return r;
}

}  // namespace zakotfs
