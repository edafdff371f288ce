#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <thread>

#include "json.hpp"
#include "receiver.hpp"

namespace zakotfs {

struct ExperimentConfig {
  ModulationParams params;
  PilotSpec pilot{-1, -1, 3};  // negative location: grid centre
  std::vector<ReceiverMode> modes{ReceiverMode::SeparateSensing_SeparateData, ReceiverMode::Joint_Turbo};
  double snr_db = 25.0;
  double pdr_db = 10.0;
  double nu_max_hz = 6000.0;
  int turbo_iters = 5;
  int trials = 200;
  std::uint64_t seed = 1;
  int support_margin = 1;  // receiver window around the nominal spread
  int channel_margin = 4;  // window on which the true channel is synthesized
  std::optional<SupportRegion> support;
  std::string sweep_var;  // nu_max_hz | pdr_db | snr_db, empty for a single point
  std::vector<double> sweep_values;
  std::string profile;  // "delay_us power_db" file, empty for Veh-A
  EqualizerKind equalizer = EqualizerKind::Banded;
  ChirpSupport chirp = ChirpSupport::FullPeriod;
  bool genie_csi = false;
  int threads = 1;

  PilotSpec resolved_pilot() const {
    PilotSpec p = pilot;
    if (p.k_p < 0) p.k_p = params.M / 2;
    if (p.l_p < 0) p.l_p = params.N / 2;
    return p;
  }
  PowerDelayProfile pdp() const { return profile.empty() ? PowerDelayProfile::veha() : load_profile(profile); }
  SubframeSpec subframe() const { return {1.0, undb10(pdr_db), resolved_pilot()}; }
  SupportRegion receiver_support() const {
    return support ? *support : default_support(params, pdp().tau_max_s(), nu_max_hz, support_margin);
  }
  SupportRegion channel_support() const {
    return SupportRegion::hull(default_support(params, pdp().tau_max_s(), nu_max_hz, channel_margin),
                               receiver_support());
  }

  void validate() const {
    params.validate();
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (turbo_iters < 0) throw ConfigError("turbo_iters must be >= 0");
    if (!std::isfinite(pdr_db) || std::isnan(snr_db) || snr_db == -INFINITY || !std::isfinite(nu_max_hz))
      throw ConfigError("dB fields must be finite");
    if (nu_max_hz < 0) throw ConfigError("nu_max_hz must be non-negative");
    if (modes.empty()) throw ConfigError("at least one mode is required");
    if (support_margin < 0 || channel_margin < 0) throw ConfigError("margins must be non-negative");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    auto p = resolved_pilot();
    if (p.k_p >= params.M || p.l_p >= params.N) throw ConfigError("pilot location outside the grid");
    if (!sweep_var.empty() && sweep_var != "nu_max_hz" && sweep_var != "pdr_db" && sweep_var != "snr_db")
      throw ConfigError("sweep variable must be nu_max_hz, pdr_db or snr_db");
    if (!sweep_var.empty() && sweep_values.empty()) throw ConfigError("sweep list is empty");
    for (double v : sweep_values)
      if (std::isnan(v) || (sweep_var != "snr_db" && !std::isfinite(v))) throw ConfigError("sweep values must be finite");
  }

  double value_of(const std::string& var) const {
    if (var == "pdr_db") return pdr_db;
    if (var == "snr_db") return snr_db;
    return nu_max_hz;
  }
  ExperimentConfig at(double v) const {
    ExperimentConfig c = *this;
    if (sweep_var == "pdr_db") c.pdr_db = v;
    else if (sweep_var == "snr_db") c.snr_db = v;
    else c.nu_max_hz = v;
    c.sweep_var.clear();
    c.sweep_values.clear();
    return c;
  }
};

// ---- key=value configuration -------------------------------------------

namespace detail {

inline std::string trim(std::string s) {
  const char* ws = " \t\r\n";
  s.erase(0, s.find_first_not_of(ws));
  s.erase(s.find_last_not_of(ws) + 1);
  return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "+inf") return INFINITY;
  if (v == "-inf") return -INFINITY;
  double d;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": not a number: '" + v + "'");
  return d;
}

template <class I>
I to_int(const std::string& key, const std::string& v) {
  I i;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), i);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": not an integer: '" + v + "'");
  return i;
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ConfigError(key + ": not a boolean: '" + v + "'");
}

inline std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_short(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

inline void apply_setting(ExperimentConfig& c, const std::string& key_in, const std::string& value_in) {
  using namespace detail;
  const std::string key = trim(key_in);
  const std::string v = trim(value_in);
  auto& p = c.params;
  if (key == "M") p.M = to_int<int>(key, v);
  else if (key == "N") p.N = to_int<int>(key, v);
  else if (key == "nu_p") {
    p.nu_p = to_double(key, v);
    p.tau_p = 1.0 / p.nu_p;
  } else if (key == "beta_tau") p.beta_tau = to_double(key, v);
  else if (key == "beta_nu") p.beta_nu = to_double(key, v);
  else if (key == "beta") p.beta_tau = p.beta_nu = to_double(key, v);
  else if (key == "k_p") c.pilot.k_p = to_int<int>(key, v);
  else if (key == "l_p") c.pilot.l_p = to_int<int>(key, v);
  else if (key == "q") c.pilot.q = to_int<int>(key, v);
  else if (key == "mode") {
    c.modes.clear();
    if (v == "all") c.modes.assign(std::begin(all_modes), std::end(all_modes));
    else
      for (auto& m : split(v, ',')) c.modes.push_back(parse_mode(m));
  } else if (key == "snr_db") c.snr_db = to_double(key, v);
  else if (key == "pdr_db") c.pdr_db = to_double(key, v);
  else if (key == "nu_max_hz") c.nu_max_hz = to_double(key, v);
  else if (key == "turbo_iters") c.turbo_iters = to_int<int>(key, v);
  else if (key == "trials") c.trials = to_int<int>(key, v);
  else if (key == "seed") c.seed = to_int<std::uint64_t>(key, v);
  else if (key == "support_margin") c.support_margin = to_int<int>(key, v);
  else if (key == "channel_margin") c.channel_margin = to_int<int>(key, v);
  else if (key == "support") {
    if (v.empty() || v == "auto") {
      c.support.reset();
    } else {
      auto f = split(v, ',');
      if (f.size() != 4) throw ConfigError("support: expected k_lo,k_hi,l_lo,l_hi");
      SupportRegion S{to_int<int>(key, f[0]), to_int<int>(key, f[1]), to_int<int>(key, f[2]), to_int<int>(key, f[3])};
      if (S.k_hi < S.k_lo || S.l_hi < S.l_lo) throw ConfigError("support: empty range");
      c.support = S;
    }
  } else if (key == "sweep") {
    c.sweep_var.clear();
    c.sweep_values.clear();
    if (!v.empty() && v != "none") {
      auto colon = v.find(':');
      if (colon == std::string::npos) throw ConfigError("sweep: expected var:v1,v2,...");
      c.sweep_var = trim(v.substr(0, colon));
      for (auto& s : split(v.substr(colon + 1), ',')) c.sweep_values.push_back(to_double(key, s));
    }
  } else if (key == "profile") c.profile = v;
  else if (key == "equalizer") {
    if (v == "banded") c.equalizer = EqualizerKind::Banded;
    else if (v == "dense") c.equalizer = EqualizerKind::Dense;
    else throw ConfigError("equalizer: expected banded or dense");
  } else if (key == "chirp_support") {
    if (v == "full") c.chirp = ChirpSupport::FullPeriod;
    else if (v == "fundamental") c.chirp = ChirpSupport::FundamentalDomain;
    else throw ConfigError("chirp_support: expected full or fundamental");
  } else if (key == "genie_csi") c.genie_csi = to_bool(key, v);
  else if (key == "threads") c.threads = to_int<int>(key, v);
  else throw ConfigError("unknown configuration key: " + key);
}

inline void apply_config_text(ExperimentConfig& c, const std::string& text, const std::string& origin = "config") {
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ":" + std::to_string(n) + ": expected key=value");
    try {
      apply_setting(c, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

inline void apply_config_file(ExperimentConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(c, ss.str(), path);
}

// Canonical key=value form; parsing it back reproduces the config.
inline std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& c) {
  using detail::fmt;
  std::vector<std::pair<std::string, std::string>> kv;
  const auto& p = c.params;
  kv.emplace_back("M", std::to_string(p.M));
  kv.emplace_back("N", std::to_string(p.N));
  kv.emplace_back("nu_p", fmt(p.nu_p));
  kv.emplace_back("beta_tau", fmt(p.beta_tau));
  kv.emplace_back("beta_nu", fmt(p.beta_nu));
  kv.emplace_back("k_p", std::to_string(c.pilot.k_p));
  kv.emplace_back("l_p", std::to_string(c.pilot.l_p));
  kv.emplace_back("q", std::to_string(c.pilot.q));
  std::string modes;
  for (auto m : c.modes) modes += (modes.empty() ? "" : ",") + to_string(m);
  kv.emplace_back("mode", modes);
  kv.emplace_back("snr_db", fmt(c.snr_db));
  kv.emplace_back("pdr_db", fmt(c.pdr_db));
  kv.emplace_back("nu_max_hz", fmt(c.nu_max_hz));
  kv.emplace_back("turbo_iters", std::to_string(c.turbo_iters));
  kv.emplace_back("trials", std::to_string(c.trials));
  kv.emplace_back("seed", std::to_string(c.seed));
  kv.emplace_back("support_margin", std::to_string(c.support_margin));
  kv.emplace_back("channel_margin", std::to_string(c.channel_margin));
  if (c.support)
    kv.emplace_back("support", std::to_string(c.support->k_lo) + "," + std::to_string(c.support->k_hi) + "," +
                                   std::to_string(c.support->l_lo) + "," + std::to_string(c.support->l_hi));
  else
    kv.emplace_back("support", "auto");
  std::string sw = "none";
  if (!c.sweep_var.empty()) {
    sw = c.sweep_var + ":";
    for (std::size_t i = 0; i < c.sweep_values.size(); ++i) sw += (i ? "," : "") + fmt(c.sweep_values[i]);
  }
  kv.emplace_back("sweep", sw);
  kv.emplace_back("profile", c.profile);
  kv.emplace_back("equalizer", c.equalizer == EqualizerKind::Banded ? "banded" : "dense");
  kv.emplace_back("chirp_support", c.chirp == ChirpSupport::FullPeriod ? "full" : "fundamental");
  kv.emplace_back("genie_csi", c.genie_csi ? "true" : "false");
  kv.emplace_back("threads", std::to_string(c.threads));
  return kv;
}

inline std::string config_text(const ExperimentConfig& c) {
  std::string s;
  for (auto& [k, v] : config_entries(c)) s += k + "=" + v + "\n";
  return s;
}

inline ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  if (name == "fig2") {
    c.sweep_var = "nu_max_hz";
    c.sweep_values = {1000, 2000, 4000, 6000, 8000, 12000, 16000};
  } else if (name == "fig3") {
    c.modes.assign(std::begin(all_modes), std::end(all_modes));
    c.sweep_var = "pdr_db";
    c.sweep_values = {-15, -10, 0, 10, 20, 25, 30, 35};
  } else if (name == "small") {
    c.params = ModulationParams::make(17, 19, 70e3);
    c.nu_max_hz = 3000;
    c.trials = 400;
    c.sweep_var = "nu_max_hz";
    c.sweep_values = {1000, 2000, 3000, 5000, 10000, 20000, 35000};
  } else {
    throw ConfigError("unknown preset: " + name + " (expected fig2, fig3 or small)");
  }
  return c;
}

// ---- Monte Carlo ---------------------------------------------------------

struct TrialRecord {
  int trial = 0;
  std::size_t bits = 0;
  std::size_t bit_errors = 0;  // final iteration
  std::vector<IterationMetrics> iterations;
  double residual_pilot = 0;
  double residual_data = 0;
  bool failed = false;
  std::string error;
};

struct IterationAggregate {
  int iter = 0;
  std::uint64_t errors = 0;
  std::uint64_t bits = 0;
  double ber = 0, ber_lo = 0, ber_hi = 0;
  double nmse = 0;
  double residual_pilot = 0, residual_data = 0;
};

struct ModeResult {
  ReceiverMode mode{};
  std::vector<TrialRecord> trials;
  std::vector<IterationAggregate> iterations;
  int failed = 0;

  const IterationAggregate& final_iter() const { return iterations.back(); }
};

struct ExperimentResult {
  ExperimentConfig cfg;
  double sweep_value = 0;
  std::vector<ModeResult> modes;

  const ModeResult& mode(ReceiverMode m) const {
    for (auto& r : modes)
      if (r.mode == m) return r;
    throw ConfigError("mode not part of the experiment: " + to_string(m));
  }
};

struct SweepResult {
  ExperimentConfig cfg;
  std::string sweep_var;
  std::vector<ExperimentResult> points;
};

// Wilson score interval, 95 %.
inline std::pair<double, double> wilson_interval(std::uint64_t errors, std::uint64_t n, double z = 1.959963984540054) {
  if (n == 0) return {0.0, 1.0};
  const double N = double(n), ph = double(errors) / N, z2 = z * z;
  const double den = 1.0 + z2 / N;
  const double c = (ph + z2 / (2 * N)) / den;
  const double h = z * std::sqrt(ph * (1 - ph) / N + z2 / (4 * N * N)) / den;
  return {std::max(0.0, c - h), std::min(1.0, c + h)};
}

namespace detail {

// Everything one trial shares across modes (common random numbers).
struct TrialDraw {
  Bits bits;
  SymbolGrid symbols;
  PhysicalChannel phys;
  DDFilter h;
  DDSignal rx_data;
  DDSignal joint, pilot_only, data_only;
};

inline TrialDraw draw_trial(const ExperimentConfig& c, const PowerDelayProfile& pdp, const DDSignal& xs,
                            const SupportRegion& S_true, int trial, bool need_joint, bool need_pilot,
                            bool need_data) {
  const auto& p = c.params;
  const auto spec = c.subframe();
  const double N0 = noise_variance_for_snr(p, spec.E_d, c.snr_db);
  Rng rng = make_stream(c.seed, std::uint64_t(trial), 0);
  TrialDraw d;
  d.bits.resize(2 * std::size_t(p.L()));
  std::bernoulli_distribution coin(0.5);
  for (auto& b : d.bits) b = coin(rng) ? 1 : 0;
  d.symbols = map_bits_to_symbols(p, d.bits);
  d.phys = draw_channel(pdp, c.nu_max_hz, rng);
  d.h = effective_channel(d.phys, p, S_true);
  d.rx_data = std::sqrt(spec.E_d) * twisted_convolve_fs(d.h, data_signal(d.symbols));
  const DDSignal& rd = d.rx_data;
  const DDSignal rp = std::sqrt(spec.E_p) * twisted_convolve_fs(d.h, xs);
  auto noisy = [&](const DDSignal& s, std::uint64_t lane) {
    Rng r = make_stream(c.seed, std::uint64_t(trial), lane);
    return add_noise(s, {N0}, r);
  };
  if (need_joint) d.joint = noisy(rd + rp, 1);
  if (need_pilot) d.pilot_only = noisy(rp, 2);
  if (need_data) d.data_only = noisy(rd, 3);
  return d;
}

template <class F>
void parallel_for(int n, int threads, F&& f) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(threads, n); ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) f(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto& p = cfg.params;
  const auto pdp = cfg.pdp();
  const auto spec = cfg.subframe();
  const SupportRegion S = cfg.receiver_support();
  const SupportRegion S_true = cfg.channel_support();
  const DDSignal xs = spread_pilot(p, spec.pilot, cfg.chirp);
  const double N0 = noise_variance_for_snr(p, spec.E_d, cfg.snr_db);

  bool need_joint = false, need_pilot = false, need_data = false;
  for (auto m : cfg.modes) {
    need_joint = need_joint || senses_jointly(m) || detects_jointly(m);
    need_pilot = need_pilot || !senses_jointly(m);
    need_data = need_data || !detects_jointly(m);
  }

  ExperimentResult res;
  res.cfg = cfg;
  res.sweep_value = cfg.value_of(cfg.sweep_var.empty() ? "nu_max_hz" : cfg.sweep_var);
  for (auto m : cfg.modes) res.modes.push_back({m, std::vector<TrialRecord>(std::size_t(cfg.trials)), {}, 0});

  detail::parallel_for(cfg.trials, cfg.threads, [&](int trial) {
    const auto d = detail::draw_trial(cfg, pdp, xs, S_true, trial, need_joint, need_pilot, need_data);
    const Truth truth{d.bits, d.symbols, d.h, d.rx_data};
    TurboConfig tc{spec, S, N0, cfg.turbo_iters, cfg.equalizer, cfg.genie_csi ? &d.h : nullptr};
    for (auto& mr : res.modes) {
      TrialRecord rec;
      rec.trial = trial;
      rec.bits = d.bits.size();
      try {
        const auto obs = Observation::for_mode(mr.mode, &d.joint, &d.pilot_only, &d.data_only);
        const auto st = turbo_receive(obs, xs, tc, &truth);
        rec.iterations = st.trace;
        rec.bit_errors = st.trace.back().bit_errors;
        rec.residual_pilot = st.trace.back().residual_pilot;
        rec.residual_data = st.trace.back().residual_data;
      } catch (const NumericError& e) {
        rec.failed = true;
        rec.error = e.what();
      }
      mr.trials[std::size_t(trial)] = std::move(rec);
    }
  });

  for (auto& mr : res.modes) {
    std::vector<IterationAggregate> agg(std::size_t(cfg.turbo_iters + 1));
    int ok = 0;
    for (auto& r : mr.trials) {
      if (r.failed) {
        ++mr.failed;
        continue;
      }
      ++ok;
      for (std::size_t t = 0; t < agg.size(); ++t) {
        const auto& it = r.iterations[t];
        agg[t].errors += it.bit_errors;
        agg[t].bits += r.bits;
        agg[t].nmse += it.nmse;
        agg[t].residual_pilot += it.residual_pilot;
        agg[t].residual_data += it.residual_data;
      }
    }
    for (std::size_t t = 0; t < agg.size(); ++t) {
      auto& a = agg[t];
      a.iter = int(t);
      a.ber = a.bits ? double(a.errors) / double(a.bits) : NAN;
      std::tie(a.ber_lo, a.ber_hi) = wilson_interval(a.errors, a.bits);
      const double n = ok ? double(ok) : NAN;
      a.nmse /= n;
      a.residual_pilot /= n;
      a.residual_data /= n;
    }
    mr.iterations = std::move(agg);
  }
  return res;
}

inline SweepResult run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.sweep_var.empty() || cfg.sweep_values.empty()) throw ConfigError("sweep list is empty");
  SweepResult out{cfg, cfg.sweep_var, {}};
  std::vector<double> values = cfg.sweep_values;
  std::sort(values.begin(), values.end());
  for (double v : values) {
    auto r = run_experiment(cfg.at(v));
    r.sweep_value = v;
    out.points.push_back(std::move(r));
  }
  return out;
}

inline SweepResult as_sweep(const ExperimentResult& r) {
  return {r.cfg, r.cfg.sweep_var.empty() ? "nu_max_hz" : r.cfg.sweep_var, {r}};
}

// ---- PAPR ------------------------------------------------------------------

struct PaprRow {
  std::string signal;
  double papr_db = 0;
};

inline std::vector<PaprRow> papr_report(const ExperimentConfig& cfg, int subframes = 100, int Q = 4) {
  const auto& p = cfg.params;
  const auto pilot = cfg.resolved_pilot();
  std::vector<PaprRow> rows;
  rows.push_back({"point_pilot", papr_db(zak_inverse(point_pilot(p, pilot), Q))});
  rows.push_back({"spread_pilot_q" + std::to_string(pilot.q), papr_db(zak_inverse(spread_pilot(p, pilot, cfg.chirp), Q))});
  rows.push_back({"spread_pilot_q0_origin_full",
                  papr_db(zak_inverse(spread_pilot(p, {0, 0, 0}, ChirpSupport::FullPeriod), Q))});
  rows.push_back({"spread_pilot_q0_origin_fundamental",
                  papr_db(zak_inverse(spread_pilot(p, {0, 0, 0}, ChirpSupport::FundamentalDomain), Q))});
  if (subframes > 0) {
    const DDSignal xs = spread_pilot(p, pilot, cfg.chirp);
    const SubframeSpec spec{1.0, undb10(10.0), pilot};
    double sum = 0, worst = 0;
    for (int i = 0; i < subframes; ++i) {
      Rng rng = make_stream(cfg.seed, std::uint64_t(i), 7);
      Bits bits(2 * std::size_t(p.L()));
      std::bernoulli_distribution coin(0.5);
      for (auto& b : bits) b = coin(rng) ? 1 : 0;
      const double v = papr_db(zak_inverse(compose_subframe(data_signal(map_bits_to_symbols(p, bits)), xs, spec), Q));
      sum += v;
      worst = std::max(worst, v);
    }
    rows.push_back({"subframe_pdr10_mean", sum / subframes});
    rows.push_back({"subframe_pdr10_max", worst});
  }
  return rows;
}

// ---- output ----------------------------------------------------------------

inline std::string results_csv(const SweepResult& s) {
  using detail::fmt;
  std::string out = "sweep_value,mode,iter,ber,ber_lo,ber_hi,nmse,trials,bits\n";
  for (auto& pt : s.points)
    for (auto& mr : pt.modes)
      for (auto& it : mr.iterations)
        out += fmt(pt.sweep_value) + "," + to_string(mr.mode) + "," + std::to_string(it.iter) + "," + fmt(it.ber) +
               "," + fmt(it.ber_lo) + "," + fmt(it.ber_hi) + "," + fmt(it.nmse) + "," +
               std::to_string(mr.trials.size() - std::size_t(mr.failed)) + "," + std::to_string(it.bits) + "\n";
  return out;
}

inline nlohmann::json results_json(const SweepResult& s, bool per_trial = true) {
  using nlohmann::json;
  json cfg = json::object();
  for (auto& [k, v] : config_entries(s.cfg)) cfg[k] = v;
  json j;
  j["config"] = cfg;
  j["config_text"] = config_text(s.cfg);
  j["sweep_var"] = s.sweep_var;
  j["metadata"] = {{"common_random_numbers", true},
                   {"ber_interval", "wilson95"},
                   {"noise_convention", "N0 per cell = E_d / (M N snr)"}};
  json pts = json::array();
  for (auto& pt : s.points) {
    json jp;
    jp["sweep_value"] = pt.sweep_value;
    const auto S = pt.cfg.receiver_support();
    const auto St = pt.cfg.channel_support();
    jp["receiver_support"] = {S.k_lo, S.k_hi, S.l_lo, S.l_hi};
    jp["channel_support"] = {St.k_lo, St.k_hi, St.l_lo, St.l_hi};
    json modes = json::array();
    for (auto& mr : pt.modes) {
      json jm;
      jm["mode"] = to_string(mr.mode);
      jm["failed_trials"] = mr.failed;
      json its = json::array();
      for (auto& it : mr.iterations)
        its.push_back({{"iter", it.iter}, {"errors", it.errors}, {"bits", it.bits}, {"ber", it.ber},
                       {"ber_lo", it.ber_lo}, {"ber_hi", it.ber_hi}, {"nmse", it.nmse},
                       {"residual_pilot", it.residual_pilot}, {"residual_data", it.residual_data}});
      jm["iterations"] = its;
      if (per_trial) {
        json trials = json::array();
        for (auto& r : mr.trials) {
          json jt{{"trial", r.trial}, {"bits", r.bits}, {"bit_errors", r.bit_errors}, {"failed", r.failed}};
          if (r.failed) jt["error"] = r.error;
          json ber = json::array(), nm = json::array(), rp = json::array(), rdat = json::array();
          for (auto& it : r.iterations) {
            ber.push_back(it.ber);
            nm.push_back(it.nmse);
            rp.push_back(it.residual_pilot);
            rdat.push_back(it.residual_data);
          }
          jt["ber"] = ber;
          jt["nmse"] = nm;
          jt["residual_pilot"] = rp;
          jt["residual_data"] = rdat;
          trials.push_back(jt);
        }
        jm["trials"] = trials;
      }
      modes.push_back(jm);
    }
    jp["modes"] = modes;
    pts.push_back(jp);
  }
  j["points"] = pts;
  return j;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// Writes <stem>.csv and <stem>.json.
inline void write_results(const SweepResult& s, const std::filesystem::path& stem, bool per_trial = true) {
  auto csv = stem;
  csv += ".csv";
  auto js = stem;
  js += ".json";
  write_text(csv, results_csv(s));
  write_text(js, results_json(s, per_trial).dump(1) + "\n");
}

}  // namespace zakotfs
