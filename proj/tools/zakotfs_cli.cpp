#include <chrono>
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "zakotfs/acceptance.hpp"

using namespace zakotfs;

namespace {

struct Overrides {
  std::string preset;
  std::string config;
  std::vector<std::string> sets;
  std::optional<double> nu_max_hz, pdr_db, snr_db;
  std::optional<std::string> mode;
  std::optional<int> turbo_iters, trials, threads;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool assert_ = false;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "key=value configuration file");
  cmd->add_option("--set", o.sets, "extra key=value setting (repeatable)");
  cmd->add_option("--nu-max-hz", o.nu_max_hz, "maximum Doppler shift (Hz)");
  cmd->add_option("--pdr-db", o.pdr_db, "pilot-to-data power ratio (dB)");
  cmd->add_option("--snr-db", o.snr_db, "data SNR (dB)");
  cmd->add_option("--mode", o.mode, "receiver modes: comma list or 'all'");
  cmd->add_option("--turbo-iters", o.turbo_iters, "refinement passes after the initial pass");
  cmd->add_option("--trials", o.trials, "subframes per point");
  cmd->add_option("--seed", o.seed, "base seed");
  cmd->add_option("--threads", o.threads, "worker threads");
  cmd->add_option("--out", o.out, "output stem; writes <stem>.csv and <stem>.json");
  cmd->add_flag("--assert", o.assert_, "exit nonzero when an acceptance threshold is violated");
  cmd->add_flag("-q,--quiet", o.quiet, "no per-point table");
}

ExperimentConfig build_config(const Overrides& o) {
  ExperimentConfig c = o.preset.empty() ? ExperimentConfig{} : preset(o.preset);
  if (!o.config.empty()) apply_config_file(c, o.config);
  for (auto& s : o.sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    apply_setting(c, s.substr(0, eq), s.substr(eq + 1));
  }
  if (o.nu_max_hz) c.nu_max_hz = *o.nu_max_hz;
  if (o.pdr_db) c.pdr_db = *o.pdr_db;
  if (o.snr_db) c.snr_db = *o.snr_db;
  if (o.mode) apply_setting(c, "mode", *o.mode);
  if (o.turbo_iters) c.turbo_iters = *o.turbo_iters;
  if (o.trials) c.trials = *o.trials;
  if (o.seed) c.seed = *o.seed;
  if (o.threads) c.threads = *o.threads;
  c.validate();
  return c;
}

void print_table(const SweepResult& s) {
  std::printf("%-12s %-30s %5s %12s %12s %12s %8s\n", s.sweep_var.c_str(), "mode", "iter", "ber", "ber_hi", "nmse",
              "errors");
  for (auto& pt : s.points)
    for (auto& mr : pt.modes) {
      for (auto& it : mr.iterations) {
        if (it.iter != 0 && it.iter != mr.final_iter().iter) continue;
        std::printf("%-12g %-30s %5d %12.4g %12.4g %12.4g %8llu\n", pt.sweep_value, to_string(mr.mode).c_str(), it.iter,
                    it.ber, it.ber_hi, it.nmse, (unsigned long long)it.errors);
      }
      if (mr.failed) std::printf("  %d trial(s) failed numerically\n", mr.failed);
    }
}

bool has_mode(const ExperimentConfig& c, ReceiverMode m) {
  return std::find(c.modes.begin(), c.modes.end(), m) != c.modes.end();
}

int report(const char* name, const Verdict& v) {
  std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
  return v.pass ? 0 : 1;
}

// Shape checks that apply to whatever the sweep contains.
int assert_sweep(const SweepResult& s) {
  int fails = 0, checks = 0;
  const auto& c = s.cfg;
  auto has_value = [&](double v) {
    return std::any_of(s.points.begin(), s.points.end(), [&](auto& p) { return p.sweep_value == v; });
  };
  const bool sep = has_mode(c, ReceiverMode::SeparateSensing_SeparateData), joint = has_mode(c, ReceiverMode::Joint_Turbo);
  if (s.sweep_var == "nu_max_hz" && joint) {
    const double base = c.nu_max_hz;  // the preset's nominal operating point
    if (sep && has_value(base)) {
      ++checks;
      fails += report("turbo gap", check_turbo_gap(point_at(s, base)));
    }
    const double hi = s.points.back().sweep_value;
    if (has_value(base) && hi > base) {
      ++checks;
      fails += report("doppler degradation",
                      check_doppler_degradation(point_at(s, base).mode(ReceiverMode::Joint_Turbo),
                                                s.points.back().mode(ReceiverMode::Joint_Turbo)));
    }
  }
  if (s.sweep_var == "pdr_db" && joint && has_mode(c, ReceiverMode::Ref_JointSensing_CleanData) && has_value(-15) &&
      has_value(10) && has_value(35)) {
    ++checks;
    fails += report("pdr U-shape", check_u_shape(s));
  }
  if (s.sweep_var.empty() || s.points.size() == 1) {
    const auto& pt = s.points.front();
    if (sep && joint) {
      ++checks;
      fails += report("turbo gap", check_turbo_gap(pt));
    }
    if (joint) {
      ++checks;
      fails += report("nmse monotone", check_nmse_monotone(pt.mode(ReceiverMode::Joint_Turbo)));
    }
  }
  for (auto& pt : s.points)
    for (auto& mr : pt.modes)
      if (mr.failed) {
        ++checks;
        ++fails;
        std::printf("FAIL numeric: %d trial(s) of %s failed at %g\n", mr.failed, to_string(mr.mode).c_str(), pt.sweep_value);
      }
  if (checks == 0) std::printf("no acceptance check applies to this configuration\n");
  return fails ? 2 : 0;
}

int run_and_write(const ExperimentConfig& cfg, const Overrides& o, const std::string& default_stem) {
  const auto t0 = std::chrono::steady_clock::now();
  const SweepResult s = cfg.sweep_var.empty() ? as_sweep(run_experiment(cfg)) : run_sweep(cfg);
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::string stem = o.out.empty() ? default_stem : o.out;
  write_results(s, stem);
  if (!o.quiet) print_table(s);
  std::printf("wrote %s.csv and %s.json (%.1f s)\n", stem.c_str(), stem.c_str(), dt);
  return o.assert_ ? assert_sweep(s) : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zak-OTFS joint sensing and communication simulator"};
  app.require_subcommand(1);

  Overrides run_o, sweep_o;
  auto* run = app.add_subcommand("run", "single operating point (or the sweep named in the config)");
  add_common(run, run_o);
  run->add_option("--preset", run_o.preset, "start from a preset")->check(CLI::IsMember({"fig2", "fig3", "small"}));
  bool print_config = false;
  run->add_flag("--print-config", print_config, "print the resolved configuration and exit");

  auto* sweep = app.add_subcommand("sweep", "preset BER sweep (fig2: Doppler, fig3: PDR, small: reduced grid)");
  add_common(sweep, sweep_o);
  sweep->add_option("--preset", sweep_o.preset, "fig2 | fig3 | small")
      ->required()
      ->check(CLI::IsMember({"fig2", "fig3", "small"}));

  auto* papr = app.add_subcommand("papr", "PAPR of pilots and subframes");
  Overrides papr_o;
  int subframes = 100, Q = 4;
  papr->add_option("--config", papr_o.config, "key=value configuration file");
  papr->add_option("--set", papr_o.sets, "extra key=value setting (repeatable)");
  papr->add_option("--subframes", subframes, "random subframes at PDR 10 dB");
  papr->add_option("--oversample", Q, "time-domain oversampling factor")->check(CLI::PositiveNumber);
  papr->add_option("--seed", papr_o.seed, "base seed");
  papr->add_option("--out", papr_o.out, "CSV path");
  papr->add_flag("--assert", papr_o.assert_, "exit nonzero when outside the expected ranges");

  auto* self = app.add_subcommand("selftest", "algebraic invariant suite");
  std::uint64_t self_seed = 1;
  self->add_option("--seed", self_seed, "seed for the random operands");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = build_config(run_o);
      if (print_config) {
        std::cout << config_text(cfg);
        return 0;
      }
      return run_and_write(cfg, run_o, "zakotfs_run");
    }
    if (*sweep) {
      const auto cfg = build_config(sweep_o);
      if (cfg.sweep_var.empty()) throw ConfigError("preset has no sweep");
      return run_and_write(cfg, sweep_o, "zakotfs_" + sweep_o.preset);
    }
    if (*papr) {
      const auto cfg = build_config(papr_o);
      const auto rows = papr_report(cfg, subframes, Q);
      std::string csv = "signal,papr_db\n";
      for (auto& r : rows) {
        std::printf("%-36s %8.3f dB\n", r.signal.c_str(), r.papr_db);
        csv += r.signal + "," + detail::fmt(r.papr_db) + "\n";
      }
      if (!papr_o.out.empty()) write_text(papr_o.out, csv);
      return papr_o.assert_ ? 2 * report("papr", check_papr(rows)) : 0;
    }
    if (*self) {
      int fails = 0;
      for (auto& c : invariant_suite(self_seed)) {
        std::printf("%s %-52s error %.3g (tol %.0e)\n", c.pass() ? "PASS" : "FAIL", c.name.c_str(), c.error, c.tol);
        fails += !c.pass();
      }
      std::printf("%d failure(s)\n", fails);
      return fails ? 2 : 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
