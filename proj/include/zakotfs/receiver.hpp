#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <limits>
#include <optional>
#include <string_view>

#include "channel.hpp"

namespace zakotfs {

struct ChannelEstimate {
  DDFilter taps;
  int iteration = 0;
};

inline ChannelEstimate estimate_channel(const DDSignal& y, const DDSignal& xs, double E_p,
                                        const SupportRegion& S, int iteration = 0) {
  if (!(E_p > 0)) throw ModeError("channel estimation needs a pilot (E_p > 0)");
  DDFilter A = cross_ambiguity(y, xs, S);
  A *= 1.0 / std::sqrt(E_p);
  return {std::move(A), iteration};
}

inline double nmse(const DDFilter& est, const DDFilter& truth) {
  const auto box = SupportRegion::hull(est.box(), truth.box());
  double num = 0;
  for (int k = box.k_lo; k <= box.k_hi; ++k)
    for (int l = box.l_lo; l <= box.l_hi; ++l) num += std::norm(est(k, l) - truth(k, l));
  return num / truth.energy();
}

using IoMatrix = Eigen::MatrixXcd;

// Column j maps a unit symbol at cell j (k-major) to the received fundamental domain.
inline IoMatrix build_io_matrix(const DDFilter& h, const ModulationParams& p) {
  require_same(h.params(), p);
  const int L = p.L();
  const double s = 1.0 / std::sqrt(double(L));
  IoMatrix H = IoMatrix::Zero(L, L);
  DDSignal e(p);
  for (int j = 0; j < L; ++j) {
    e.fd()[j] = s;
    const DDSignal col = twisted_convolve_fs(h, e);
    e.fd()[j] = 0;
    for (int i = 0; i < L; ++i) H(i, j) = col.fd()[i];
  }
  return H;
}

inline Eigen::VectorXcd to_vector(std::span<const cplx> v) {
  Eigen::VectorXcd out(Eigen::Index(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(Eigen::Index(i)) = v[i];
  return out;
}

inline cvec to_cvec(const Eigen::VectorXcd& v) { return cvec(v.data(), v.data() + v.size()); }

inline cvec mmse_equalize(const IoMatrix& H, std::span<const cplx> y, double E_d, double noise_var) {
  if (!(E_d > 0)) throw ModeError("equalization needs data energy (E_d > 0)");
  if (noise_var < 0) throw ConfigError("noise variance must be non-negative");
  Eigen::MatrixXcd G = H.adjoint() * H;
  G.diagonal().array() += noise_var / E_d;
  Eigen::VectorXcd rhs = H.adjoint() * to_vector(y) / std::sqrt(E_d);
  Eigen::LLT<Eigen::MatrixXcd> llt(G);
  if (llt.info() != Eigen::Success) throw NumericError("MMSE normal matrix is singular");
  Eigen::VectorXcd x = llt.solve(rhs);
  if (noise_var == 0 && !(G * x).isApprox(rhs, 1e-8)) throw NumericError("MMSE normal matrix is singular");
  return to_cvec(x);
}

inline cvec mmse_equalize(const IoMatrix& H, const DDSignal& y, double E_d, double noise_var) {
  return mmse_equalize(H, y.fd(), E_d, noise_var);
}

// Same estimator as mmse_equalize, solved in the time domain where the
// channel is a cyclic banded operator: y_td[i] = sum_a g_a[i] s[i - a].
class BandedMmse {
 public:
  using SpMat = Eigen::SparseMatrix<cplx>;

  BandedMmse(const DDFilter& h, double E_d, double noise_var) : p_(h.params()) {
    if (!(E_d > 0)) throw ModeError("equalization needs data energy (E_d > 0)");
    if (noise_var < 0) throw ConfigError("noise variance must be non-negative");
    const long long L = p_.L();
    Twiddle tw(L);
    const auto box = h.box();
    const double scale = std::sqrt(E_d / double(L));
    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(std::size_t(L) * std::size_t(box.nk()));
    for (int a = box.k_lo; a <= box.k_hi; ++a) {
      bool any = false;
      for (int b = box.l_lo; b <= box.l_hi; ++b) any = any || h(a, b) != cplx(0);
      if (!any) continue;
      for (long long i = 0; i < L; ++i) {
        cplx g = 0;
        for (int b = box.l_lo; b <= box.l_hi; ++b) {
          const cplx t = h(a, b);
          if (t != cplx(0)) g += t * tw(b * (i - a));
        }
        trip.emplace_back(int(i), int(pmod(i - a, L)), g * scale);
      }
    }
    const int n = int(L);
    phi_.resize(n, n);
    phi_.setFromTriplets(trip.begin(), trip.end());
    SpMat normal = SpMat(phi_.adjoint()) * phi_;
    SpMat eye(n, n);
    eye.setIdentity();
    normal += noise_var * eye;
    solver_.compute(normal);
    if (solver_.info() != Eigen::Success) throw NumericError("MMSE normal matrix is singular");
  }

  cvec solve(const DDSignal& y) const {
    require_same(p_, y.params());
    const auto ytd = zak_inverse(y, 1).samples;
    Eigen::VectorXcd rhs = phi_.adjoint() * to_vector(ytd);
    Eigen::VectorXcd s = solver_.solve(rhs);
    TDSignal td{p_, 1, to_cvec(s), true};
    const DDSignal x = zak_forward(td);
    return cvec(x.fd().begin(), x.fd().end());
  }

 private:
  ModulationParams p_;
  SpMat phi_;
  Eigen::SimplicialLDLT<SpMat> solver_;
};

inline DDSignal cancel_pilot(const DDSignal& y, const DDFilter& h, const DDSignal& xs, double E_p) {
  if (E_p == 0) return y;
  return y - std::sqrt(E_p) * twisted_convolve_fs(h, xs);
}

inline DDSignal cancel_data(const DDSignal& y, const DDFilter& h, const SymbolGrid& x_hat, double E_d) {
  if (E_d == 0) return y;
  return y - std::sqrt(E_d) * twisted_convolve_fs(h, data_signal(x_hat));
}

enum class ReceiverMode {
  SeparateSensing_SeparateData,
  Joint_Turbo,
  Ref_CleanSensing_JointData,
  Ref_JointSensing_CleanData,
};

inline constexpr ReceiverMode all_modes[] = {
    ReceiverMode::SeparateSensing_SeparateData, ReceiverMode::Joint_Turbo,
    ReceiverMode::Ref_CleanSensing_JointData, ReceiverMode::Ref_JointSensing_CleanData};

inline std::string to_string(ReceiverMode m) {
  switch (m) {
    case ReceiverMode::SeparateSensing_SeparateData: return "SeparateSensing_SeparateData";
    case ReceiverMode::Joint_Turbo: return "Joint_Turbo";
    case ReceiverMode::Ref_CleanSensing_JointData: return "Ref_CleanSensing_JointData";
    case ReceiverMode::Ref_JointSensing_CleanData: return "Ref_JointSensing_CleanData";
  }
  return "?";
}

inline ReceiverMode parse_mode(std::string_view s) {
  auto eq = [](std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (std::tolower((unsigned char)a[i]) != std::tolower((unsigned char)b[i])) return false;
    return true;
  };
  for (auto m : all_modes)
    if (eq(s, to_string(m))) return m;
  if (eq(s, "separate")) return ReceiverMode::SeparateSensing_SeparateData;
  if (eq(s, "joint")) return ReceiverMode::Joint_Turbo;
  if (eq(s, "clean_sensing")) return ReceiverMode::Ref_CleanSensing_JointData;
  if (eq(s, "clean_data")) return ReceiverMode::Ref_JointSensing_CleanData;
  throw ConfigError("unknown receiver mode: " + std::string(s));
}

// sensing in a subframe that also carries data
inline bool senses_jointly(ReceiverMode m) {
  return m == ReceiverMode::Joint_Turbo || m == ReceiverMode::Ref_JointSensing_CleanData;
}
// detection in a subframe that also carries the pilot
inline bool detects_jointly(ReceiverMode m) {
  return m == ReceiverMode::Joint_Turbo || m == ReceiverMode::Ref_CleanSensing_JointData;
}

struct Observation {
  DDSignal sense;   // subframe the channel is read from
  DDSignal detect;  // subframe the symbols are read from
  bool sense_has_data = true;
  bool detect_has_pilot = true;

  // joint: the single S|C + C|S subframe; pilot_only / data_only: the
  // dedicated subframes (only those the mode needs are read)
  static Observation for_mode(ReceiverMode m, const DDSignal* joint, const DDSignal* pilot_only,
                              const DDSignal* data_only) {
    const DDSignal* s = senses_jointly(m) ? joint : pilot_only;
    const DDSignal* d = detects_jointly(m) ? joint : data_only;
    if (!s || !d) throw ModeError("missing subframe for receiver mode " + to_string(m));
    return {*s, *d, senses_jointly(m), detects_jointly(m)};
  }
};

enum class EqualizerKind { Banded, Dense };

struct TurboConfig {
  SubframeSpec spec;
  SupportRegion S;
  double noise_var = 0;
  int T_max = 5;
  EqualizerKind equalizer = EqualizerKind::Banded;
  const DDFilter* genie = nullptr;  // replaces every estimate when set
};

struct Truth {
  Bits bits;
  SymbolGrid symbols;
  DDFilter h;
  DDSignal rx_data;  // sqrt(E_d) h *sigma x_d, computed on demand when empty
};

struct IterationMetrics {
  int t = 0;
  std::size_t bit_errors = 0;
  double ber = std::numeric_limits<double>::quiet_NaN();
  double nmse = std::numeric_limits<double>::quiet_NaN();
  double residual_pilot = std::numeric_limits<double>::quiet_NaN();  // mean per-cell power left in y_d
  double residual_data = std::numeric_limits<double>::quiet_NaN();   // mean per-cell power left in y_s
};

struct TurboState {
  int t = 0;
  Decisions x_hat;
  ChannelEstimate h_hat;
  DDSignal y_s;
  DDSignal y_d;
  std::vector<IterationMetrics> trace;
};

inline cvec equalize(const DDFilter& h, const DDSignal& y, double E_d, double noise_var, EqualizerKind kind) {
  if (kind == EqualizerKind::Dense) return mmse_equalize(build_io_matrix(h, y.params()), y, E_d, noise_var);
  return BandedMmse(h, E_d, noise_var).solve(y);
}

// Iteration 0 senses, cancels the pilot and detects. Each further iteration
// cancels the detected data from the sensing subframe, re-senses, cancels the
// pilot with the new estimate and detects again. Cancellations with nothing
// to cancel are skipped.
inline TurboState turbo_receive(const Observation& obs, const DDSignal& xs, const TurboConfig& cfg,
                                const Truth* truth = nullptr) {
  if (cfg.T_max < 0) throw ConfigError("T_max must be >= 0");
  const auto& spec = cfg.spec;
  const auto& p = xs.params();
  const double L = double(p.L());
  const double sEd = std::sqrt(spec.E_d), sEp = std::sqrt(spec.E_p);

  DDSignal rx_data;
  if (truth && obs.sense_has_data)
    rx_data = truth->rx_data.fd().empty() ? sEd * twisted_convolve_fs(truth->h, data_signal(truth->symbols))
                                          : truth->rx_data;

  TurboState st;
  auto record = [&](int t, const DDSignal& y_s_used) {
    IterationMetrics m;
    m.t = t;
    if (truth) {
      for (std::size_t i = 0; i < truth->bits.size(); ++i) m.bit_errors += truth->bits[i] != st.x_hat.bits[i];
      m.ber = double(m.bit_errors) / double(truth->bits.size());
      m.nmse = nmse(st.h_hat.taps, truth->h);
      const DDFilter dh = truth->h - st.h_hat.taps;
      m.residual_pilot = obs.detect_has_pilot ? sEp * sEp * twisted_convolve_fs(dh, xs).energy() / L : 0.0;
      if (obs.sense_has_data) {
        const DDSignal r = rx_data - (obs.sense - y_s_used);
        m.residual_data = r.energy() / L;
      } else {
        m.residual_data = 0.0;
      }
    }
    st.trace.push_back(m);
  };

  auto detect = [&](const DDFilter& h) {
    st.y_d = obs.detect_has_pilot ? cancel_pilot(obs.detect, h, xs, spec.E_p) : obs.detect;
    // without data there is nothing to detect; the decisions are never used
    const cvec soft = spec.E_d > 0 ? equalize(h, st.y_d, spec.E_d, cfg.noise_var, cfg.equalizer) : cvec(std::size_t(p.L()));
    st.x_hat = demap_symbols(p, soft);
  };

  st.t = 0;
  st.y_s = obs.sense;
  auto sense = [&](const DDSignal& y, int t) {
    return cfg.genie ? ChannelEstimate{*cfg.genie, t} : estimate_channel(y, xs, spec.E_p, cfg.S, t);
  };
  st.h_hat = sense(obs.sense, 0);
  detect(st.h_hat.taps);
  record(0, st.y_s);

  for (int t = 1; t <= cfg.T_max; ++t) {
    st.t = t;
    if (!obs.sense_has_data) {
      // nothing to cancel: estimate and decisions are stationary
      st.h_hat.iteration = t;
      IterationMetrics m = st.trace.back();
      m.t = t;
      st.trace.push_back(m);
      continue;
    }
    st.y_s = cancel_data(obs.sense, st.h_hat.taps, st.x_hat.symbols, spec.E_d);
    st.h_hat = sense(st.y_s, t);
    detect(st.h_hat.taps);
    record(t, st.y_s);
  }
  return st;
}

}  // namespace zakotfs
