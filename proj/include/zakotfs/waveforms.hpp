#pragma once

#include <cstdint>

#include "dd.hpp"

namespace zakotfs {

using Bits = std::vector<std::uint8_t>;

struct SymbolGrid {
  ModulationParams params;
  cvec x;  // k-major, M*N

  cplx operator()(int k, int l) const { return x[std::size_t(k) * params.N + l]; }
};

struct PilotSpec {
  int k_p = 0;
  int l_p = 0;
  int q = 3;

  static PilotSpec centered(const ModulationParams& p, int q = 3) { return {p.M / 2, p.N / 2, q}; }
};

struct SubframeSpec {
  double E_d = 1.0;
  double E_p = 10.0;
  PilotSpec pilot;

  double pdr_db() const { return db10(E_p / E_d); }
  void validate() const {
    if (E_d < 0 || E_p < 0 || (E_d == 0 && E_p == 0))
      throw ConfigError("subframe energies must be non-negative and not both zero");
  }
};

// Tap layout of the chirp spreading filter. FullPeriod spans one full chirp
// period [0, MN) on both axes; FundamentalDomain is [0,M) x [0,N).
enum class ChirpSupport { FullPeriod, FundamentalDomain };

inline SymbolGrid map_bits_to_symbols(const ModulationParams& p, std::span<const std::uint8_t> bits) {
  const std::size_t L = std::size_t(p.L());
  if (bits.size() != 2 * L) throw ConfigError("bit array length must be 2*M*N");
  const double s = 1.0 / std::sqrt(2.0);
  SymbolGrid g{p, cvec(L)};
  for (std::size_t i = 0; i < L; ++i)
    g.x[i] = cplx((1.0 - 2.0 * bits[2 * i]) * s, (1.0 - 2.0 * bits[2 * i + 1]) * s);
  return g;
}

inline DDSignal data_signal(const SymbolGrid& sym) {
  const double s = 1.0 / std::sqrt(double(sym.params.L()));
  cvec fd(sym.x.size());
  for (std::size_t i = 0; i < fd.size(); ++i) fd[i] = sym.x[i] * s;
  return DDSignal(sym.params, std::move(fd));
}

inline DDSignal point_pilot(const ModulationParams& p, const PilotSpec& spec) {
  if (spec.k_p < 0 || spec.k_p >= p.M || spec.l_p < 0 || spec.l_p >= p.N)
    throw ConfigError("pilot location outside the fundamental domain");
  DDSignal x(p);
  x(spec.k_p, spec.l_p) = 1.0;
  return x;
}

namespace detail {
inline DDFilter raw_chirp(const ModulationParams& p, int q, ChirpSupport support) {
  const long long L = p.L();
  const int nk = support == ChirpSupport::FullPeriod ? int(L) : p.M;
  const int nl = support == ChirpSupport::FullPeriod ? int(L) : p.N;
  Twiddle tw(L);
  DDFilter w(p, SupportRegion{0, nk - 1, 0, nl - 1});
  const double s = 1.0 / double(L);
  for (long long k = 0; k < nk; ++k)
    for (long long l = 0; l < nl; ++l) w.at(k, l) = s * tw(q * ((k * k + l * l) % L));
  return w;
}
}  // namespace detail

inline DDFilter chirp_filter(const ModulationParams& p, int q,
                             ChirpSupport support = ChirpSupport::FullPeriod) {
  DDFilter w = detail::raw_chirp(p, q, support);
  const double e = twisted_convolve_fs(w, point_pilot(p, {0, 0, q})).energy();
  w *= 1.0 / std::sqrt(e);
  return w;
}

inline DDSignal spread_pilot(const ModulationParams& p, const PilotSpec& spec,
                             ChirpSupport support = ChirpSupport::FullPeriod) {
  DDSignal x = twisted_convolve_fs(detail::raw_chirp(p, spec.q, support), point_pilot(p, spec));
  x *= 1.0 / std::sqrt(x.energy());
  return x;
}

inline DDSignal compose_subframe(const DDSignal& data, const DDSignal& pilot, const SubframeSpec& spec) {
  require_same(data.params(), pilot.params());
  spec.validate();
  return std::sqrt(spec.E_d) * data + std::sqrt(spec.E_p) * pilot;
}

struct Decisions {
  Bits bits;
  SymbolGrid symbols;
};

// Nearest 4-QAM point; zero components decide toward the positive side.
inline Decisions demap_symbols(const ModulationParams& p, std::span<const cplx> soft) {
  const std::size_t L = std::size_t(p.L());
  if (soft.size() != L) throw ConfigError("soft grid must have M*N cells");
  const double s = 1.0 / std::sqrt(2.0);
  Decisions d{Bits(2 * L), SymbolGrid{p, cvec(L)}};
  for (std::size_t i = 0; i < L; ++i) {
    const std::uint8_t b1 = soft[i].real() < 0 ? 1 : 0;
    const std::uint8_t b0 = soft[i].imag() < 0 ? 1 : 0;
    d.bits[2 * i] = b1;
    d.bits[2 * i + 1] = b0;
    d.symbols.x[i] = cplx((1.0 - 2.0 * b1) * s, (1.0 - 2.0 * b0) * s);
  }
  return d;
}

}  // namespace zakotfs
