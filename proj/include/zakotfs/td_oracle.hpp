#pragma once

#include "channel.hpp"

namespace zakotfs {

struct OracleOptions {
  int Q = 16;
  double span = 1024.0;  // RRC truncation, symbols each side
};

// Time-domain reference for the DD I/O relation. Not cyclic: the pulsone
// train is windowed by the Doppler pulse (duration (1+beta_nu) T), shaped by
// the delay RRC, passed through each path as a continuous delay and Doppler
// shift, matched filtered by a Riemann sum at Q samples per symbol, windowed
// again and folded back onto the DD grid. Time is in units of 1/B.
inline DDSignal td_oracle(const DDSignal& x, const PhysicalChannel& phys, const OracleOptions& opt = {}) {
  const auto& p = x.params();
  const int M = p.M, N = p.N, Q = opt.Q;
  const long long L = p.L();
  if (Q < 1) throw ConfigError("oracle oversampling must be >= 1");
  const auto td = zak_inverse(x, 1).samples;
  const double bt = p.beta_tau, bn = p.beta_nu;

  auto window = [&](double t) { return std::sqrt(pulse::rc_spectrum(t / double(L), bn)); };
  const long long ihalf = (long long)std::floor((1.0 + bn) * double(L) / 2.0);
  const long long imin = -ihalf, imax = ihalf;
  std::vector<cplx> s(std::size_t(imax - imin + 1));
  for (long long i = imin; i <= imax; ++i) s[std::size_t(i - imin)] = td[std::size_t(pmod(i, L))] * window(double(i));

  const long long T0 = (long long)std::ceil(opt.span);
  const long long jlo = (imin - T0) * Q, jhi = (imax + T0) * Q;
  cvec r(std::size_t(jhi - jlo + 1));
  for (const auto& path : phys.paths) {
    const double tau = path.tau * p.B();
    const double nu = path.nu / p.B();
    for (long long j = jlo; j <= jhi; ++j) {
      const double t = double(j) / Q;
      const double c = t - tau;
      const long long i0 = std::max(imin, (long long)std::ceil(c - double(T0)));
      const long long i1 = std::min(imax, (long long)std::floor(c + double(T0)));
      cplx acc = 0;
      for (long long i = i0; i <= i1; ++i) acc += s[std::size_t(i - imin)] * pulse::root_raised_cosine(c - double(i), bt);
      r[std::size_t(j - jlo)] += path.h * std::polar(1.0, 2.0 * pi * nu * c) * acc;
    }
  }

  std::vector<double> mf(std::size_t(2 * T0 * Q + 1));
  for (long long d = -T0 * Q; d <= T0 * Q; ++d) mf[std::size_t(d + T0 * Q)] = pulse::root_raised_cosine(double(d) / Q, bt);

  DDSignal y(p);
  Twiddle tw(N);
  const double scale = 1.0 / (std::sqrt(double(N)) * Q);
  for (long long m = imin; m <= imax; ++m) {
    const double w = window(double(m));
    if (w == 0) continue;
    cplx z = 0;
    for (long long d = -T0 * Q; d <= T0 * Q; ++d) z += mf[std::size_t(d + T0 * Q)] * r[std::size_t(m * Q - d - jlo)];
    z *= w * scale;
    const long long n = floor_div(m, M);
    const int k = int(m - n * M);
    for (int l = 0; l < N; ++l) y(k, l) += z * tw(-n * l);
  }
  return y;
}

}  // namespace zakotfs
