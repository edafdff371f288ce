#pragma once

#include <algorithm>
#include <span>
#include <utility>

#include "core.hpp"

namespace zakotfs {

// Rectangular set of integer delay/Doppler offsets, both ends inclusive.
struct SupportRegion {
  int k_lo = 0, k_hi = 0;
  int l_lo = 0, l_hi = 0;

  int nk() const { return k_hi - k_lo + 1; }
  int nl() const { return l_hi - l_lo + 1; }
  std::size_t size() const { return std::size_t(nk()) * std::size_t(nl()); }
  bool contains(long long k, long long l) const {
    return k >= k_lo && k <= k_hi && l >= l_lo && l <= l_hi;
  }
  bool operator==(const SupportRegion&) const = default;

  static SupportRegion hull(const SupportRegion& a, const SupportRegion& b) {
    return {std::min(a.k_lo, b.k_lo), std::max(a.k_hi, b.k_hi), std::min(a.l_lo, b.l_lo),
            std::max(a.l_hi, b.l_hi)};
  }
  static SupportRegion minkowski(const SupportRegion& a, const SupportRegion& b) {
    return {a.k_lo + b.k_lo, a.k_hi + b.k_hi, a.l_lo + b.l_lo, a.l_hi + b.l_hi};
  }
  SupportRegion grown(int dk, int dl) const { return {k_lo - dk, k_hi + dk, l_lo - dl, l_hi + dl}; }
};

// Quasi-periodic DD signal, stored on the fundamental domain k-major.
class DDSignal {
 public:
  DDSignal() = default;
  explicit DDSignal(const ModulationParams& p) : p_(p), fd_(std::size_t(p.L())) {}
  DDSignal(const ModulationParams& p, cvec fd) : p_(p), fd_(std::move(fd)) {
    if (fd_.size() != std::size_t(p.L())) throw ConfigError("DDSignal size must be M*N");
  }

  const ModulationParams& params() const { return p_; }
  int M() const { return p_.M; }
  int N() const { return p_.N; }

  cplx operator()(int k, int l) const { return fd_[std::size_t(k) * p_.N + l]; }
  cplx& operator()(int k, int l) { return fd_[std::size_t(k) * p_.N + l]; }

  const cplx* row(int k) const { return fd_.data() + std::size_t(k) * p_.N; }
  cplx* row(int k) { return fd_.data() + std::size_t(k) * p_.N; }

  std::span<const cplx> fd() const { return fd_; }
  std::span<cplx> fd() { return fd_; }

  double energy() const {
    double e = 0;
    for (auto v : fd_) e += std::norm(v);
    return e;
  }

  DDSignal& operator+=(const DDSignal& o) {
    require_same(p_, o.p_);
    for (std::size_t i = 0; i < fd_.size(); ++i) fd_[i] += o.fd_[i];
    return *this;
  }
  DDSignal& operator-=(const DDSignal& o) {
    require_same(p_, o.p_);
    for (std::size_t i = 0; i < fd_.size(); ++i) fd_[i] -= o.fd_[i];
    return *this;
  }
  DDSignal& operator*=(cplx a) {
    for (auto& v : fd_) v *= a;
    return *this;
  }
  friend DDSignal operator+(DDSignal a, const DDSignal& b) { return a += b; }
  friend DDSignal operator-(DDSignal a, const DDSignal& b) { return a -= b; }
  friend DDSignal operator*(cplx s, DDSignal a) { return a *= s; }
  friend DDSignal operator*(DDSignal a, cplx s) { return a *= s; }

 private:
  ModulationParams p_;
  cvec fd_;
};

inline cplx inner(const DDSignal& a, const DDSignal& b) {
  cplx s = 0;
  auto fa = a.fd();
  auto fb = b.fd();
  for (std::size_t i = 0; i < fa.size(); ++i) s += std::conj(fa[i]) * fb[i];
  return s;
}

inline cplx evaluate(const DDSignal& s, long long k, long long l) {
  const int M = s.M(), N = s.N();
  long long n = floor_div(k, M);
  cplx v = s(int(k - n * M), int(pmod(l, N)));
  long long m = pmod(pmod(n, N) * pmod(l, N), N);
  return m == 0 ? v : v * std::polar(1.0, 2.0 * pi * double(m) / double(N));
}

// Finitely supported DD filter, dense over a rectangular box.
class DDFilter {
 public:
  DDFilter() = default;
  DDFilter(const ModulationParams& p, const SupportRegion& box)
      : p_(p), box_(box), taps_(box.size()) {}
  DDFilter(const ModulationParams& p, const SupportRegion& box, cvec taps)
      : p_(p), box_(box), taps_(std::move(taps)) {
    if (taps_.size() != box_.size()) throw ConfigError("DDFilter tap count does not match support");
  }

  static DDFilter unit(const ModulationParams& p, int k, int l, cplx v = 1.0) {
    DDFilter f(p, SupportRegion{k, k, l, l});
    f.taps_[0] = v;
    return f;
  }

  const ModulationParams& params() const { return p_; }
  const SupportRegion& box() const { return box_; }

  cplx operator()(long long k, long long l) const {
    if (!box_.contains(k, l)) return 0.0;
    return taps_[index(k, l)];
  }
  cplx& at(long long k, long long l) {
    if (!box_.contains(k, l)) throw DomainError("tap outside filter support");
    return taps_[index(k, l)];
  }

  std::span<const cplx> taps() const { return taps_; }
  std::span<cplx> taps() { return taps_; }

  double energy() const {
    double e = 0;
    for (auto v : taps_) e += std::norm(v);
    return e;
  }

  DDFilter restricted(const SupportRegion& box) const {
    DDFilter f(p_, box);
    for (int k = box.k_lo; k <= box.k_hi; ++k)
      for (int l = box.l_lo; l <= box.l_hi; ++l) f.at(k, l) = (*this)(k, l);
    return f;
  }

  DDFilter& operator*=(cplx a) {
    for (auto& v : taps_) v *= a;
    return *this;
  }
  friend DDFilter operator*(cplx a, DDFilter f) { return f *= a; }

  friend DDFilter operator+(const DDFilter& a, const DDFilter& b) { return combine(a, b, 1.0); }
  friend DDFilter operator-(const DDFilter& a, const DDFilter& b) { return combine(a, b, -1.0); }

 private:
  std::size_t index(long long k, long long l) const {
    return std::size_t(k - box_.k_lo) * std::size_t(box_.nl()) + std::size_t(l - box_.l_lo);
  }
  static DDFilter combine(const DDFilter& a, const DDFilter& b, double sb) {
    require_same(a.p_, b.p_);
    auto box = SupportRegion::hull(a.box_, b.box_);
    DDFilter f(a.p_, box);
    for (int k = box.k_lo; k <= box.k_hi; ++k)
      for (int l = box.l_lo; l <= box.l_hi; ++l) f.at(k, l) = a(k, l) + sb * b(k, l);
    return f;
  }

  ModulationParams p_;
  SupportRegion box_;
  cvec taps_;
};

struct TDSignal {
  ModulationParams params;
  int Q = 1;
  cvec samples;
  bool cyclic = true;
};

// y = h *sigma x. Scatters every nonzero input cell through every tap, so a
// point input against a large filter costs only |h|.
inline DDSignal twisted_convolve_fs(const DDFilter& h, const DDSignal& x) {
  require_same(h.params(), x.params());
  const int M = x.M(), N = x.N();
  const long long L = M * (long long)N;
  Twiddle tw(L);
  DDSignal y(x.params());
  const auto box = h.box();
  const auto taps = h.taps();
  const int nl = box.nl();
  for (int kp = 0; kp < M; ++kp) {
    for (int lp = 0; lp < N; ++lp) {
      const cplx xv = x(kp, lp);
      if (xv == cplx(0)) continue;
      for (int a = box.k_lo; a <= box.k_hi; ++a) {
        const long long u = kp + a;
        const long long n1 = floor_div(u, M);
        const int k = int(u - n1 * M);
        const long long kk = kp - n1 * M;
        const long long step = pmod(kk, L);
        long long idx = pmod(box.l_lo * kk - n1 * M * lp, L);
        const cplx* row = taps.data() + std::size_t(a - box.k_lo) * nl;
        cplx* yrow = y.row(k);
        int l = int(pmod(lp + box.l_lo, N));
        for (int j = 0; j < nl; ++j) {
          const cplx t = row[j];
          if (t != cplx(0)) yrow[l] += t * xv * tw[idx];
          if (++l == N) l = 0;
          idx += step;
          if (idx >= L) idx -= L;
        }
      }
    }
  }
  return y;
}

inline DDFilter twisted_convolve_ff(const DDFilter& a, const DDFilter& b) {
  require_same(a.params(), b.params());
  const long long L = a.params().L();
  Twiddle tw(L);
  auto box = SupportRegion::minkowski(a.box(), b.box());
  DDFilter out(a.params(), box);
  const auto ab = a.box();
  const auto bb = b.box();
  for (int k1 = ab.k_lo; k1 <= ab.k_hi; ++k1)
    for (int l1 = ab.l_lo; l1 <= ab.l_hi; ++l1) {
      const cplx av = a(k1, l1);
      if (av == cplx(0)) continue;
      for (int k2 = bb.k_lo; k2 <= bb.k_hi; ++k2)
        for (int l2 = bb.l_lo; l2 <= bb.l_hi; ++l2) {
          const cplx bv = b(k2, l2);
          if (bv == cplx(0)) continue;
          out.at(k1 + k2, l1 + l2) += av * bv * tw((long long)l1 * k2);
        }
    }
  return out;
}

// A_{y,x}[a,b] over the requested window.
inline DDFilter cross_ambiguity(const DDSignal& y, const DDSignal& x, const SupportRegion& window) {
  require_same(y.params(), x.params());
  const int M = x.M(), N = x.N();
  const long long L = M * (long long)N;
  Twiddle tw(L);
  DDFilter A(x.params(), window);
  for (int a = window.k_lo; a <= window.k_hi; ++a) {
    for (int k = 0; k < M; ++k) {
      const long long u = k - a;
      const long long n = floor_div(u, M);
      const int kr = int(u - n * M);
      const cplx* yrow = y.row(k);
      const cplx* xrow = x.row(kr);
      for (int b = window.l_lo; b <= window.l_hi; ++b) {
        cplx acc = 0;
        int lr = int(pmod(-b, N));
        const long long base = -b * u;
        for (int l = 0; l < N; ++l) {
          const long long v = l - b;
          acc += yrow[l] * std::conj(xrow[lr]) * tw(base - n * M * v);
          if (++lr == N) lr = 0;
        }
        A.at(a, b) += acc;
      }
    }
  }
  return A;
}

// Naive DFT, X[f] = sum_i x[i] exp(sign j 2 pi f i / n).
inline cvec dft(std::span<const cplx> x, int sign) {
  const long long n = (long long)x.size();
  Twiddle tw(n);
  cvec X(x.size());
  for (long long f = 0; f < n; ++f) {
    cplx acc = 0;
    for (long long i = 0; i < n; ++i) acc += x[i] * tw(sign * ((f * i) % n));
    X[f] = acc;
  }
  return X;
}

inline TDSignal zak_inverse(const DDSignal& x, int Q = 1) {
  if (Q < 1) throw ConfigError("oversampling factor must be >= 1");
  const int M = x.M(), N = x.N();
  const long long L = M * (long long)N;
  Twiddle tw(N);
  const double s = 1.0 / std::sqrt(double(N));
  cvec td(static_cast<std::size_t>(L));
  for (int k = 0; k < M; ++k)
    for (int n = 0; n < N; ++n) {
      cplx acc = 0;
      for (int l = 0; l < N; ++l) acc += x(k, l) * tw((long long)n * l);
      td[std::size_t(k + n * M)] = acc * s;
    }
  if (Q == 1) return TDSignal{x.params(), 1, std::move(td), true};

  // cyclic band-limited interpolation, original samples preserved
  cvec X = dft(td, -1);
  const long long LQ = L * Q;
  Twiddle twq(LQ);
  std::vector<std::pair<long long, cplx>> bins;
  for (long long f = 0; f < L; ++f) {
    long long fs = f <= L / 2 ? f : f - L;
    if (L % 2 == 0 && f == L / 2) {
      bins.emplace_back(L / 2, X[f] * 0.5);
      bins.emplace_back(-L / 2, X[f] * 0.5);
    } else {
      bins.emplace_back(fs, X[f]);
    }
  }
  cvec out(static_cast<std::size_t>(LQ));
  for (long long i = 0; i < LQ; ++i) {
    cplx acc = 0;
    for (auto& [f, v] : bins) acc += v * twq((f * i) % LQ);
    out[std::size_t(i)] = acc / double(L);
  }
  return TDSignal{x.params(), Q, std::move(out), true};
}

inline DDSignal zak_forward(const TDSignal& td) {
  if (td.Q != 1) throw ConfigError("zak_forward needs Q == 1; decimate first");
  const auto& p = td.params;
  const int M = p.M, N = p.N;
  if (td.samples.size() != std::size_t(p.L())) throw ConfigError("time-domain length must be M*N");
  Twiddle tw(N);
  const double s = 1.0 / std::sqrt(double(N));
  DDSignal x(p);
  for (int k = 0; k < M; ++k)
    for (int l = 0; l < N; ++l) {
      cplx acc = 0;
      for (int n = 0; n < N; ++n) acc += td.samples[std::size_t(k + n * M)] * tw(-(long long)n * l);
      x(k, l) = acc * s;
    }
  return x;
}

inline double papr_db(std::span<const cplx> samples) {
  double peak = 0, mean = 0;
  for (auto v : samples) {
    const double e = std::norm(v);
    peak = std::max(peak, e);
    mean += e;
  }
  if (samples.empty() || peak == 0) throw DomainError("PAPR of a zero signal");
  mean /= double(samples.size());
  return db10(peak / mean);
}
inline double papr_db(const TDSignal& td) { return papr_db(td.samples); }

}  // namespace zakotfs
