#pragma once

#include <array>

#include "core.hpp"

// Raised-cosine family in symbol units (symbol period 1).
namespace zakotfs::pulse {

inline double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(pi * x) / (pi * x);
}

// unit-peak raised cosine, zero crossings at nonzero integers
inline double raised_cosine(double x, double beta) {
  if (beta == 0) return sinc(x);
  const double d = 1.0 - 4.0 * beta * beta * x * x;
  if (std::abs(d) < 1e-10) return pi / 4.0 * sinc(1.0 / (2.0 * beta));
  return sinc(x) * std::cos(pi * beta * x) / d;
}

// unit-energy root raised cosine; rrc * rrc = raised_cosine
inline double root_raised_cosine(double t, double beta) {
  if (beta == 0) return sinc(t);
  if (std::abs(t) < 1e-12) return 1.0 - beta + 4.0 * beta / pi;
  const double e = 1.0 / (4.0 * beta);
  if (std::abs(std::abs(t) - e) < 1e-10)
    return beta / std::sqrt(2.0) *
           ((1.0 + 2.0 / pi) * std::sin(pi * e) + (1.0 - 2.0 / pi) * std::cos(pi * e));
  const double num = std::sin(pi * t * (1.0 - beta)) + 4.0 * beta * t * std::cos(pi * t * (1.0 + beta));
  return num / (pi * t * (1.0 - 16.0 * beta * beta * t * t));
}

// raised-cosine spectrum shape, 1 on the flat band, integrates to 1
inline double rc_spectrum(double f, double beta) {
  const double a = std::abs(f);
  if (beta == 0) return a < 0.5 ? 1.0 : (a == 0.5 ? 0.5 : 0.0);
  const double f1 = (1.0 - beta) / 2.0, f2 = (1.0 + beta) / 2.0;
  if (a <= f1) return 1.0;
  if (a > f2) return 0.0;
  const double c = std::cos(pi / (2.0 * beta) * (a - f1));
  return c * c;
}

namespace detail {

struct Term {
  double coef, alpha, phase;  // coef * exp(j (alpha f + phase))
};

struct Piece {
  double lo, hi;
  std::array<Term, 2> t;
  int nt;
};

// square root of the RC spectrum as exponential pieces, shifted by s
inline int sqrt_pieces(double beta, double s, std::array<Piece, 3>& out) {
  if (beta == 0) {
    out[0] = {-0.5 + s, 0.5 + s, {{{1, 0, 0}, {0, 0, 0}}}, 1};
    return 1;
  }
  const double f1 = (1.0 - beta) / 2.0, f2 = (1.0 + beta) / 2.0;
  const double a = pi / (2.0 * beta);
  // cos(a (f - s) - a f1) on the right taper, cos(-a (f - s) - a f1) on the left
  const double cr = -a * s - a * f1;
  const double cl = a * s - a * f1;
  out[0] = {-f2 + s, -f1 + s, {{{0.5, -a, cl}, {0.5, a, -cl}}}, 2};
  out[1] = {-f1 + s, f1 + s, {{{1, 0, 0}, {0, 0, 0}}}, 1};
  out[2] = {f1 + s, f2 + s, {{{0.5, a, cr}, {0.5, -a, -cr}}}, 2};
  return 3;
}

// integral over [p,q] of exp(j g f)
inline cplx exp_integral(double g, double p, double q) {
  const double w = q - p;
  const double h = 0.5 * g * w;
  const double amp = std::abs(h) < 1e-9 ? w : std::sin(h) / (0.5 * g);
  return amp * std::polar(1.0, 0.5 * g * (p + q));
}

}  // namespace detail

// Cross-correlation of two unit-energy RRC pulses with a relative frequency
// offset s, evaluated at lag x:
//   C(x, s) = int sqrt(R(f - s) R(f)) exp(-j 2 pi f x) df
// which equals int g(u) g(x + u) exp(j 2 pi s u) du for the RRC pulse g.
// C(x, 0) is the raised cosine.
inline cplx rrc_cross_ambiguity(double x, double s, double beta) {
  std::array<detail::Piece, 3> A, B;
  const int na = detail::sqrt_pieces(beta, s, A);
  const int nb = detail::sqrt_pieces(beta, 0.0, B);
  cplx acc = 0;
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j) {
      const double lo = std::max(A[i].lo, B[j].lo);
      const double hi = std::min(A[i].hi, B[j].hi);
      if (!(hi > lo)) continue;
      for (int u = 0; u < A[i].nt; ++u)
        for (int v = 0; v < B[j].nt; ++v) {
          const auto& ta = A[i].t[u];
          const auto& tb = B[j].t[v];
          const double g = ta.alpha + tb.alpha - 2.0 * pi * x;
          acc += ta.coef * tb.coef * std::polar(1.0, ta.phase + tb.phase) *
                 detail::exp_integral(g, lo, hi);
        }
    }
  return acc;
}

}  // namespace zakotfs::pulse
