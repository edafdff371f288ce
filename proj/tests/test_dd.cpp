#include "catch_amalgamated.hpp"
#include "zakotfs/zakotfs.hpp"

using namespace zakotfs;
using Catch::Approx;

namespace {

const ModulationParams P43 = ModulationParams::make(4, 3, 30e3);

DDSignal random_signal(const ModulationParams& p, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0, 9);
  DDSignal x(p);
  for (auto& v : x.fd()) v = complex_normal(rng, 1.0);
  return x;
}

DDFilter random_filter(const ModulationParams& p, std::uint64_t seed, int taps, int reach) {
  Rng rng = make_stream(seed, 1, 9);
  std::uniform_int_distribution<int> pos(-reach, reach);
  DDFilter f(p, SupportRegion{-reach, reach, -reach, reach});
  for (int i = 0; i < taps; ++i) f.at(pos(rng), pos(rng)) += complex_normal(rng, 1.0);
  return f;
}

cplx cis(double turns) { return std::polar(1.0, 2.0 * pi * turns); }

// Quasi-periodic extension built by stepping one period at a time from the
// fundamental domain; shares nothing with evaluate().
struct ExtensionTable {
  int M, N, k0, l0, nk, nl;
  std::vector<cplx> v;
  ExtensionTable(const DDSignal& x, int k_lo, int k_hi, int l_lo, int l_hi)
      : M(x.M()), N(x.N()), k0(k_lo), l0(l_lo), nk(k_hi - k_lo), nl(l_hi - l_lo), v(std::size_t(nk * nl)) {
    for (int k = k_lo; k < k_hi; ++k)
      for (int l = l_lo; l < l_hi; ++l) {
        int kk = k, ll = l;
        cplx ph = 1.0;
        while (kk >= M) {
          kk -= M;
          ph *= cis(double(ll) / N);  // x[k+M, l] = e^{j2pi l/N} x[k, l]
        }
        while (kk < 0) {
          ph *= cis(-double(ll) / N);
          kk += M;
        }
        while (ll >= N) ll -= N;
        while (ll < 0) ll += N;
        v[std::size_t((k - k0) * nl + (l - l0))] = ph * x(kk, ll);
      }
  }
  cplx operator()(int k, int l) const { return v[std::size_t((k - k0) * nl + (l - l0))]; }
};

double max_diff(std::span<const cplx> a, std::span<const cplx> b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("modulation parameters") {
  const auto p = ModulationParams::make(31, 37, 30e3);
  CHECK(p.L() == 1147);
  CHECK(p.B() == Approx(930e3));
  CHECK(p.T() == Approx(37.0 / 30e3));
  CHECK(p.tau_p == Approx(33.333333e-6));
  CHECK_THROWS_AS(ModulationParams::make(1, 5, 30e3), ConfigError);
  ModulationParams bad = p;
  bad.tau_p *= 1.001;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = p;
  bad.beta_nu = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("evaluate: quasi-periodic extension") {
  const DDSignal x = random_signal(P43, 1);
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 3; ++l) {
      CHECK(evaluate(x, k, l) == x(k, l));
      CHECK(std::abs(evaluate(x, k + 4, l) - cis(double(l) / 3) * x(k, l)) < 1e-14);
    }
  CHECK(std::abs(evaluate(x, 9, 4) - cis(2.0 * 4 / 3) * x(1, 1)) < 1e-14);

  const ExtensionTable ext(x, -12, 16, -9, 12);
  double worst = 0;
  for (int k = -12; k < 16; ++k)
    for (int l = -9; l < 12; ++l) worst = std::max(worst, std::abs(evaluate(x, k, l) - ext(k, l)));
  CHECK(worst < 1e-13);
}

TEST_CASE("evaluate: property over random shifts") {
  const auto p = ModulationParams::make(7, 5, 30e3);
  const DDSignal x = random_signal(p, 2);
  Rng rng = make_stream(3, 0);
  std::uniform_int_distribution<int> d(-40, 40), s(-6, 6);
  for (int i = 0; i < 500; ++i) {
    const int k = d(rng), l = d(rng), n = s(rng), m = s(rng);
    const cplx lhs = evaluate(x, k + n * 7, l + m * 5);
    CHECK(std::abs(lhs - cis(double(n) * l / 5) * evaluate(x, k, l)) < 1e-12);
  }
}

TEST_CASE("twisted convolution, filter on signal") {
  const DDSignal x = random_signal(P43, 4);
  SECTION("identity tap") {
    CHECK(max_diff(twisted_convolve_fs(DDFilter::unit(P43, 0, 0), x).fd(), x.fd()) == 0.0);
  }
  SECTION("single tap at (1,1)") {
    const DDSignal y = twisted_convolve_fs(DDFilter::unit(P43, 1, 1), x);
    // y[k,l] = x(k-1, l-1) e^{j2pi (k-1)/12}
    const cplx expect = evaluate(x, 2, 1) * cis(2.0 / 12);
    CHECK(std::abs(y(3, 2) - expect) < 1e-14);
    const cplx expect0 = evaluate(x, -1, -1) * cis(-1.0 / 12);
    CHECK(std::abs(y(0, 0) - expect0) < 1e-14);
  }
  SECTION("random 3-tap filter against a literal sum") {
    Rng rng = make_stream(5, 0);
    DDFilter h(P43, SupportRegion{-3, 3, -2, 2});
    h.at(-2, 1) = complex_normal(rng, 1);
    h.at(1, -2) = complex_normal(rng, 1);
    h.at(3, 2) = complex_normal(rng, 1);
    const ExtensionTable ext(x, -8, 16, -6, 12);
    const DDSignal y = twisted_convolve_fs(h, x);
    double worst = 0;
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 3; ++l) {
        cplx acc = 0;
        for (int a = -3; a <= 3; ++a)
          for (int b = -2; b <= 2; ++b) acc += h(a, b) * ext(k - a, l - b) * cis(double(b) * (k - a) / 12);
        worst = std::max(worst, std::abs(acc - y(k, l)));
      }
    CHECK(worst < 1e-12);
  }
  SECTION("parameter mismatch") {
    const auto q = ModulationParams::make(4, 5, 30e3);
    CHECK_THROWS_AS(twisted_convolve_fs(DDFilter::unit(q, 0, 0), x), ConfigError);
  }
}

TEST_CASE("twisted convolution output is quasi-periodic off the fundamental domain") {
  const DDSignal x = random_signal(P43, 6);
  const DDFilter h = random_filter(P43, 6, 4, 3);
  const DDSignal y = twisted_convolve_fs(h, x);
  const ExtensionTable ext(x, -24, 24, -18, 18);
  // literal sum evaluated outside [0,M) x [0,N) must agree with the stored extension
  double worst = 0;
  for (int k = -8; k < 12; ++k)
    for (int l = -6; l < 9; ++l) {
      cplx acc = 0;
      for (int a = -3; a <= 3; ++a)
        for (int b = -3; b <= 3; ++b)
          if (h(a, b) != cplx(0)) acc += h(a, b) * ext(k - a, l - b) * cis(double(b) * (k - a) / 12);
      worst = std::max(worst, std::abs(acc - evaluate(y, k, l)));
    }
  CHECK(worst < 1e-12);
}

TEST_CASE("twisted convolution of filters") {
  const DDFilter b = random_filter(P43, 7, 3, 2);
  SECTION("identity on the left") {
    const DDFilter c = twisted_convolve_ff(DDFilter::unit(P43, 0, 0), b);
    for (int k = -2; k <= 2; ++k)
      for (int l = -2; l <= 2; ++l) CHECK(c(k, l) == b(k, l));
  }
  SECTION("non-commutative by one phase step") {
    const auto d10 = DDFilter::unit(P43, 1, 0), d01 = DDFilter::unit(P43, 0, 1);
    const cplx ab = twisted_convolve_ff(d10, d01)(1, 1);
    const cplx ba = twisted_convolve_ff(d01, d10)(1, 1);
    CHECK(std::abs(ab - 1.0) < 1e-15);
    CHECK(std::abs(ba / ab - cis(1.0 / 12)) < 1e-14);
  }
  SECTION("associativity") {
    const DDFilter a = random_filter(P43, 8, 2, 2), c = random_filter(P43, 9, 2, 2);
    const DDFilter l = twisted_convolve_ff(twisted_convolve_ff(a, b), c);
    const DDFilter r = twisted_convolve_ff(a, twisted_convolve_ff(b, c));
    CHECK(l.box() == r.box());
    CHECK(max_diff(l.taps(), r.taps()) < 1e-12);
    const DDSignal x = random_signal(P43, 10);
    const DDSignal y1 = twisted_convolve_fs(twisted_convolve_ff(a, b), x);
    const DDSignal y2 = twisted_convolve_fs(a, twisted_convolve_fs(b, x));
    CHECK(max_diff(y1.fd(), y2.fd()) < 1e-10);
  }
  SECTION("support is the Minkowski sum") {
    const DDFilter a(P43, SupportRegion{0, 1, -1, 0});
    const DDFilter c(P43, SupportRegion{-2, 3, 1, 4});
    CHECK(twisted_convolve_ff(a, c).box() == SupportRegion{-2, 4, 0, 4});
  }
}

TEST_CASE("Zak transform pair") {
  SECTION("point pilot at origin is an impulse train") {
    const auto td = zak_inverse(point_pilot(P43, {0, 0, 0}), 1);
    for (std::size_t n = 0; n < td.samples.size(); ++n) {
      if (n % 4 == 0) CHECK(std::abs(td.samples[n]) == Approx(1.0 / std::sqrt(3.0)));
      else CHECK(std::abs(td.samples[n]) < 1e-15);
    }
  }
  SECTION("pilot at (1,2) is a pulse train modulated by a tone") {
    const auto td = zak_inverse(point_pilot(P43, {1, 2, 0}), 1);
    for (int n = 0; n < 3; ++n) CHECK(std::abs(td.samples[std::size_t(1 + 4 * n)] - cis(2.0 * n / 3) / std::sqrt(3.0)) < 1e-15);
  }
  SECTION("unitary and invertible") {
    for (auto p : {P43, ModulationParams::make(31, 37, 30e3)}) {
      const DDSignal x = random_signal(p, 11);
      const auto td = zak_inverse(x, 1);
      CHECK(td.samples.size() == std::size_t(p.L()));
      double e = 0;
      for (auto v : td.samples) e += std::norm(v);
      CHECK(std::abs(e - x.energy()) / x.energy() < 1e-12);
      CHECK(max_diff(zak_forward(td).fd(), x.fd()) < 1e-12);
    }
  }
  SECTION("forward of simple sequences") {
    TDSignal z{P43, 1, cvec(12), true};
    CHECK(zak_forward(z).energy() == 0.0);
    z.samples[0] = 1.0;
    const DDSignal x = zak_forward(z);
    for (int l = 0; l < 3; ++l) CHECK(std::abs(x(0, l) - 1.0 / std::sqrt(3.0)) < 1e-15);
    CHECK(x.energy() == Approx(1.0));
    z.Q = 2;
    CHECK_THROWS_AS(zak_forward(z), ConfigError);
  }
  SECTION("oversampling keeps the original samples and the band") {
    const auto p = ModulationParams::make(5, 3, 30e3);
    const DDSignal x = random_signal(p, 12);
    const auto t1 = zak_inverse(x, 1);
    const auto t4 = zak_inverse(x, 4);
    CHECK(t4.samples.size() == std::size_t(4 * p.L()));
    double worst = 0, e1 = 0, e4 = 0;
    for (std::size_t i = 0; i < t1.samples.size(); ++i) worst = std::max(worst, std::abs(t4.samples[4 * i] - t1.samples[i]));
    for (auto v : t1.samples) e1 += std::norm(v);
    for (auto v : t4.samples) e4 += std::norm(v);
    CHECK(worst < 1e-12);
    CHECK(e4 == Approx(4 * e1).epsilon(1e-12));  // odd length: no split Nyquist bin
    CHECK_THROWS_AS(zak_inverse(x, 0), ConfigError);
  }
}

TEST_CASE("cross-ambiguity") {
  const DDSignal x = random_signal(P43, 13);
  const SupportRegion W{-3, 3, -2, 2};
  const ExtensionTable ext(x, -16, 16, -12, 12);
  auto literal = [&](const DDSignal& y, int a, int b) {
    cplx acc = 0;
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 3; ++l) acc += y(k, l) * std::conj(ext(k - a, l - b)) * cis(-double(b) * (k - a) / 12);
    return acc;
  };
  SECTION("zero offset is the energy") {
    CHECK(std::abs(cross_ambiguity(x, x, W)(0, 0) - x.energy()) < 1e-12);
  }
  SECTION("matches the literal sum") {
    const DDSignal y = random_signal(P43, 14);
    const DDFilter A = cross_ambiguity(y, x, W);
    double worst = 0;
    for (int a = W.k_lo; a <= W.k_hi; ++a)
      for (int b = W.l_lo; b <= W.l_hi; ++b) worst = std::max(worst, std::abs(A(a, b) - literal(y, a, b)));
    CHECK(worst < 1e-12);
  }
  SECTION("a shifted copy peaks at the shift") {
    const DDSignal y = twisted_convolve_fs(DDFilter::unit(P43, 2, 1), x);
    CHECK(std::abs(cross_ambiguity(y, x, W)(2, 1) - x.energy()) < 1e-12);
  }
  SECTION("factorization A_{h*x,x} = h * A_{x,x}") {
    const DDFilter h = random_filter(P43, 15, 2, 1);
    const DDSignal y = twisted_convolve_fs(h, x);
    // right-hand side from the literal ambiguity of x, twisted by h
    double worst = 0;
    for (int a = W.k_lo; a <= W.k_hi; ++a)
      for (int b = W.l_lo; b <= W.l_hi; ++b) {
        cplx rhs = 0;
        for (int i = -1; i <= 1; ++i)
          for (int j = -1; j <= 1; ++j)
            if (h(i, j) != cplx(0)) rhs += h(i, j) * literal(x, a - i, b - j) * cis(double(j) * (a - i) / 12);
        worst = std::max(worst, std::abs(literal(y, a, b) - rhs));
        worst = std::max(worst, std::abs(cross_ambiguity(y, x, W)(a, b) - rhs));
      }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("PAPR") {
  const auto p = ModulationParams::make(31, 37, 30e3);
  CHECK(papr_db(cvec(8, cplx(0.3, -0.4))) == Approx(0.0).margin(1e-12));
  CHECK_THROWS_AS(papr_db(cvec(8)), DomainError);
  const DDSignal x = random_signal(P43, 16);
  const double a = papr_db(zak_inverse(x, 2));
  CHECK(papr_db(zak_inverse(cplx(-2.5, 7.0) * x, 2)) == Approx(a).epsilon(1e-12));
  const double point = papr_db(zak_inverse(point_pilot(p, PilotSpec::centered(p)), 4));
  CHECK(point == Approx(15.0).margin(1.0));
  const double spread = papr_db(zak_inverse(spread_pilot(p, PilotSpec::centered(p, 3)), 4));
  CHECK(spread >= 4.5);
  CHECK(spread <= 7.0);
}

TEST_CASE("filters and regions") {
  DDFilter f(P43, SupportRegion{-1, 1, 0, 2});
  CHECK(f(5, 5) == cplx(0));
  CHECK_THROWS_AS(f.at(5, 5), DomainError);
  f.at(1, 2) = 3.0;
  const DDFilter g = f - DDFilter::unit(P43, -3, 0, 1.0);
  CHECK(g.box() == SupportRegion{-3, 1, 0, 2});
  CHECK(g(1, 2) == cplx(3.0));
  CHECK(g(-3, 0) == cplx(-1.0));
  CHECK(f.restricted(SupportRegion{1, 1, 2, 2}).energy() == 9.0);
  CHECK(SupportRegion{-4, 8, -9, 9}.size() == 13u * 19u);
}
