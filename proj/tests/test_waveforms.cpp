#include "catch_amalgamated.hpp"
#include "zakotfs/zakotfs.hpp"

using namespace zakotfs;
using Catch::Approx;

namespace {

const ModulationParams P43 = ModulationParams::make(4, 3, 30e3);
const ModulationParams P = ModulationParams::make(31, 37, 30e3);

Bits random_bits(const ModulationParams& p, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0, 8);
  Bits b(2 * std::size_t(p.L()));
  std::bernoulli_distribution coin(0.5);
  for (auto& v : b) v = coin(rng);
  return b;
}

cplx cis(double turns) { return std::polar(1.0, 2.0 * pi * turns); }

}  // namespace

TEST_CASE("4-QAM mapping") {
  Bits b(24, 0);
  const auto g = map_bits_to_symbols(P43, b);
  const cplx corner = cplx(1, 1) / std::sqrt(2.0);
  for (auto v : g.x) CHECK(std::abs(v - corner) < 1e-15);
  double e = 0;
  for (auto v : g.x) e += std::norm(v);
  CHECK(e == Approx(12.0));

  b[0] = 1;  // first bit drives the real part
  b[3] = 1;  // second symbol, imaginary part
  const auto h = map_bits_to_symbols(P43, b);
  CHECK(std::abs(h.x[0] - cplx(-1, 1) / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(h.x[1] - cplx(1, -1) / std::sqrt(2.0)) < 1e-15);

  const Bits r = random_bits(P, 1);
  const auto sym = map_bits_to_symbols(P, r);
  CHECK(demap_symbols(P, sym.x).bits == r);
  CHECK_THROWS_AS(map_bits_to_symbols(P43, Bits(23)), ConfigError);
}

TEST_CASE("demapping decides per quadrant") {
  cvec soft(12, cplx(0.2, -3.0));
  soft[1] = cplx(0.0, 0.0);
  soft[2] = cplx(-1e-9, 1e-9);
  const auto d = demap_symbols(P43, soft);
  CHECK(d.bits[0] == 0);
  CHECK(d.bits[1] == 1);
  CHECK(d.bits[2] == 0);  // ties go to the positive side
  CHECK(d.bits[3] == 0);
  CHECK(d.bits[4] == 1);
  CHECK(d.bits[5] == 0);
  CHECK_THROWS_AS(demap_symbols(P43, cvec(5)), ConfigError);
}

TEST_CASE("data signal") {
  SECTION("one symbol of amplitude sqrt(MN) is the point pilot") {
    SymbolGrid g{P43, cvec(12)};
    g.x[0] = std::sqrt(12.0);
    const DDSignal d = data_signal(g);
    const DDSignal pp = point_pilot(P43, {0, 0, 0});
    for (std::size_t i = 0; i < 12; ++i) CHECK(std::abs(d.fd()[i] - pp.fd()[i]) < 1e-15);
  }
  SECTION("direct normalization equals taps applied to the pulsone") {
    const auto g = map_bits_to_symbols(P43, random_bits(P43, 2));
    DDFilter taps(P43, SupportRegion{0, 3, 0, 2});
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 3; ++l) taps.at(k, l) = g(k, l);
    const DDSignal pulsone = (1.0 / std::sqrt(12.0)) * point_pilot(P43, {0, 0, 0});
    const DDSignal a = data_signal(g), b = twisted_convolve_fs(taps, pulsone);
    for (std::size_t i = 0; i < 12; ++i) CHECK(std::abs(a.fd()[i] - b.fd()[i]) < 1e-12);
  }
  SECTION("unit energy for 4-QAM") {
    CHECK(std::abs(data_signal(map_bits_to_symbols(P, random_bits(P, 3))).energy() - 1.0) < 1e-12);
  }
}

TEST_CASE("point pilot") {
  const DDSignal a = point_pilot(P43, {0, 0, 0});
  CHECK(a(0, 0) == cplx(1.0));
  CHECK(evaluate(a, 4, 0) == cplx(1.0));
  CHECK(a.energy() == 1.0);
  const DDSignal b = point_pilot(P43, {2, 1, 0});
  CHECK(std::abs(evaluate(b, 6, 1) - cis(1.0 / 3)) < 1e-15);
  CHECK(std::abs(evaluate(b, 2 - 8, 1 + 3) - cis(-2.0 / 3)) < 1e-15);
  CHECK_THROWS_AS(point_pilot(P43, {4, 0, 0}), ConfigError);
  CHECK_THROWS_AS(point_pilot(P43, {0, -1, 0}), ConfigError);
}

TEST_CASE("chirp spreading filter") {
  SECTION("raw taps follow the quadratic phase") {
    const DDFilter w = detail::raw_chirp(P, 3, ChirpSupport::FundamentalDomain);
    CHECK(std::arg(w(1, 1)) == Approx(2 * pi * 6.0 / 1147).epsilon(1e-12));
    CHECK(std::abs(w(1, 1)) == Approx(1.0 / 1147));
    CHECK(std::arg(w(5, 7)) == Approx(std::remainder(2 * pi * 3.0 * 74 / 1147, 2 * pi)).epsilon(1e-12));
  }
  SECTION("constant modulus") {
    for (auto sup : {ChirpSupport::FullPeriod, ChirpSupport::FundamentalDomain}) {
      const DDFilter w = chirp_filter(P43, 3, sup);
      const double m0 = std::abs(w.taps()[0]);
      for (auto v : w.taps()) CHECK(std::abs(v) == Approx(m0).epsilon(1e-12));
    }
  }
  SECTION("q = 0 on the fundamental domain") {
    const DDFilter w = chirp_filter(P, 0, ChirpSupport::FundamentalDomain);
    for (auto v : w.taps()) CHECK(std::abs(v - 1.0 / std::sqrt(1147.0)) < 1e-14);
  }
}

TEST_CASE("spread pilot") {
  SECTION("unit energy for any slope") {
    for (int q : {0, 1, 2, 3, 5, 11})
      for (auto sup : {ChirpSupport::FullPeriod, ChirpSupport::FundamentalDomain})
        CHECK(spread_pilot(P, {4, 9, q}, sup).energy() == Approx(1.0).epsilon(1e-12));
  }
  SECTION("q = 0 at the origin spreads evenly over the fundamental domain") {
    const DDSignal x = spread_pilot(P, {0, 0, 0}, ChirpSupport::FundamentalDomain);
    for (auto v : x.fd()) CHECK(std::abs(v) == Approx(1.0 / std::sqrt(1147.0)).epsilon(1e-12));
  }
  SECTION("magnitude is flat across the grid") {
    for (auto sup : {ChirpSupport::FullPeriod, ChirpSupport::FundamentalDomain}) {
      const DDSignal x = spread_pilot(P, PilotSpec::centered(P, 3), sup);
      double lo = 1e9, hi = 0;
      for (auto v : x.fd()) {
        lo = std::min(lo, std::abs(v));
        hi = std::max(hi, std::abs(v));
      }
      CHECK((hi - lo) / hi < 0.10);
    }
  }
  SECTION("equals the chirp filter acting on the point pilot") {
    const PilotSpec s{5, 11, 3};
    const DDSignal a = spread_pilot(P, s);
    DDSignal b = twisted_convolve_fs(chirp_filter(P, 3), point_pilot(P, s));
    b *= 1.0 / std::sqrt(b.energy());
    double worst = 0;
    for (std::size_t i = 0; i < a.fd().size(); ++i) worst = std::max(worst, std::abs(a.fd()[i] - b.fd()[i]));
    CHECK(worst < 1e-12);
  }
  SECTION("self-ambiguity is clean inside the estimation window") {
    const DDSignal x = spread_pilot(P, PilotSpec::centered(P, 3));
    const SupportRegion S = default_support(P, 2.51e-6, 6000, 1);
    const SupportRegion D{-(S.nk() - 1), S.nk() - 1, -(S.nl() - 1), S.nl() - 1};
    const DDFilter A = cross_ambiguity(x, x, D);
    CHECK(std::abs(A(0, 0) - 1.0) < 1e-12);
    double side = 0;
    for (int k = D.k_lo; k <= D.k_hi; ++k)
      for (int l = D.l_lo; l <= D.l_hi; ++l)
        if (k || l) side = std::max(side, std::abs(A(k, l)));
    CHECK(side < 0.05);
  }
}

TEST_CASE("subframe composition") {
  const DDSignal d = data_signal(map_bits_to_symbols(P43, random_bits(P43, 4)));
  const DDSignal s = spread_pilot(P43, {1, 1, 1});
  const DDSignal pilot_only = compose_subframe(d, s, {0.0, 4.0, {1, 1, 1}});
  for (std::size_t i = 0; i < 12; ++i) CHECK(std::abs(pilot_only.fd()[i] - 2.0 * s.fd()[i]) < 1e-15);
  const DDSignal both = compose_subframe(d, s, {2.0, 3.0, {1, 1, 1}});
  for (std::size_t i = 0; i < 12; ++i)
    CHECK(std::abs(both.fd()[i] - (std::sqrt(2.0) * d.fd()[i] + std::sqrt(3.0) * s.fd()[i])) < 1e-15);
  CHECK_THROWS_AS(compose_subframe(d, s, {0.0, 0.0, {}}), ConfigError);
  CHECK_THROWS_AS(compose_subframe(d, spread_pilot(ModulationParams::make(4, 5, 30e3), {0, 0, 1}), {1, 1, {}}),
                  ConfigError);
  CHECK(SubframeSpec{1.0, 10.0, {}}.pdr_db() == Approx(10.0));
}
