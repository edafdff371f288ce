#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace zakotfs {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;

inline constexpr double pi = std::numbers::pi;

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ModeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// floor-division helpers for negative indices
inline constexpr long long floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}
inline constexpr long long pmod(long long a, long long b) {
  long long r = a % b;
  return r < 0 ? r + b : r;
}

struct ModulationParams {
  int M = 31;
  int N = 37;
  double nu_p = 30e3;
  double tau_p = 1.0 / 30e3;
  double beta_tau = 0.6;
  double beta_nu = 0.6;

  static ModulationParams make(int M, int N, double nu_p, double beta_tau = 0.6,
                               double beta_nu = 0.6) {
    ModulationParams p{M, N, nu_p, 1.0 / nu_p, beta_tau, beta_nu};
    p.validate();
    return p;
  }

  int L() const { return M * N; }
  double B() const { return M * nu_p; }
  double T() const { return N * tau_p; }
  double dtau() const { return tau_p / M; }
  double dnu() const { return nu_p / N; }

  void validate() const {
    if (M < 2 || N < 2) throw ConfigError("M and N must be at least 2");
    if (!(nu_p > 0) || !(tau_p > 0)) throw ConfigError("periods must be positive");
    if (std::abs(tau_p * nu_p - 1.0) > 1e-12)
      throw ConfigError("tau_p * nu_p must equal 1");
    if (!(beta_tau >= 0 && beta_tau <= 1) || !(beta_nu >= 0 && beta_nu <= 1))
      throw ConfigError("roll-off must lie in [0,1]");
  }

  bool operator==(const ModulationParams& o) const {
    return M == o.M && N == o.N && nu_p == o.nu_p && tau_p == o.tau_p &&
           beta_tau == o.beta_tau && beta_nu == o.beta_nu;
  }
};

inline void require_same(const ModulationParams& a, const ModulationParams& b) {
  if (!(a == b)) throw ConfigError("modulation parameter mismatch");
}

// table of exp(j 2 pi m / n) for m in [0, n)
class Twiddle {
 public:
  explicit Twiddle(long long n) : n_(n), w_(static_cast<std::size_t>(n)) {
    for (long long m = 0; m < n; ++m) w_[m] = std::polar(1.0, 2.0 * pi * double(m) / double(n));
  }
  cplx operator()(long long m) const { return w_[static_cast<std::size_t>(pmod(m, n_))]; }
  // m already reduced to [0, n)
  cplx operator[](long long m) const { return w_[static_cast<std::size_t>(m)]; }
  long long size() const { return n_; }

 private:
  long long n_;
  cvec w_;
};

inline double db10(double x) { return 10.0 * std::log10(x); }
inline double undb10(double x) { return std::pow(10.0, x / 10.0); }

}  // namespace zakotfs
