#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include "nictl/lti.hpp"

namespace nictl::test {

// Fixed seed for every randomized sweep.
inline constexpr std::uint64_t kSeed = 20240917;

// Undamped mass-spring plant 1/(s^2 + 1).
inline StateSpace mass_spring() {
  Matrix A(2, 2);
  A << 0, 1, -1, 0;
  Vector B(2);
  B << 0, 1;
  RowVector C(2);
  C << 1, 0;
  return StateSpace(A, B, C);
}

inline std::string scenario(const std::string& file) { return std::string(NICTL_SCENARIO_DIR) + "/" + file; }

// Horner evaluation in plain complex arithmetic, kept separate from the library's polyval.
inline std::complex<double> horner(const std::vector<double>& c, std::complex<double> s) {
  std::complex<double> acc = 0.0;
  for (double a : c) acc = acc * s + a;
  return acc;
}

// j[K(jw) - K(jw)^*] for K = C / (1 - C D), C(s) = k_p + k1/s + k2/s^2, evaluated from the raw
// parameters in quad precision. Near-real K(jw) cancels most digits of Im K in double arithmetic,
// and rounding the polynomial coefficients first is already enough to lose them.
inline double pii2_index_quad(double k_p, double k1, double k2, double D, double w) {
  using q = __float128;
  const q qw = w;
  const q cr = q(k_p) - q(k2) / (qw * qw);  // C(jw) = k_p + k1/(jw) - k2/w^2
  const q ci = -q(k1) / qw;
  const q dr = 1 - q(D) * cr;
  const q di = -q(D) * ci;
  const q den = dr * dr + di * di;
  const q ki = (ci * dr - cr * di) / den;
  return static_cast<double>(-2 * ki);  // j (K - K^*) = j (2 j Im K)
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::max(std::abs(a), std::abs(b))); }

inline double rel_err(std::complex<double> a, std::complex<double> b) {
  return std::abs(a - b) / std::max(1e-300, std::max(std::abs(a), std::abs(b)));
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

}  // namespace nictl::test
