#include "nictl/controllers.hpp"

#include <cmath>
#include <limits>

#include "nictl/errors.hpp"

namespace nictl {

IrcParams::IrcParams(double Gamma_, double D_) : Gamma(Gamma_), D(D_) {
  if (!std::isfinite(Gamma) || Gamma <= 0.0) throw PreconditionViolation("IRC requires Gamma > 0");
  if (!std::isfinite(D) || D >= 0.0) throw PreconditionViolation("IRC requires D < 0");
}

Pii2Params::Pii2Params(double k_p_, double k1_, double k2_, double D_) : k_p(k_p_), k1(k1_), k2(k2_), D(D_) {
  for (double g : {k_p, k1, k2})
    if (!std::isfinite(g) || g <= 0.0) throw PreconditionViolation("PII2RC requires k_p, k1, k2 > 0");
  if (!std::isfinite(D) || D >= 0.0) throw PreconditionViolation("PII2RC requires D < 0");
}

HigsPii2Params::HigsPii2Params(double k_p, double D, HigsParams h1, HigsParams h2, HigsParams h3)
    : k_p_(k_p), D_(D), h1_(h1), cascade_(h2, h3) {
  if (!std::isfinite(k_p) || k_p <= 0.0) throw PreconditionViolation("HIGS-PII2 requires k_p > 0");
  if (!std::isfinite(D) || D >= 0.0) throw PreconditionViolation("HIGS-PII2 requires D < 0");
  gamma_ = 1.0 / (1.0 - D_ * k_p_);
}

RationalTF irc_tf(const IrcParams& p) { return RationalTF({p.Gamma}, {1.0, -p.Gamma * p.D}); }

RationalTF pii2rc_tf(const Pii2Params& p) {
  return RationalTF({p.k_p, p.k1, p.k2}, {1.0 - p.k_p * p.D, -p.k1 * p.D, -p.k2 * p.D});
}

double pii2rc_sni_value(double omega, const Pii2Params& p) {
  if (!(omega > 0.0) || !std::isfinite(omega)) throw PreconditionViolation("omega must be positive");
  const double a = (1.0 - p.k_p * p.D) * omega * omega + p.k2 * p.D;
  const double b = p.k1 * p.D * omega;
  return 2.0 * p.k1 * omega * omega * omega / (a * a + b * b);
}

StabilityVerdict check_irc_stability(const StateSpace& plant, double kappa_tilde) {
  StabilityVerdict v;
  v.dc_gain = dc_gain(plant);
  v.loop_value = kappa_tilde * v.dc_gain;
  v.margin = 1.0 - v.loop_value;
  v.pass = v.loop_value < 1.0;
  v.condition = "kappa_tilde * G(0) < 1";
  return v;
}

StabilityVerdict check_pii2_stability(const StateSpace& plant, double D) {
  StabilityVerdict v;
  v.dc_gain = dc_gain(plant);
  v.loop_value = D;
  v.margin = -v.dc_gain - D;
  v.pass = D < -v.dc_gain;
  v.condition = "D < -G(0)";
  return v;
}

double gain_sum_clearance(const StateSpace& plant, const HigsPii2Params& p) {
  const double s = dc_gain(plant) + p.D();
  if (s == 0.0) return std::numeric_limits<double>::infinity();
  const double k2 = p.h2().k_h;
  return std::abs(p.h1().k_h + k2 * k2 + p.k_p() - 1.0 / s);
}

Pii2LoopSignals resolve_pii2_error_signal(double y, double x_h1, double x_h2, double x_h3, const ModeTriple& modes,
                                          const HigsPii2Params& p) {
  const bool g1 = modes[0] == HigsMode::Gain;
  const bool g2 = modes[1] == HigsMode::Gain;
  const bool g3 = modes[2] == HigsMode::Gain;
  const double k1 = p.h1().k_h;
  const double k2 = p.h2().k_h;
  const double k3 = p.h3().k_h;

  // x_h1 + x_h3 = a + b e
  double a = 0.0;
  double b = 0.0;
  if (g1) b += k1; else a += x_h1;
  const double a2 = g2 ? 0.0 : x_h2;
  const double b2 = g2 ? k2 : 0.0;
  if (g3) { a += k3 * a2; b += k3 * b2; } else { a += x_h3; }

  const double gamma = p.gamma();
  const double denom = 1.0 - gamma * p.D() * b;
  if (!(denom > 1e-12)) throw UnsolvableLoop("algebraic loop denominator vanished");

  Pii2LoopSignals s;
  s.e = gamma * (y + p.D() * a) / denom;
  s.x_h1 = g1 ? k1 * s.e : x_h1;
  s.x_h2 = g2 ? k2 * s.e : x_h2;
  s.x_h3 = g3 ? k3 * s.x_h2 : x_h3;
  s.u = s.x_h1 + s.x_h3 + p.k_p() * s.e;
  return s;
}

Pii2Rates pii2_rates(double y_dot, const Pii2LoopSignals& sig, const ModeTriple& modes, const HigsPii2Params& p) {
  const bool g1 = modes[0] == HigsMode::Gain;
  const bool g2 = modes[1] == HigsMode::Gain;
  const bool g3 = modes[2] == HigsMode::Gain;
  const double k1 = p.h1().k_h;
  const double k2 = p.h2().k_h;
  const double k3 = p.h3().k_h;

  // x_h1_dot + x_h3_dot = c0 + c1 e_dot
  double c0 = 0.0;
  double c1 = 0.0;
  if (g1) c1 += k1; else c0 += p.h1().omega_h * sig.e;
  const double r2a = g2 ? 0.0 : p.h2().omega_h * sig.e;
  const double r2b = g2 ? k2 : 0.0;
  if (g3) { c0 += k3 * r2a; c1 += k3 * r2b; } else { c0 += p.h3().omega_h * sig.x_h2; }

  const double gamma = p.gamma();
  const double denom = 1.0 - gamma * p.D() * c1;
  if (!(denom > 1e-12)) throw UnsolvableLoop("rate equation denominator vanished");

  Pii2Rates r;
  r.e_dot = gamma * (y_dot + p.D() * c0) / denom;
  r.x_h1_dot = g1 ? k1 * r.e_dot : p.h1().omega_h * sig.e;
  r.x_h2_dot = r2a + r2b * r.e_dot;
  r.x_h3_dot = g3 ? k3 * r.x_h2_dot : p.h3().omega_h * sig.x_h2;
  return r;
}

ModeTriple higs_pii2_mode_update(double e, double e_dot, double x_h1, double x_h2, double x_h3,
                                 const HigsPii2Params& p, double tol) {
  ModeTriple m{};
  m[0] = determine_mode_base(e, e_dot, x_h1, p.h1(), tol);
  m[1] = determine_mode_base(e, e_dot, x_h2, p.h2(), tol);
  const double e3_dot = m[1] == HigsMode::Gain ? p.h2().k_h * e_dot : p.h2().omega_h * e;
  m[2] = determine_mode_base(x_h2, e3_dot, x_h3, p.h3(), tol);
  return m;
}

}  // namespace nictl
