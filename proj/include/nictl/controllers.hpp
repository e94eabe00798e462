#pragma once

#include <array>
#include <string>

#include "nictl/higs.hpp"
#include "nictl/lti.hpp"

namespace nictl {

/// Linear IRC: integrator Gamma/s in positive feedback with G(s) + D.
struct IrcParams {
  IrcParams(double Gamma, double D);
  double Gamma;
  double D;
};

/// PII^2 resonant controller: C(s) = k_p + k1/s + k2/s^2 in place of the IRC integrator.
struct Pii2Params {
  Pii2Params(double k_p, double k1, double k2, double D);
  double k_p;
  double k1;
  double k2;
  double D;
};

/// HIGS-based PII^2 controller: H1 in parallel with the cascade H2 -> H3 and the gain k_p.
class HigsPii2Params {
 public:
  HigsPii2Params(double k_p, double D, HigsParams h1, HigsParams h2, HigsParams h3);

  double k_p() const { return k_p_; }
  double D() const { return D_; }
  const HigsParams& h1() const { return h1_; }
  const HigsParams& h2() const { return cascade_.h2(); }
  const HigsParams& h3() const { return cascade_.h3(); }
  /// 1 / (1 - D k_p)
  double gamma() const { return gamma_; }

 private:
  double k_p_;
  double D_;
  HigsParams h1_;
  HigsCascade cascade_;
  double gamma_;
};

/// Modes of H1, H2, H3 in that order.
using ModeTriple = std::array<HigsMode, 3>;

RationalTF irc_tf(const IrcParams& p);
RationalTF pii2rc_tf(const Pii2Params& p);

/// Closed-form j[K(jw) - K(-jw)] of the PII^2RC.
double pii2rc_sni_value(double omega, const Pii2Params& p);

struct StabilityVerdict {
  bool pass = false;
  double dc_gain = 0.0;     ///< G(0) of the plant
  double loop_value = 0.0;  ///< the quantity compared against its bound
  double margin = 0.0;      ///< positive iff the strict condition holds
  std::string condition;
};

/// kappa_tilde G(0) < 1; margin = 1 - kappa_tilde G(0).
StabilityVerdict check_irc_stability(const StateSpace& plant, double kappa_tilde);

/// D < -G(0); margin = -G(0) - D.
StabilityVerdict check_pii2_stability(const StateSpace& plant, double D);

/// k_h1 + k_h2^2 + k_p != 1 / (G(0) + D). Returns the distance to the excluded value
/// (infinity when G(0) + D = 0).
double gain_sum_clearance(const StateSpace& plant, const HigsPii2Params& p);

struct Pii2LoopSignals {
  double e = 0.0;
  double u = 0.0;
  /// Element outputs after gain-mode substitution.
  double x_h1 = 0.0;
  double x_h2 = 0.0;
  double x_h3 = 0.0;
};

/// Solves e = gamma y + gamma D (x_h1 + x_h3) with gain-mode elements replaced by their
/// algebraic outputs (H1: k_h1 e, H2: k_h2 e, H3: k_h3 x_h2), then u = x_h1 + x_h3 + k_p e.
Pii2LoopSignals resolve_pii2_error_signal(double y, double x_h1, double x_h2, double x_h3, const ModeTriple& modes,
                                          const HigsPii2Params& p);

/// Element input rates for a given mode triple: e_dot, and x_h2_dot which drives H3.
struct Pii2Rates {
  double e_dot = 0.0;
  double x_h1_dot = 0.0;
  double x_h2_dot = 0.0;
  double x_h3_dot = 0.0;
};

/// Analytic derivative of the loop signals: e_dot = gamma (y_dot + D (x_h1_dot + x_h3_dot)),
/// where the gain-mode rates depend on e_dot and are solved in closed form.
Pii2Rates pii2_rates(double y_dot, const Pii2LoopSignals& sig, const ModeTriple& modes, const HigsPii2Params& p);

/// Applies the base mode predicate per element, with e1 = e2 = e and e3 = x_h2;
/// H3's input rate comes from H2's newly selected mode.
ModeTriple higs_pii2_mode_update(double e, double e_dot, double x_h1, double x_h2, double x_h3,
                                 const HigsPii2Params& p, double tol = kDefaultBoundaryTol);

}  // namespace nictl
