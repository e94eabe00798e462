#pragma once

#include <functional>
#include <vector>

namespace nictl {

/// Base HIGS parameters: integrator frequency omega_h >= 0 [rad/s], gain k_h > 0.
struct HigsParams {
  HigsParams(double omega_h, double k_h);

  double omega_h;
  double k_h;
};

/// HIGS-based IRC element: a HIGS in positive feedback with the feedthrough D < 0.
class HigsIrcParams {
 public:
  HigsIrcParams(double omega_h, double k_h, double D);

  double omega_h() const { return omega_h_; }
  double k_h() const { return k_h_; }
  double D() const { return D_; }
  /// Effective gain-mode gain k_h / (1 - k_h D), always in (0, k_h).
  double kappa_tilde() const { return kappa_tilde_; }

 private:
  double omega_h_;
  double k_h_;
  double D_;
  double kappa_tilde_;
};

enum class HigsMode : int { Integrator = 0, Gain = 1 };

struct HybridState {
  double x_h = 0.0;
  HigsMode mode = HigsMode::Integrator;
  double last_switch_time = 0.0;
};

/// Relative tolerance of the "u = k e" boundary test, scaled by max(1, |x_h|).
inline constexpr double kDefaultBoundaryTol = 1e-9;

/// e u >= u^2 / k - tol
bool sector_contains(double e, double u, double k, double tol = 0.0);

/// Relative sector violation max(0, u^2/k - e u) / max(1, |e u|, u^2/k); zero inside the sector.
double sector_violation(double e, double u, double k);

/// Gain iff x_h sits on the boundary k_h e and omega_h e^2 > k_h e e_dot; Integrator otherwise.
HigsMode determine_mode_base(double e, double e_dot, double x_h, const HigsParams& p,
                             double tol = kDefaultBoundaryTol);

/// Same predicate for the IRC element: boundary kappa_tilde e, inequality with k_h.
HigsMode determine_mode_irc(double e_tilde, double e_tilde_dot, double x_h, const HigsIrcParams& p,
                            double tol = kDefaultBoundaryTol);

/// Integrator-mode flow omega_h D x_h + omega_h e_tilde.
double higs_irc_derivative(double x_h, double e_tilde, const HigsIrcParams& p);

/// Gain-mode output kappa_tilde e_tilde.
double higs_irc_gain_output(double e_tilde, const HigsIrcParams& p);

/// V_h = x_h^2 / (2 kappa_tilde)
double storage_V_h(double x_h, const HigsIrcParams& p);

/// V_1 = x_h1^2 / (2 k_h1)
double storage_V1(double x_h1, const HigsParams& p);

/// Serial cascade H3 after H2. Construction enforces k_h2 == k_h3 and omega_h2 < omega_h3.
class HigsCascade {
 public:
  HigsCascade(HigsParams h2, HigsParams h3);
  const HigsParams& h2() const { return h2_; }
  const HigsParams& h3() const { return h3_; }

 private:
  HigsParams h2_;
  HigsParams h3_;
};

/// V_2 = x_h2^2 / 2. Only positive semidefinite: x_h3 does not appear.
double storage_V2_cascade(double x_h2, double x_h3);

/// Nearest point of the sector interval [min(0, k e), max(0, k e)] to x_h.
/// Returns x_h unchanged if the sector inequality already holds within tol.
double project_to_sector(double e, double x_h, double k_bound, double tol = 0.0);

/// Input signal for driving a standalone element. The caller supplies e and its derivative.
struct InputSignal {
  std::function<double(double)> value;
  std::function<double(double)> rate;
};

/// Signal whose rate is a central finite difference of `value` with step h.
InputSignal with_central_difference(std::function<double(double)> value, double h);

struct DrivenSample {
  double t = 0.0;
  double e = 0.0;
  double e_dot = 0.0;
  double x_h = 0.0;
  HigsMode mode = HigsMode::Integrator;
};

/// Open-loop stepping of a base HIGS with the mode frozen per step (RK4 in integrator mode,
/// algebraic x_h = k_h e in gain mode, sector projection after each step).
std::vector<DrivenSample> drive_higs(const HigsParams& p, const InputSignal& input, double x0, double dt,
                                     double t_end, double tol = kDefaultBoundaryTol);

/// Same stepping scheme for the HIGS-based IRC element driven by e_tilde.
std::vector<DrivenSample> drive_higs_irc(const HigsIrcParams& p, const InputSignal& input, double x0, double dt,
                                         double t_end, double tol = kDefaultBoundaryTol);

}  // namespace nictl
