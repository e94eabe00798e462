#include "nictl/higs.hpp"

#include <algorithm>
#include <cmath>

#include "nictl/errors.hpp"

namespace nictl {

HigsParams::HigsParams(double omega_h_, double k_h_) : omega_h(omega_h_), k_h(k_h_) {
  if (!std::isfinite(omega_h) || omega_h < 0.0) throw PreconditionViolation("HIGS requires omega_h >= 0");
  if (!std::isfinite(k_h) || k_h <= 0.0) throw PreconditionViolation("HIGS requires k_h > 0");
}

HigsIrcParams::HigsIrcParams(double omega_h, double k_h, double D) : omega_h_(omega_h), k_h_(k_h), D_(D) {
  if (!std::isfinite(omega_h) || omega_h < 0.0) throw PreconditionViolation("HIGS-IRC requires omega_h >= 0");
  if (!std::isfinite(k_h) || k_h <= 0.0) throw PreconditionViolation("HIGS-IRC requires k_h > 0");
  if (!std::isfinite(D) || D >= 0.0) throw PreconditionViolation("HIGS-IRC requires D < 0");
  kappa_tilde_ = k_h / (1.0 - k_h * D);
}

bool sector_contains(double e, double u, double k, double tol) {
  if (!(k > 0.0)) throw PreconditionViolation("sector bound k must be positive");
  return e * u >= u * u / k - tol;
}

double sector_violation(double e, double u, double k) {
  if (!(k > 0.0)) throw PreconditionViolation("sector bound k must be positive");
  const double lhs = e * u;
  const double rhs = u * u / k;
  const double gap = rhs - lhs;
  if (gap <= 0.0) return 0.0;
  return gap / std::max({1.0, std::abs(lhs), rhs});
}

namespace {

bool on_boundary(double x_h, double target, double tol) {
  return std::abs(x_h - target) <= tol * std::max(1.0, std::abs(x_h));
}

}  // namespace

HigsMode determine_mode_base(double e, double e_dot, double x_h, const HigsParams& p, double tol) {
  if (on_boundary(x_h, p.k_h * e, tol) && p.omega_h * e * e > p.k_h * e * e_dot) return HigsMode::Gain;
  return HigsMode::Integrator;
}

HigsMode determine_mode_irc(double e_tilde, double e_tilde_dot, double x_h, const HigsIrcParams& p, double tol) {
  if (on_boundary(x_h, p.kappa_tilde() * e_tilde, tol) &&
      p.omega_h() * e_tilde * e_tilde > p.k_h() * e_tilde * e_tilde_dot)
    return HigsMode::Gain;
  return HigsMode::Integrator;
}

double higs_irc_derivative(double x_h, double e_tilde, const HigsIrcParams& p) {
  return p.omega_h() * p.D() * x_h + p.omega_h() * e_tilde;
}

double higs_irc_gain_output(double e_tilde, const HigsIrcParams& p) { return p.kappa_tilde() * e_tilde; }

double storage_V_h(double x_h, const HigsIrcParams& p) { return x_h * x_h / (2.0 * p.kappa_tilde()); }

double storage_V1(double x_h1, const HigsParams& p) { return x_h1 * x_h1 / (2.0 * p.k_h); }

HigsCascade::HigsCascade(HigsParams h2, HigsParams h3) : h2_(h2), h3_(h3) {
  if (h2_.k_h != h3_.k_h) throw CascadeAssumptionViolated("cascade requires k_h2 == k_h3");
  if (!(h2_.omega_h < h3_.omega_h)) throw CascadeAssumptionViolated("cascade requires omega_h2 < omega_h3");
}

double storage_V2_cascade(double x_h2, double /*x_h3*/) { return 0.5 * x_h2 * x_h2; }

double project_to_sector(double e, double x_h, double k_bound, double tol) {
  if (sector_contains(e, x_h, k_bound, tol)) return x_h;
  const double edge = k_bound * e;
  return std::clamp(x_h, std::min(0.0, edge), std::max(0.0, edge));
}

InputSignal with_central_difference(std::function<double(double)> value, double h) {
  if (!(h > 0.0)) throw PreconditionViolation("finite-difference step must be positive");
  InputSignal s;
  s.rate = [value, h](double t) { return (value(t + h) - value(t - h)) / (2.0 * h); };
  s.value = std::move(value);
  return s;
}

namespace {

template <class Flow, class ModeFn>
std::vector<DrivenSample> drive(const InputSignal& input, double x0, double dt, double t_end, double gain,
                                Flow flow, ModeFn mode_of) {
  if (!(dt > 0.0) || !(t_end >= dt)) throw PreconditionViolation("need dt > 0 and t_end >= dt");
  if (!input.value || !input.rate) throw PreconditionViolation("input signal needs value and rate");
  const auto steps = static_cast<long>(std::llround(t_end / dt));
  std::vector<DrivenSample> out;
  out.reserve(static_cast<std::size_t>(steps + 1));

  double x = project_to_sector(input.value(0.0), x0, gain);
  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double e = input.value(t);
    const double ed = input.rate(t);
    const HigsMode mode = mode_of(e, ed, x);
    out.push_back({t, e, ed, x, mode});
    if (k == steps) break;

    const double t1 = static_cast<double>(k + 1) * dt;
    const double e1 = input.value(t1);
    if (mode == HigsMode::Gain) {
      x = gain * e1;
    } else {
      const double em = input.value(t + 0.5 * dt);
      const double k1 = flow(x, e);
      const double k2 = flow(x + 0.5 * dt * k1, em);
      const double k3 = flow(x + 0.5 * dt * k2, em);
      const double k4 = flow(x + dt * k3, e1);
      x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    x = project_to_sector(e1, x, gain);
  }
  return out;
}

}  // namespace

std::vector<DrivenSample> drive_higs(const HigsParams& p, const InputSignal& input, double x0, double dt,
                                     double t_end, double tol) {
  return drive(
      input, x0, dt, t_end, p.k_h, [&](double, double e) { return p.omega_h * e; },
      [&](double e, double ed, double x) { return determine_mode_base(e, ed, x, p, tol); });
}

std::vector<DrivenSample> drive_higs_irc(const HigsIrcParams& p, const InputSignal& input, double x0, double dt,
                                         double t_end, double tol) {
  return drive(
      input, x0, dt, t_end, p.kappa_tilde(), [&](double x, double e) { return higs_irc_derivative(x, e, p); },
      [&](double e, double ed, double x) { return determine_mode_irc(e, ed, x, p, tol); });
}

}  // namespace nictl
