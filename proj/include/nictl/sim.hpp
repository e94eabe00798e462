#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nictl/controllers.hpp"
#include "nictl/higs.hpp"
#include "nictl/lti.hpp"

namespace nictl {

struct SimTolerances {
  double boundary_rel = kDefaultBoundaryTol;  ///< "x_h on the gain line" test
  double divergence = 1e9;                    ///< |state| above this aborts with NonFiniteState
};

struct SimConfig {
  double dt = 1e-3;
  double t_end = 10.0;
  Vector x0;
  std::vector<double> controller_x0;  ///< empty means zeros
  double r = 0.0;                     ///< constant reference
  int record_every = 1;
  SimTolerances tolerances;

  /// Throws PreconditionViolation on dt <= 0, t_end < dt, or record_every < 1.
  void validate() const;
  long steps() const;
};

/// Recorded closed-loop run. `storage` and `lyapunov` are either empty or one value per sample.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> plant_states;
  std::vector<std::vector<double>> controller_states;
  std::vector<std::vector<int>> modes;  ///< HigsMode codes per element (empty rows for linear loops)
  std::vector<double> e;                ///< controller input (e_tilde for the HIGS-IRC loop)
  std::vector<double> u;
  std::vector<double> y;
  std::vector<double> storage;   ///< controller storage function
  std::vector<double> lyapunov;  ///< closed-loop W, when a certificate was supplied
  std::vector<std::string> controller_labels;

  std::size_t size() const { return times.size(); }
  /// Full closed-loop state (plant then controller) at sample k.
  Vector joint_state(std::size_t k) const;
};

/// W(x, x_h) = 1/2 [x; x_h]^T [[Y^{-1}, -C^T], [-C, 1/kappa_tilde]] [x; x_h]
class LyapunovIrcCertificate {
 public:
  LyapunovIrcCertificate(const Matrix& Y, const RowVector& C, double kappa_tilde);
  const Matrix& matrix() const { return M_; }
  /// kappa_tilde C Y C^T < 1 (Schur complement of the Y^{-1} block), given Y > 0.
  bool positive_definite() const { return pd_; }
  double schur_margin() const { return schur_margin_; }

 private:
  Matrix M_;
  bool pd_ = false;
  double schur_margin_ = 0.0;
};

double lyapunov_W_irc(const Vector& x, double x_h, const LyapunovIrcCertificate& cert);

/// W(x, x_h1, x_h2, x_h3) = 1/2 z^T M z for the HIGS-based PII^2 loop.
class LyapunovPii2Certificate {
 public:
  LyapunovPii2Certificate(const Matrix& Y, const RowVector& C, const HigsPii2Params& p);
  const Matrix& matrix() const { return M_; }
  bool positive_definite() const { return failing_stage_.empty(); }
  /// Empty when positive definite; otherwise names the first failing stage:
  /// "Y > 0", "-D > 0" or "-D - C Y C^T > 0".
  const std::string& failing_stage() const { return failing_stage_; }
  /// -D - C Y C^T
  double final_margin() const { return final_margin_; }

 private:
  Matrix M_;
  std::string failing_stage_;
  double final_margin_ = 0.0;
};

double lyapunov_W_pii2(const Vector& x, double x_h1, double x_h2, double x_h3, const LyapunovPii2Certificate& cert);

Trajectory simulate_higs_irc_loop(const StateSpace& plant, const HigsIrcParams& p, const SimConfig& cfg,
                                  const std::optional<LyapunovIrcCertificate>& cert = std::nullopt);

Trajectory simulate_higs_pii2_loop(const StateSpace& plant, const HigsPii2Params& p, const SimConfig& cfg,
                                   const std::optional<LyapunovPii2Certificate>& cert = std::nullopt);

/// Closed-loop state matrix of plant and controller under positive feedback u = K (r + y),
/// ordered [x_plant; x_controller]. Static-gain controllers contribute no states.
Matrix closed_loop_matrix(const StateSpace& plant, const RationalTF& ctrl);

/// Exact (matrix exponential) propagation of the positive-feedback loop.
Trajectory simulate_linear_loop(const StateSpace& plant, const RationalTF& ctrl, const SimConfig& cfg);

struct MonotoneReport {
  bool pass = false;
  double worst_violation = 0.0;  ///< max over k of W(k+1) - W(k) - budget * dt_k, or <= 0 when passing
  std::size_t worst_index = 0;
};

/// W(t_{k+1}) <= W(t_k) + budget * (t_{k+1} - t_k) for every k. Requires recorded W.
MonotoneReport check_monotone(const Trajectory& traj, double budget);

/// Same samples in reverse order, re-timed so times stay increasing.
Trajectory time_reversed(const Trajectory& traj);

struct SectorReport {
  bool pass = false;
  double worst_violation = 0.0;  ///< relative, see sector_violation()
  std::size_t worst_index = 0;
  int worst_element = 0;
};

/// Sector inequality of every HIGS element at every sample (IRC loop: one element,
/// bound kappa_tilde; PII^2 loop: three elements).
SectorReport check_sector_irc(const Trajectory& traj, const HigsIrcParams& p, double rel_tol);
SectorReport check_sector_pii2(const Trajectory& traj, const HigsPii2Params& p, double rel_tol);

/// Sup-norm difference of the joint states of two runs sampled on the same time grid.
/// `stride_b` selects every stride_b-th sample of b.
double sup_norm_difference(const Trajectory& a, const Trajectory& b, std::size_t stride_b = 1);

}  // namespace nictl
