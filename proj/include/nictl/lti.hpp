#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nictl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Complex = std::complex<double>;

/// Numerical thresholds shared by the LTI routines.
struct LtiTolerances {
  /// Singular values below rank_rel * sigma_max count as zero.
  double rank_rel = 1e-8;
  /// Frequency points closer than this (rad/s) to a pole are treated as singular.
  double pole_distance = 1e-6;
};

/// SISO realization  x' = A x + B u,  y = C x + D_ff u.
class StateSpace {
 public:
  StateSpace(Matrix A, Vector B, RowVector C, double D_ff = 0.0);

  const Matrix& A() const { return A_; }
  const Vector& B() const { return B_; }
  const RowVector& C() const { return C_; }
  double D_ff() const { return D_ff_; }
  Eigen::Index order() const { return A_.rows(); }

 private:
  Matrix A_;
  Vector B_;
  RowVector C_;
  double D_ff_;
};

/// SISO rational transfer function, coefficients in descending powers of s.
/// Leading zeros of the numerator are stripped; the result must be proper.
class RationalTF {
 public:
  RationalTF(std::vector<double> num, std::vector<double> den);

  const std::vector<double>& num() const { return num_; }
  const std::vector<double>& den() const { return den_; }
  std::size_t degree() const { return den_.size() - 1; }

  Complex evaluate(Complex s) const;

 private:
  std::vector<double> num_;
  std::vector<double> den_;
};

/// Evaluates a real polynomial (descending powers) at a complex point (Horner).
Complex polyval(std::span<const double> coeffs, Complex s);

/// Roots of a real polynomial in descending powers (companion-matrix eigenvalues).
std::vector<Complex> polynomial_roots(std::span<const double> coeffs);

std::vector<Complex> poles(const RationalTF& tf);
std::vector<Complex> poles(const StateSpace& sys);

Complex freq_response(const StateSpace& sys, double omega, const LtiTolerances& tol = {});
Complex freq_response(const RationalTF& tf, double omega, const LtiTolerances& tol = {});

/// D_ff - C A^{-1} B.  Throws SingularA when A is numerically singular.
double dc_gain(const StateSpace& sys, const LtiTolerances& tol = {});

bool is_singular(const Matrix& A, const LtiTolerances& tol = {});
Eigen::Index numerical_rank(const Matrix& M, const LtiTolerances& tol = {});
bool is_minimal(const StateSpace& sys, const LtiTolerances& tol = {});

/// Characteristic polynomial det(sI - A), descending powers, monic.
std::vector<double> characteristic_polynomial(const Matrix& A);

RationalTF to_transfer_function(const StateSpace& sys);
/// Controllable canonical form. Requires degree >= 1.
StateSpace to_state_space(const RationalTF& tf);

/// Symmetric matrix Y for the NI-lemma conditions.
class NICertificate {
 public:
  /// Symmetrizes Y; rejects asymmetry larger than sym_tol * max(1, |Y|).
  explicit NICertificate(const Matrix& Y, double sym_tol = 1e-9);
  const Matrix& Y() const { return Y_; }

 private:
  Matrix Y_;
};

struct CertReport {
  double y_min_eig = 0.0;
  double lyap_max_eig = 0.0;  ///< largest eigenvalue of A Y + Y A^T
  double residual_norm = 0.0; ///< |B + A Y C^T|
  bool y_positive = false;
  bool lyapunov_ok = false;
  bool residual_ok = false;
  bool pass = false;
  // Side conditions of the lemma, reported but not part of the verdict.
  bool minimal = false;
  bool det_A_nonzero = false;
};

CertReport verify_ni_certificate(const StateSpace& sys, const NICertificate& cert, double tol,
                                 const LtiTolerances& lti_tol = {});

struct CertificateSearchOptions {
  int max_order = 10;
  double tol = 1e-9;           ///< verification tolerance for the returned Y
  double margin = 1e-6;        ///< required lower bound on lambda_min(Y)
  int max_evaluations = 20000; ///< per Nelder-Mead restart
  int restarts = 4;
};

/// Searches Y on the affine set {Y = Y^T : B + A Y C^T = 0} minimizing
/// max(lambda_max(AY + YA^T), margin - lambda_min(Y)) with Nelder-Mead.
/// std::nullopt means the budget ran out; that is not a proof of infeasibility.
std::optional<NICertificate> search_ni_certificate(const StateSpace& sys,
                                                   const CertificateSearchOptions& opts = {},
                                                   const LtiTolerances& lti_tol = {});

struct FrequencySample {
  double omega = 0.0;
  double m = 0.0;         ///< j[G(jw) - G(jw)^*]
  bool excluded = false;  ///< pole-adjacent, not evaluated
};

struct FrequencyTestReport {
  std::vector<FrequencySample> samples;
  std::vector<double> excluded_omegas;
  std::vector<Complex> poles;
  double min_m = 0.0;
  double max_pole_real = 0.0;
  bool poles_ok = false;
  bool frequency_ok = false;
  bool pass = false;
};

/// m(w) = j[G(jw) - conj G(jw)] = -2 Im G(jw).
double ni_index(const RationalTF& tf, double omega, const LtiTolerances& tol = {});

/// NI: no open right-half-plane poles and m(w) >= -tol on the grid.
FrequencyTestReport ni_frequency_test(const RationalTF& tf, std::span<const double> grid, double tol,
                                      const LtiTolerances& lti_tol = {});
/// SNI: every pole has Re < -tol and m(w) > tol on the grid.
FrequencyTestReport sni_frequency_test(const RationalTF& tf, std::span<const double> grid, double tol,
                                       const LtiTolerances& lti_tol = {});

/// n points log-spaced over [lo, hi], endpoints included.
std::vector<double> log_grid(double lo, double hi, int n);

}  // namespace nictl
