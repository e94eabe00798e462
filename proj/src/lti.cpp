#include "nictl/lti.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nictl/errors.hpp"

namespace nictl {

namespace {

bool all_finite(const Eigen::Ref<const Matrix>& M) { return M.allFinite(); }

double max_abs_real_scale(const std::vector<Complex>& ps) {
  double scale = 1.0;
  for (const auto& p : ps) scale = std::max(scale, std::abs(p));
  return scale;
}

bool near_pole(const std::vector<Complex>& ps, double omega, double distance) {
  const Complex jw(0.0, omega);
  return std::any_of(ps.begin(), ps.end(),
                     [&](const Complex& p) { return std::abs(p - jw) <= distance; });
}

}  // namespace

StateSpace::StateSpace(Matrix A, Vector B, RowVector C, double D_ff)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)), D_ff_(D_ff) {
  const auto n = A_.rows();
  if (n < 1 || A_.cols() != n) throw DimensionMismatch("A must be square with n >= 1");
  if (B_.size() != n) throw DimensionMismatch("B must have n rows");
  if (C_.size() != n) throw DimensionMismatch("C must have n columns");
  if (!all_finite(A_) || !all_finite(B_) || !all_finite(C_) || !std::isfinite(D_ff_))
    throw PreconditionViolation("state-space matrices must be finite");
}

RationalTF::RationalTF(std::vector<double> num, std::vector<double> den)
    : num_(std::move(num)), den_(std::move(den)) {
  if (den_.empty() || den_.front() == 0.0)
    throw PreconditionViolation("denominator leading coefficient must be nonzero");
  auto first = std::find_if(num_.begin(), num_.end(), [](double c) { return c != 0.0; });
  if (first == num_.end()) {
    num_ = {0.0};
  } else {
    num_.erase(num_.begin(), first);
  }
  if (num_.size() > den_.size()) throw PreconditionViolation("transfer function must be proper");
  auto finite = [](double c) { return std::isfinite(c); };
  if (!std::all_of(num_.begin(), num_.end(), finite) || !std::all_of(den_.begin(), den_.end(), finite))
    throw PreconditionViolation("transfer function coefficients must be finite");
}

Complex RationalTF::evaluate(Complex s) const { return polyval(num_, s) / polyval(den_, s); }

Complex polyval(std::span<const double> coeffs, Complex s) {
  Complex acc = 0.0;
  for (double c : coeffs) acc = acc * s + c;
  return acc;
}

std::vector<Complex> polynomial_roots(std::span<const double> coeffs) {
  auto first = std::find_if(coeffs.begin(), coeffs.end(), [](double c) { return c != 0.0; });
  std::vector<double> c(first, coeffs.end());
  if (c.size() <= 1) return {};
  const auto n = static_cast<Eigen::Index>(c.size() - 1);
  Matrix companion = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) companion(0, j) = -c[static_cast<std::size_t>(j + 1)] / c[0];
  for (Eigen::Index i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Matrix> es(companion, false);
  std::vector<Complex> roots(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) roots[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
  return roots;
}

std::vector<Complex> poles(const RationalTF& tf) { return polynomial_roots(tf.den()); }

std::vector<Complex> poles(const StateSpace& sys) {
  Eigen::EigenSolver<Matrix> es(sys.A(), false);
  std::vector<Complex> out(static_cast<std::size_t>(sys.order()));
  for (Eigen::Index i = 0; i < sys.order(); ++i) out[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
  return out;
}

Complex freq_response(const StateSpace& sys, double omega, const LtiTolerances& tol) {
  if (!std::isfinite(omega)) throw PreconditionViolation("omega must be finite");
  if (near_pole(poles(sys), omega, tol.pole_distance)) throw SingularAtFrequency(omega);
  const auto n = sys.order();
  Eigen::MatrixXcd M = Complex(0.0, omega) * Eigen::MatrixXcd::Identity(n, n) - sys.A().cast<Complex>();
  Eigen::VectorXcd x = M.partialPivLu().solve(sys.B().cast<Complex>());
  return (sys.C().cast<Complex>() * x)(0) + sys.D_ff();
}

Complex freq_response(const RationalTF& tf, double omega, const LtiTolerances& tol) {
  if (!std::isfinite(omega)) throw PreconditionViolation("omega must be finite");
  if (near_pole(poles(tf), omega, tol.pole_distance)) throw SingularAtFrequency(omega);
  return tf.evaluate(Complex(0.0, omega));
}

bool is_singular(const Matrix& A, const LtiTolerances& tol) {
  Eigen::JacobiSVD<Matrix> svd(A);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return true;
  return s(s.size() - 1) <= tol.rank_rel * s(0) || s(0) == 0.0;
}

Eigen::Index numerical_rank(const Matrix& M, const LtiTolerances& tol) {
  Eigen::JacobiSVD<Matrix> svd(M);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  return (s.array() > tol.rank_rel * s(0)).count();
}

double dc_gain(const StateSpace& sys, const LtiTolerances& tol) {
  if (is_singular(sys.A(), tol)) throw SingularA();
  return sys.D_ff() - (sys.C() * sys.A().fullPivLu().solve(sys.B()))(0);
}

bool is_minimal(const StateSpace& sys, const LtiTolerances& tol) {
  const auto n = sys.order();
  Matrix ctrb(n, n);
  Matrix obsv(n, n);
  Vector col = sys.B();
  RowVector row = sys.C();
  for (Eigen::Index k = 0; k < n; ++k) {
    ctrb.col(k) = col;
    obsv.row(k) = row;
    col = sys.A() * col;
    row = row * sys.A();
  }
  return numerical_rank(ctrb, tol) == n && numerical_rank(obsv, tol) == n;
}

std::vector<double> characteristic_polynomial(const Matrix& A) {
  // Faddeev-LeVerrier recursion.
  const auto n = A.rows();
  std::vector<double> c(static_cast<std::size_t>(n + 1), 0.0);
  c[0] = 1.0;
  Matrix M = Matrix::Zero(n, n);
  const Matrix I = Matrix::Identity(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    M = A * M + c[static_cast<std::size_t>(k - 1)] * I;
    c[static_cast<std::size_t>(k)] = -(A * M).trace() / static_cast<double>(k);
  }
  return c;
}

RationalTF to_transfer_function(const StateSpace& sys) {
  // C adj(sI - A) B = det(sI - A + BC) - det(sI - A)
  const auto den = characteristic_polynomial(sys.A());
  const auto closed = characteristic_polynomial(sys.A() - sys.B() * sys.C());
  std::vector<double> num(den.size());
  for (std::size_t i = 0; i < den.size(); ++i) num[i] = closed[i] - den[i] + sys.D_ff() * den[i];
  num[0] = sys.D_ff();
  return RationalTF(std::move(num), den);
}

StateSpace to_state_space(const RationalTF& tf) {
  const auto n = static_cast<Eigen::Index>(tf.degree());
  if (n < 1) throw PreconditionViolation("static gain has no state-space realization with n >= 1");
  const double lead = tf.den().front();
  std::vector<double> a(tf.den().size());
  std::transform(tf.den().begin(), tf.den().end(), a.begin(), [&](double v) { return v / lead; });
  std::vector<double> b(a.size(), 0.0);
  std::copy(tf.num().begin(), tf.num().end(), b.end() - static_cast<std::ptrdiff_t>(tf.num().size()));
  std::transform(b.begin(), b.end(), b.begin(), [&](double v) { return v / lead; });

  Matrix A = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) A(i, i + 1) = 1.0;
  for (Eigen::Index j = 0; j < n; ++j) A(n - 1, j) = -a[static_cast<std::size_t>(n - j)];
  Vector B = Vector::Zero(n);
  B(n - 1) = 1.0;
  RowVector C(n);
  const double d = b[0];
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto idx = static_cast<std::size_t>(n - j);
    C(j) = b[idx] - d * a[idx];
  }
  return StateSpace(std::move(A), std::move(B), std::move(C), d);
}

NICertificate::NICertificate(const Matrix& Y, double sym_tol) {
  if (Y.rows() != Y.cols() || Y.rows() < 1) throw DimensionMismatch("certificate Y must be square");
  if (!Y.allFinite()) throw PreconditionViolation("certificate Y must be finite");
  const double scale = std::max(1.0, Y.cwiseAbs().maxCoeff());
  if ((Y - Y.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale)
    throw PreconditionViolation("certificate Y must be symmetric");
  Y_ = 0.5 * (Y + Y.transpose());
}

CertReport verify_ni_certificate(const StateSpace& sys, const NICertificate& cert, double tol,
                                 const LtiTolerances& lti_tol) {
  const auto n = sys.order();
  const Matrix& Y = cert.Y();
  if (Y.rows() != n) throw DimensionMismatch("certificate dimension does not match plant order");

  CertReport r;
  Eigen::SelfAdjointEigenSolver<Matrix> ey(Y, Eigen::EigenvaluesOnly);
  r.y_min_eig = ey.eigenvalues().minCoeff();
  const Matrix L = sys.A() * Y + Y * sys.A().transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> el(0.5 * (L + L.transpose()), Eigen::EigenvaluesOnly);
  r.lyap_max_eig = el.eigenvalues().maxCoeff();
  r.residual_norm = (sys.B() + sys.A() * Y * sys.C().transpose()).norm();

  r.y_positive = r.y_min_eig > 0.0;
  r.lyapunov_ok = r.lyap_max_eig <= tol;
  r.residual_ok = r.residual_norm <= tol;
  r.pass = r.y_positive && r.lyapunov_ok && r.residual_ok;
  r.minimal = is_minimal(sys, lti_tol);
  r.det_A_nonzero = !is_singular(sys.A(), lti_tol);
  return r;
}

double ni_index(const RationalTF& tf, double omega, const LtiTolerances& tol) {
  return -2.0 * freq_response(tf, omega, tol).imag();
}

namespace {

FrequencyTestReport frequency_sweep(const RationalTF& tf, std::span<const double> grid,
                                    const LtiTolerances& lti_tol) {
  if (grid.empty()) throw PreconditionViolation("frequency grid is empty");
  for (double w : grid)
    if (!std::isfinite(w) || w <= 0.0) throw PreconditionViolation("grid entries must be positive and finite");

  FrequencyTestReport r;
  r.poles = poles(tf);
  r.max_pole_real = -std::numeric_limits<double>::infinity();
  for (const auto& p : r.poles) r.max_pole_real = std::max(r.max_pole_real, p.real());
  r.min_m = std::numeric_limits<double>::infinity();
  for (double w : grid) {
    FrequencySample s{w, 0.0, false};
    if (near_pole(r.poles, w, lti_tol.pole_distance)) {
      s.excluded = true;
      r.excluded_omegas.push_back(w);
    } else {
      s.m = -2.0 * tf.evaluate(Complex(0.0, w)).imag();
      r.min_m = std::min(r.min_m, s.m);
    }
    r.samples.push_back(s);
  }
  return r;
}

}  // namespace

FrequencyTestReport ni_frequency_test(const RationalTF& tf, std::span<const double> grid, double tol,
                                      const LtiTolerances& lti_tol) {
  auto r = frequency_sweep(tf, grid, lti_tol);
  const double pole_slack = lti_tol.rank_rel * max_abs_real_scale(r.poles);
  r.poles_ok = r.poles.empty() || r.max_pole_real <= pole_slack;
  r.frequency_ok = r.min_m >= -tol;  // all-excluded grids leave min_m = +inf
  r.pass = r.poles_ok && r.frequency_ok;
  return r;
}

FrequencyTestReport sni_frequency_test(const RationalTF& tf, std::span<const double> grid, double tol,
                                       const LtiTolerances& lti_tol) {
  auto r = frequency_sweep(tf, grid, lti_tol);
  r.poles_ok = r.poles.empty() || r.max_pole_real < -tol;
  r.frequency_ok = r.excluded_omegas.empty() && r.min_m > tol;
  r.pass = r.poles_ok && r.frequency_ok;
  return r;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 2) throw PreconditionViolation("log_grid needs 0 < lo <= hi and n >= 2");
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (n - 1));
  return out;
}

}  // namespace nictl
