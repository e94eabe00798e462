#include <cmath>

#include "nictl/errors.hpp"
#include "nictl/sim.hpp"

namespace nictl {

namespace {

double min_eig(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Matrix checked_inverse(const Matrix& Y, const RowVector& C) {
  if (Y.rows() != Y.cols() || Y.rows() != C.size()) throw DimensionMismatch("Y and C dimensions do not match");
  return Y.inverse();
}

}  // namespace

LyapunovIrcCertificate::LyapunovIrcCertificate(const Matrix& Y, const RowVector& C, double kappa_tilde) {
  if (!(kappa_tilde > 0.0)) throw PreconditionViolation("kappa_tilde must be positive");
  const auto n = Y.rows();
  const Matrix Yinv = checked_inverse(Y, C);
  M_ = Matrix::Zero(n + 1, n + 1);
  M_.topLeftCorner(n, n) = Yinv;
  M_.topRightCorner(n, 1) = -C.transpose();
  M_.bottomLeftCorner(1, n) = -C;
  M_(n, n) = 1.0 / kappa_tilde;
  schur_margin_ = 1.0 / kappa_tilde - (C * Y * C.transpose())(0);
  pd_ = min_eig(Y) > 0.0 && schur_margin_ > 0.0;
}

double lyapunov_W_irc(const Vector& x, double x_h, const LyapunovIrcCertificate& cert) {
  if (!cert.positive_definite())
    throw CertificateNotPD("1/kappa_tilde - C Y C^T > 0", "IRC Lyapunov matrix is not positive definite");
  const auto n = cert.matrix().rows() - 1;
  if (x.size() != n) throw DimensionMismatch("state dimension does not match certificate");
  Vector z(n + 1);
  z << x, x_h;
  return 0.5 * z.dot(cert.matrix() * z);
}

LyapunovPii2Certificate::LyapunovPii2Certificate(const Matrix& Y, const RowVector& C, const HigsPii2Params& p) {
  const auto n = Y.rows();
  const Matrix Yinv = checked_inverse(Y, C);
  const double g = p.gamma();
  const double D = p.D();
  const Matrix CtC = C.transpose() * C;

  M_ = Matrix::Zero(n + 3, n + 3);
  M_.topLeftCorner(n, n) = Yinv - p.k_p() * g * CtC;
  M_.block(0, n, n, 1) = -g * C.transpose();
  M_.block(0, n + 2, n, 1) = -g * C.transpose();
  M_.block(n, 0, 1, n) = -g * C;
  M_.block(n + 2, 0, 1, n) = -g * C;
  M_(n, n) = 1.0 / p.h1().k_h - D * g;
  M_(n, n + 2) = -D * g;
  M_(n + 2, n) = -D * g;
  M_(n + 1, n + 1) = 1.0;
  M_(n + 2, n + 2) = -D * g;

  // M > 0  <=>  Y > 0, -D > 0 and -D - C Y C^T > 0 (Schur complements on the x_h2 row,
  // the scaled x_h3 block, and finally the Y^{-1} block).
  final_margin_ = -D - (C * Y * C.transpose())(0);
  if (!(min_eig(Y) > 0.0)) {
    failing_stage_ = "Y > 0";
  } else if (!(-D > 0.0)) {
    failing_stage_ = "-D > 0";
  } else if (!(final_margin_ > 0.0)) {
    failing_stage_ = "-D - C Y C^T > 0";
  }
}

double lyapunov_W_pii2(const Vector& x, double x_h1, double x_h2, double x_h3, const LyapunovPii2Certificate& cert) {
  if (!cert.positive_definite())
    throw CertificateNotPD(cert.failing_stage(), "PII2 Lyapunov matrix is not positive definite (stage " +
                                                     cert.failing_stage() + ")");
  const auto n = cert.matrix().rows() - 3;
  if (x.size() != n) throw DimensionMismatch("state dimension does not match certificate");
  Vector z(n + 3);
  z << x, x_h1, x_h2, x_h3;
  return 0.5 * z.dot(cert.matrix() * z);
}

}  // namespace nictl
