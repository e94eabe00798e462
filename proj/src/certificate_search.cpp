#include <algorithm>
#include <cmath>
#include <random>

#include "nelder_mead.hpp"
#include "nictl/errors.hpp"
#include "nictl/lti.hpp"

namespace nictl {

namespace {

struct AffineFamily {
  Matrix base;               // particular symmetric solution
  std::vector<Matrix> dirs;  // symmetric null-space directions
};

std::vector<std::pair<Eigen::Index, Eigen::Index>> upper_indices(Eigen::Index n) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> idx;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) idx.emplace_back(i, j);
  return idx;
}

Matrix unpack(const Vector& p, const std::vector<std::pair<Eigen::Index, Eigen::Index>>& idx, Eigen::Index n) {
  Matrix Y = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto [i, j] = idx[k];
    Y(i, j) = p(static_cast<Eigen::Index>(k));
    Y(j, i) = p(static_cast<Eigen::Index>(k));
  }
  return Y;
}

// {Y = Y^T : Y C^T = -A^{-1} B}, i.e. B + A Y C^T = 0 for invertible A.
std::optional<AffineFamily> residual_free_family(const StateSpace& sys, const LtiTolerances& tol) {
  const auto n = sys.order();
  const auto idx = upper_indices(n);
  const auto m = static_cast<Eigen::Index>(idx.size());
  const Vector target = -sys.A().fullPivLu().solve(sys.B());

  Matrix T = Matrix::Zero(n, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto [i, j] = idx[static_cast<std::size_t>(k)];
    T(i, k) += sys.C()(j);
    if (i != j) T(j, k) += sys.C()(i);
  }

  Eigen::JacobiSVD<Matrix> svd(T, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double thresh = tol.rank_rel * std::max(1.0, s.size() > 0 ? s(0) : 0.0);
  const Eigen::Index rank = (s.array() > thresh).count();
  Vector p = Vector::Zero(m);
  const Vector ut = svd.matrixU().transpose() * target;
  for (Eigen::Index k = 0; k < rank; ++k) p += (ut(k) / s(k)) * svd.matrixV().col(k);
  if ((T * p - target).norm() > 1e-10 * std::max(1.0, target.norm())) return std::nullopt;

  AffineFamily fam{unpack(p, idx, n), {}};
  for (Eigen::Index k = rank; k < m; ++k) fam.dirs.push_back(unpack(svd.matrixV().col(k), idx, n));
  return fam;
}

}  // namespace

std::optional<NICertificate> search_ni_certificate(const StateSpace& sys, const CertificateSearchOptions& opts,
                                                   const LtiTolerances& lti_tol) {
  const auto n = sys.order();
  if (n > opts.max_order) throw PreconditionViolation("plant order exceeds the certificate search cap");
  if (is_singular(sys.A(), lti_tol)) throw SingularA();

  const auto fam = residual_free_family(sys, lti_tol);
  if (!fam) return std::nullopt;

  auto assemble = [&](const Vector& z) {
    Matrix Y = fam->base;
    for (std::size_t k = 0; k < fam->dirs.size(); ++k) Y += z(static_cast<Eigen::Index>(k)) * fam->dirs[k];
    return Y;
  };

  std::optional<Matrix> found;
  auto objective = [&](const Vector& z, bool& stop) {
    const Matrix Y = assemble(z);
    Eigen::SelfAdjointEigenSolver<Matrix> ey(Y, Eigen::EigenvaluesOnly);
    const Matrix L = sys.A() * Y + Y * sys.A().transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> el(0.5 * (L + L.transpose()), Eigen::EigenvaluesOnly);
    const double y_min = ey.eigenvalues().minCoeff();
    const double lyap = el.eigenvalues().maxCoeff();
    if (lyap <= opts.tol && y_min >= opts.margin) {
      found = Y;
      stop = true;
    }
    return std::max(lyap, opts.margin - y_min);
  };

  const auto dim = static_cast<Eigen::Index>(fam->dirs.size());
  Vector z = Vector::Zero(dim);
  bool stop = false;
  objective(z, stop);
  if (!found && dim == 0) return std::nullopt;

  std::mt19937_64 rng(20240917);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double step = std::max(1.0, fam->base.norm());
  Vector best = z;
  double best_val = objective(z, stop);
  for (int attempt = 0; attempt <= opts.restarts && !found && dim > 0; ++attempt) {
    Vector start = best;
    if (attempt > 0)
      for (Eigen::Index k = 0; k < dim; ++k) start(k) += 0.1 * step * gauss(rng);
    const auto res = detail::nelder_mead(objective, start, step, opts.max_evaluations);
    if (res.value < best_val) {
      best_val = res.value;
      best = res.x;
    }
    step *= 0.5;
  }
  if (!found) return std::nullopt;
  NICertificate cert(*found);
  if (!verify_ni_certificate(sys, cert, opts.tol, lti_tol).pass) return std::nullopt;
  return cert;
}

}  // namespace nictl
