#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace nictl::detail {

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
  bool stopped = false;  ///< the objective asked to stop early
};

/// Objective returns f(x); setting `stop` ends the search immediately.
using NelderMeadObjective = std::function<double(const Eigen::VectorXd&, bool& stop)>;

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink 1/2)
/// on an axis-aligned initial simplex of edge `step`.
inline NelderMeadResult nelder_mead(const NelderMeadObjective& f, const Eigen::VectorXd& x0, double step,
                                    int max_evaluations, double f_tol = 0.0) {
  const auto n = x0.size();
  NelderMeadResult best{x0, 0.0, 0, false};
  bool stop = false;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++best.evaluations;
    return f(x, stop);
  };

  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> vals(static_cast<std::size_t>(n + 1));
  vals[0] = eval(x0);
  for (Eigen::Index i = 0; i < n && !stop; ++i) {
    auto& p = pts[static_cast<std::size_t>(i + 1)];
    p(i) += step;
    vals[static_cast<std::size_t>(i + 1)] = eval(p);
  }

  std::vector<std::size_t> order(pts.size());
  while (!stop && best.evaluations < max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t lo = order.front();
    const std::size_t hi = order.back();
    const std::size_t second = order[order.size() - 2];
    if (vals[hi] - vals[lo] <= f_tol && (pts[hi] - pts[lo]).norm() <= 1e-15 * (1.0 + pts[lo].norm())) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (i != hi) centroid += pts[i];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr = centroid + (centroid - pts[hi]);
    const double fr = eval(xr);
    if (stop) { pts[hi] = xr; vals[hi] = fr; break; }
    if (fr < vals[lo]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[hi]);
      const double fe = eval(xe);
      if (fe < fr) { pts[hi] = xe; vals[hi] = fe; } else { pts[hi] = xr; vals[hi] = fr; }
    } else if (fr < vals[second]) {
      pts[hi] = xr;
      vals[hi] = fr;
    } else {
      const bool outside = fr < vals[hi];
      const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                         : Eigen::VectorXd(centroid + 0.5 * (pts[hi] - centroid));
      const double fc = eval(xc);
      if (fc < (outside ? fr : vals[hi])) {
        pts[hi] = xc;
        vals[hi] = fc;
      } else {
        for (std::size_t i = 0; i < pts.size() && !stop; ++i) {
          if (i == lo) continue;
          pts[i] = pts[lo] + 0.5 * (pts[i] - pts[lo]);
          vals[i] = eval(pts[i]);
        }
      }
    }
  }

  const auto it = std::min_element(vals.begin(), vals.end());
  best.x = pts[static_cast<std::size_t>(it - vals.begin())];
  best.value = *it;
  best.stopped = stop;
  return best;
}

}  // namespace nictl::detail
