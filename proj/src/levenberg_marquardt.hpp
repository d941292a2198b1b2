#pragma once

// Small dense Levenberg-Marquardt driver shared by the photon-statistics fits.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>

#include "defectspec/error.hpp"

namespace defectspec::detail {

struct LmResult {
  Eigen::VectorXd params;
  Eigen::MatrixXd jtj;  ///< J^T J at the solution (weighted)
  double chi2 = 0.0;
  int iterations = 0;
};

/// `model(p, r, J)` fills weighted residuals r = (y - f)/sigma and their
/// Jacobian dr/dp; returns false if p is outside the admissible region.
using LmModel = std::function<bool(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd&)>;

inline LmResult levenberg_marquardt(const LmModel& model, Eigen::VectorXd p, int residual_count,
                                    int max_iterations = 200) {
  const auto np = p.size();
  Eigen::VectorXd r(residual_count), r_try(residual_count);
  Eigen::MatrixXd jac(residual_count, np), jac_try(residual_count, np);
  if (!model(p, r, jac)) throw Error(ErrorKind::fit, "initial parameters are inadmissible");
  double chi2 = r.squaredNorm();
  double lambda = 1e-3;

  for (int it = 1; it <= max_iterations; ++it) {
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * r;
    const double floor = 1e-12 * std::max(1e-300, jtj.diagonal().maxCoeff());
    if (chi2 == 0.0 || grad.norm() <= 1e-15 * std::max(1.0, chi2)) {
      return {p, jtj, chi2, it - 1};
    }

    bool accepted = false;
    for (int tries = 0; tries < 40 && !accepted; ++tries) {
      Eigen::MatrixXd a = jtj;
      for (Eigen::Index k = 0; k < np; ++k) a(k, k) += lambda * std::max(jtj(k, k), floor);
      const Eigen::VectorXd step = -a.ldlt().solve(grad);
      const Eigen::VectorXd p_try = p + step;
      if (step.allFinite() && model(p_try, r_try, jac_try)) {
        const double chi2_try = r_try.squaredNorm();
        if (chi2_try <= chi2) {
          const double rel = (chi2 - chi2_try) / std::max(chi2, 1e-300);
          const double step_rel = step.norm() / std::max(1e-300, p.norm());
          p = p_try;
          r = r_try;
          jac = jac_try;
          chi2 = chi2_try;
          lambda = std::max(lambda / 10.0, 1e-12);
          accepted = true;
          if (rel < 1e-14 || step_rel < 1e-13 || chi2 == 0.0) {
            return {p, jac.transpose() * jac, chi2, it};
          }
          continue;
        }
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      // no downhill step at any damping: at a minimum to working precision
      return {p, jac.transpose() * jac, chi2, it};
    }
  }
  throw Error(ErrorKind::fit, "Levenberg-Marquardt did not converge",
              "iterations=" + std::to_string(max_iterations) + " chi2=" + std::to_string(chi2));
}

}  // namespace defectspec::detail
