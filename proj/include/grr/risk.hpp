#pragma once

#include <Eigen/Dense>
#include <vector>

#include "grr/design.hpp"
#include "grr/shrinkage.hpp"

namespace grr {

/// Unbiased estimate of the relative MSE matrix MSE(delta * c) / sigma^2 in
/// component coordinates, plus the correct-range diagonal: the reported risk
/// is clamped below by the known scaled variance delta_i^2 / lambda_i. The
/// raw T_hat is kept untouched so its unbiasedness can be checked directly.
struct RelativeRisk {
    Eigen::MatrixXd T_hat;
    Eigen::VectorXd diag_clamped;
    Eigen::VectorXd variance_floor;  // delta_i^2 / lambda_i
    std::vector<bool> clamped_flags;
};

/// T_hat = ((n-p-3)/(n-p-1)) (I-D) L^{-1/2} tau tau' L^{-1/2} (I-D)
///         + L^{-1} (2D - I).
/// Requires p <= n-4 so the estimator exists.
RelativeRisk relative_mse(const DeltaVector& delta, const ComponentSummary& comps,
                          const Eigen::VectorXd& lambdas, Eigen::Index n);

/// Direction in beta-space along which the shrunken estimator's estimated
/// MSE risk exceeds the OLS risk, if any: the eigenvector of the most
/// negative eigenvalue of D = L^{-1} - T_hat, rotated by G. Absent whenever
/// min eigenvalue >= -1e-10 (in particular always absent at delta = 1).
struct InferiorDirection {
    bool present = false;
    Eigen::VectorXd direction;  // unit length when present, zero otherwise
    double excess = 0.0;        // most negative eigenvalue, < 0 when present
};

InferiorDirection inferior_direction(const DeltaVector& delta, const RelativeRisk& risk,
                                     const Eigen::VectorXd& lambdas, const Eigen::MatrixXd& G);

}  // namespace grr
