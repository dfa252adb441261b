#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "grr/design.hpp"

namespace grr {

/// A point on a shrinkage path: p per-component delta factors in [0,1] and
/// the corresponding extent m = p - sum(delta).
struct DeltaVector {
    Eigen::VectorXd deltas;
    double m = 0.0;
};

/// Validates the [0,1] range and fills in m.
DeltaVector make_delta_vector(Eigen::VectorXd deltas);

/// Minimum-MSE shrinkage factor for a single component with known truth:
/// delta = gamma^2 lambda / (gamma^2 lambda + sigma^2). Returns 1 when
/// sigma = 0 and gamma != 0; throws when both are zero (0/0).
double delta_mse_oracle(double gamma, double lambda, double sigma);

/// Generalized ridge estimate G * diag(delta) * c in standardized beta units.
/// With delta = 1 this is the OLS solution.
Eigen::VectorXd grr_estimate(const SpectralDecomposition& decomp, const ComponentSummary& comps,
                             const DeltaVector& delta);

/// Multicollinearity allowance m = p - sum(delta). Throws if any delta is
/// outside [0,1].
double m_extent(const Eigen::VectorXd& deltas);

/// Two-parameter family delta_j = 1 / (1 + k lambda_j^{q-1}). q = 0 is the
/// Hoerl-Kennard path, q = 1 uniform shrinkage; k = 0 gives all ones.
DeltaVector two_param_deltas(double k, double q, const Eigen::VectorXd& lambdas);

/// The k > 0 whose two-parameter deltas have extent m, found by monotone
/// bisection on log k. Requires 0 < m < p.
double qm_k_for_extent(double m, double q, const Eigen::VectorXd& lambdas);

/// Curlicue: cosine of the angle between |rho| and lambda^{(1-q)/2}.
/// Always in (0, 1]; equals 1 identically when p = 1.
double crl(double q, const Eigen::VectorXd& rho, const Eigen::VectorXd& lambdas);

/// Restricted maximum-likelihood solution along a fixed q-shape path.
struct RestrictedMLFit {
    double q = 0.0;
    double crl = 0.0;
    double nu_hat = 0.0;      // minimizer of the residual quadratic in nu
    double u2_min = 0.0;      // y'y (1 - R^2 CRL^2)
    double sigma2_hat = 0.0;  // u2_min / n
    double k_hat = 0.0;       // closed-form ML k-factor
    double m_hat = 0.0;       // extent at k_hat
    double chisq = 0.0;       // -2 log LR of the restriction, n ln(1 + R^2(1-CRL^2)/(1-R^2))
};

/// Throws when R^2 = 0 (no signal: the shrinkage terminus is optimal and
/// k_hat is unbounded).
RestrictedMLFit restricted_ml(double q, const ComponentSummary& comps,
                              const Eigen::VectorXd& lambdas, Eigen::Index n);

struct QMGridPoint {
    double q, crl, k_hat, m_hat, chisq;
};

/// Result of the q-shape grid search: the shape maximizing CRL(q)
/// (equivalently minimizing chi^2(q)) plus every grid evaluation.
struct QMSolution {
    double q_star = 0.0;
    double k_star = 0.0;
    double m_star = 0.0;
    double crl_star = 0.0;
    double sigma2_hat = 0.0;
    double nu_hat = 0.0;
    double chisq = 0.0;
    int df = 0;  // p - 2 when p >= 3, else 0
    std::vector<QMGridPoint> qgrid_evals;
};

/// Searches integer/half-integer shapes by default. Ties (within 1e-12 on
/// chi^2) resolve to the smallest |q|, then the smaller q.
QMSolution qm_search(const ComponentSummary& comps, const SpectralDecomposition& decomp,
                     Eigen::Index n, double qmin = -5.0, double qmax = 5.0, double qstep = 0.5);

/// Componentwise maximum-likelihood shrinkage: delta_j = n rho_j^2 /
/// (n rho_j^2 + (1 - R^2)), gamma_j = delta_j c_j. m_knot is the extent of
/// the ML point and the interior knot of the efficient path.
struct MLComponentFit {
    Eigen::VectorXd delta_ml;
    Eigen::VectorXd gamma_ml;
    double m_knot = 0.0;
};

MLComponentFit ml_components(const ComponentSummary& comps, Eigen::Index n);

/// Efficient p-parameter path: two-piece linear in m with the knot at the ML
/// fit. Satisfies sum(delta(m)) = p - m identically on both pieces, with
/// delta(0) = 1, delta(m_knot) = delta_ml, delta(p) = 0.
DeltaVector efficient_path_deltas(double m, const MLComponentFit& fit);

enum class PathKind { efficient, qm, hoerl_kennard, uniform };

/// A shrinkage path definition. For kind qm, fixed_q pins the shape;
/// otherwise the shape is searched on the [qmin, qmax] grid. hoerl_kennard
/// and uniform are the fixed shapes q = 0 and q = 1.
struct PathSpec {
    PathKind kind = PathKind::efficient;
    std::optional<double> fixed_q;
    double qmin = -5.0;
    double qmax = 5.0;
    double qstep = 0.5;
    int grid_steps_per_unit_m = 20;
};

}  // namespace grr
