#pragma once

#include <Eigen/Dense>

#include "grr/dataset.hpp"

namespace grr {

/// Centered and rescaled regression data. Predictor columns are centered and
/// scaled to sum of squares n-1, so X'X is (n-1) times the sample correlation
/// matrix and eigenvalue spectra are comparable across datasets. The response
/// is centered, and scaled to y'y = n-1 when standardize_y is set. The raw
/// fit (including the implicit intercept) is recovered via back_transform.
struct StandardizedDesign {
    Eigen::MatrixXd X;  // n x p, columns centered
    Eigen::VectorXd y;  // n, centered
    Eigen::Index n = 0;
    Eigen::Index p = 0;
    Eigen::VectorXd x_means;
    Eigen::VectorXd x_scales;  // per-column sd, all > 0
    double y_mean = 0.0;
    double y_scale = 1.0;
    bool standardize_y = true;
};

/// Singular value decomposition of the standardized design, X = H L^{1/2} G',
/// with eigenvalues of X'X sorted non-increasing. Sign convention: the
/// largest-magnitude entry of each column of G is positive (ties broken by
/// first index), which makes the decomposition deterministic.
struct SpectralDecomposition {
    Eigen::VectorXd lambdas;  // eigenvalues of X'X, non-increasing, all > 0
    Eigen::MatrixXd G;        // p x p orthogonal, principal-axis direction cosines
    Eigen::MatrixXd H;        // n x p semi-orthogonal, principal coordinates
};

/// Per-component summary statistics of the least-squares fit in principal
/// coordinates: uncorrelated components c_i = rho_i * sqrt(y'y / lambda_i),
/// principal correlations rho = H'y / sqrt(y'y), R^2 = sum rho_i^2, and the
/// F / t statistics for testing gamma_i = 0.
struct ComponentSummary {
    Eigen::VectorXd c;
    Eigen::VectorXd rho;
    double R2 = 0.0;
    double s2 = 0.0;  // unbiased sigma^2 estimate, y'y (1-R^2) / dfe
    Eigen::VectorXd F;
    Eigen::VectorXd tau;
    Eigen::VectorXd noncentrality_hat;  // n rho_i^2 / (1-R^2)
    double yTy = 0.0;
    Eigen::Index dfe = 0;  // n - p - 1
};

/// Coefficients mapped back to the raw data units. The fitted hyperplane
/// passes through (x_bar, y_bar).
struct RawCoefficients {
    Eigen::VectorXd beta;
    double intercept = 0.0;
};

StandardizedDesign standardize(const RawDataset& raw, bool standardize_y = true);

/// Same contract as standardize(raw, ...), for callers that already hold the
/// predictor matrix and response in memory.
StandardizedDesign standardize_matrix(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                      bool standardize_y = true);

/// Re-centers (and re-scales, per the design's flag) a fresh raw response
/// against an existing design. The X block is untouched, so a decomposition
/// computed from it stays valid.
StandardizedDesign with_response(const StandardizedDesign& design, const Eigen::VectorXd& y_raw);

/// Throws if the smallest singular value of X falls below 1e-10 times the
/// largest (X not full column rank).
SpectralDecomposition spectral(const StandardizedDesign& design);

ComponentSummary components(const SpectralDecomposition& decomp, const StandardizedDesign& design);

RawCoefficients back_transform(const Eigen::VectorXd& beta_std, const StandardizedDesign& design);

/// Convenience bundle for the full ingestion pipeline.
struct FittedModel {
    StandardizedDesign design;
    SpectralDecomposition decomp;
    ComponentSummary comps;
};

FittedModel fit_model(const RawDataset& raw, bool standardize_y = true);
FittedModel fit_model(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      bool standardize_y = true);

}  // namespace grr
