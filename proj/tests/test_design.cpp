#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>

#include "grr/design.hpp"
#include "test_helpers.hpp"

using namespace grr;
using namespace grr::testing;

namespace {

RawDataset tiny_dataset(std::vector<double> x, std::vector<double> y) {
    RawDataset ds;
    ds.column_names = {"x", "y"};
    ds.columns = {std::move(x), std::move(y)};
    ds.response_name = "y";
    return ds;
}

// orthonormal basis of the centered subspace of R^3
const Eigen::Vector3d kU{1.0 / std::sqrt(2.0), 0.0, -1.0 / std::sqrt(2.0)};
const Eigen::Vector3d kV{1.0 / std::sqrt(6.0), -2.0 / std::sqrt(6.0), 1.0 / std::sqrt(6.0)};

}  // namespace

TEST_CASE("standardize centers and unit-scales a symmetric column") {
    const auto d = standardize(tiny_dataset({1, 2, 3}, {4, 5, 6}), true);
    CHECK(d.X(0, 0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(d.X(1, 0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(d.X(2, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(d.x_scales[0] == doctest::Approx(1.0));
    CHECK(d.y(0) == doctest::Approx(-1.0));
    CHECK(d.y(2) == doctest::Approx(1.0));
    CHECK(d.y.squaredNorm() == doctest::Approx(2.0));  // n - 1
}

TEST_CASE("standardize invariants on a random dataset") {
    const auto model = random_model(12, 3, 101);
    const auto& d = model.design;
    CHECK(d.X.colwise().sum().cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(d.y.sum()) < 1e-10);
    CHECK(d.y.squaredNorm() == doctest::Approx(11.0).epsilon(1e-12));
    for (Eigen::Index j = 0; j < d.p; ++j)
        CHECK(d.X.col(j).squaredNorm() == doctest::Approx(11.0).epsilon(1e-12));
}

TEST_CASE("standardize rejects constant columns") {
    CHECK_THROWS_WITH_AS(standardize(tiny_dataset({7, 7, 7}, {1, 2, 3}), true),
                         doctest::Contains("zero scale"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(standardize(tiny_dataset({1, 2, 3}, {5, 5, 5}), true),
                         doctest::Contains("zero scale"), std::invalid_argument);
}

TEST_CASE("standardize rejects p > n-1") {
    const Eigen::MatrixXd X = random_matrix(3, 3, 7);
    const Eigen::VectorXd y = random_vector(3, 8);
    CHECK_THROWS_AS(standardize_matrix(X, y, true), std::invalid_argument);
}

TEST_CASE("spectral of orthonormal columns is the identity rotation") {
    Eigen::MatrixXd X(3, 2);
    X.col(0) = kU;
    X.col(1) = kV;
    const auto dec = spectral(design_from_parts(X, Eigen::Vector3d{1, 0, -1}));
    CHECK(dec.lambdas[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dec.lambdas[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((dec.G - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("spectral of the p=2 equicorrelated design") {
    // X'X = [[1, .5], [.5, 1]] built from the centered-subspace basis
    Eigen::MatrixXd X(3, 2);
    X.col(0) = kU;
    X.col(1) = 0.5 * kU + (std::sqrt(3.0) / 2.0) * kV;
    const auto dec = spectral(design_from_parts(X, Eigen::Vector3d{1, 0, -1}));
    CHECK(dec.lambdas[0] == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(dec.lambdas[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(dec.G(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(dec.G(1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("spectral reconstruction and orthogonality on a seeded design") {
    const auto model = random_model(6, 3, 42);
    const auto& dec = model.decomp;
    const Eigen::MatrixXd rebuilt =
        dec.H * dec.lambdas.array().sqrt().matrix().asDiagonal() * dec.G.transpose();
    CHECK((rebuilt - model.design.X).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((dec.G.transpose() * dec.G - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <
          1e-8);
    CHECK((dec.H.transpose() * dec.H - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <
          1e-8);
    CHECK(dec.H.colwise().sum().cwiseAbs().maxCoeff() < 1e-8);
    CHECK(dec.lambdas[0] >= dec.lambdas[1]);
    CHECK(dec.lambdas[1] >= dec.lambdas[2]);
    // each G column carries a positive largest-magnitude entry
    for (Eigen::Index j = 0; j < 3; ++j) {
        Eigen::Index imax;
        dec.G.col(j).cwiseAbs().maxCoeff(&imax);
        CHECK(dec.G(imax, j) > 0.0);
    }
}

TEST_CASE("spectral is deterministic bit for bit") {
    const auto model = random_model(9, 4, 77);
    const auto a = spectral(model.design);
    const auto b = spectral(model.design);
    CHECK(std::memcmp(a.G.data(), b.G.data(), sizeof(double) * 16) == 0);
    CHECK(std::memcmp(a.H.data(), b.H.data(), sizeof(double) * 36) == 0);
}

TEST_CASE("spectral rejects rank-deficient designs") {
    Eigen::MatrixXd X(5, 2);
    X.col(0) = random_vector(5, 3);
    X.col(0).array() -= X.col(0).mean();
    X.col(1) = 2.0 * X.col(0);  // exact collinearity
    CHECK_THROWS_WITH_AS(spectral(design_from_parts(X, random_vector(5, 4))),
                         doctest::Contains("full column rank"), std::runtime_error);
}

TEST_CASE("components of a response orthogonal to the column space") {
    const auto model = random_model(8, 2, 55);
    // project a fresh vector onto the complement of span(1, H)
    Eigen::VectorXd z = random_vector(8, 56);
    z.array() -= z.mean();
    z -= model.decomp.H * (model.decomp.H.transpose() * z);
    auto design = model.design;
    design.y = z;
    const auto cs = components(model.decomp, design);
    CHECK(cs.rho.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(cs.c.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(cs.R2 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cs.F.cwiseAbs().maxCoeff() < 1e-20);
}

TEST_CASE("components F-ratio matches the closed form at rho = 0.5") {
    // p = 1, n = 100, principal correlation exactly 0.5
    const Eigen::Index n = 100;
    Eigen::VectorXd h = random_vector(n, 9);
    h.array() -= h.mean();
    h /= h.norm();
    Eigen::VectorXd w = random_vector(n, 10);
    w.array() -= w.mean();
    w -= h * h.dot(w);
    w /= w.norm();
    Eigen::MatrixXd X = h * std::sqrt(99.0);  // lambda = 99
    const Eigen::VectorXd y = 0.5 * h + (std::sqrt(3.0) / 2.0) * w;
    const auto design = design_from_parts(X, y);
    const auto cs = components(spectral(design), design);
    CHECK(cs.rho[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(cs.F[0] == doctest::Approx(98.0 * 0.25 / 0.75).epsilon(1e-10));
    CHECK(cs.tau[0] * cs.tau[0] == doctest::Approx(cs.F[0]).epsilon(1e-12));
    CHECK(cs.noncentrality_hat[0] == doctest::Approx(100.0 * 0.25 / 0.75).epsilon(1e-10));
}

TEST_CASE("components match a brute-force least-squares solve") {
    const auto model = random_model(8, 3, 204);
    const auto& d = model.design;
    const Eigen::VectorXd beta_ols =
        (d.X.transpose() * d.X).ldlt().solve(d.X.transpose() * d.y);
    const Eigen::VectorXd c_expected = model.decomp.G.transpose() * beta_ols;
    CHECK((model.comps.c - c_expected).cwiseAbs().maxCoeff() < 1e-8);

    // R^2 equals both sum(rho^2) and the variance-explained ratio
    const double rss = (d.y - d.X * beta_ols).squaredNorm();
    CHECK(model.comps.R2 == doctest::Approx(1.0 - rss / d.y.squaredNorm()).epsilon(1e-10));
    CHECK(model.comps.R2 == doctest::Approx(model.comps.rho.squaredNorm()).epsilon(1e-14));
    CHECK(model.comps.s2 ==
          doctest::Approx(rss / static_cast<double>(model.comps.dfe)).epsilon(1e-10));
    // c_i = rho_i sqrt(y'y / lambda_i)
    for (Eigen::Index i = 0; i < 3; ++i)
        CHECK(model.comps.c[i] ==
              doctest::Approx(model.comps.rho[i] *
                              std::sqrt(model.comps.yTy / model.decomp.lambdas[i]))
                  .epsilon(1e-12));
}

TEST_CASE("components require at least one error degree of freedom") {
    const Eigen::MatrixXd X = random_matrix(4, 3, 61);
    const Eigen::VectorXd y = random_vector(4, 62);
    const auto design = standardize_matrix(X, y, true);
    CHECK_THROWS_AS(components(spectral(design), design), std::invalid_argument);
}

TEST_CASE("back_transform of the null model is the response mean") {
    const auto model = random_model(10, 2, 83);
    const auto rc = back_transform(Eigen::VectorXd::Zero(2), model.design);
    CHECK(rc.beta.cwiseAbs().maxCoeff() == 0.0);
    CHECK(rc.intercept == doctest::Approx(model.design.y_mean));
}

TEST_CASE("back_transform under identity scaling is a no-op") {
    Eigen::MatrixXd X(3, 1);
    X.col(0) = kU;
    auto design = design_from_parts(X, Eigen::Vector3d{1, 0, -1});
    const auto rc = back_transform(Eigen::VectorXd::Constant(1, 2.5), design);
    CHECK(rc.beta[0] == doctest::Approx(2.5));
    CHECK(rc.intercept == doctest::Approx(0.0));
}

TEST_CASE("back_transform reproduces raw-unit predictions") {
    const Eigen::MatrixXd X = random_matrix(9, 3, 301);
    const Eigen::VectorXd beta = random_vector(3, 302);
    const Eigen::VectorXd y = X * beta + 0.3 * random_vector(9, 303);
    const auto model = fit_model(X, y, true);

    const Eigen::VectorXd beta_std = random_vector(3, 304);
    const auto rc = back_transform(beta_std, model.design);
    const Eigen::VectorXd pred_raw = (X * rc.beta).array() + rc.intercept;
    const Eigen::VectorXd pred_std =
        model.design.y_mean +
        (model.design.y_scale * (model.design.X * beta_std)).array();
    CHECK((pred_raw - pred_std).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("round trip: pipeline OLS equals the raw normal-equations fit") {
    for (std::uint64_t seed : {11u, 12u, 13u, 14u, 15u}) {
        const Eigen::Index n = 14, p = 4;
        const Eigen::MatrixXd X = random_matrix(n, p, seed);
        const Eigen::VectorXd beta = random_vector(p, seed + 50);
        const Eigen::VectorXd y = X * beta + 0.5 * random_vector(n, seed + 100);

        const auto model = fit_model(X, y, true);
        const Eigen::VectorXd beta_std =
            model.decomp.G * model.comps.c;  // OLS in standardized units
        const auto rc = back_transform(beta_std, model.design);

        // independent solve with an explicit intercept column
        Eigen::MatrixXd A(n, p + 1);
        A.col(0).setOnes();
        A.rightCols(p) = X;
        const Eigen::VectorXd full = (A.transpose() * A).ldlt().solve(A.transpose() * y);
        CHECK(std::abs(rc.intercept - full[0]) < 1e-8);
        CHECK((rc.beta - full.tail(p)).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("with_response swaps only the response block") {
    const auto model = random_model(10, 3, 401);
    const Eigen::VectorXd y2 = random_vector(10, 402);
    const auto d2 = with_response(model.design, y2);
    CHECK(d2.X == model.design.X);
    CHECK(std::abs(d2.y.sum()) < 1e-10);
    CHECK(d2.y.squaredNorm() == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(d2.y_mean == doctest::Approx(y2.mean()));
}
