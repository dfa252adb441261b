#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "grr/shrinkage.hpp"
#include "grr/simulate.hpp"
#include "test_helpers.hpp"

using namespace grr;
using namespace grr::testing;

namespace {

Scenario base_scenario() {
    Scenario s;
    s.p = 2;
    s.n = 40;
    s.orientation = Scenario::Orientation::major_axis;
    s.spectrum = Eigen::Vector2d{30.0, 3.0};
    s.sigma2 = 1.0;
    s.target_r2 = 0.6;
    s.replications = 200;
    s.seed = 99;
    return s;
}

}  // namespace

TEST_CASE("make_design hits the requested spectrum exactly") {
    const auto s = base_scenario();
    const auto d = make_design(s);
    CHECK(d.X.rows() == 40);
    CHECK(d.X.cols() == 2);
    CHECK(d.X.colwise().sum().cwiseAbs().maxCoeff() < 1e-10);
    const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
                                    d.X.transpose() * d.X)
                                    .eigenvalues()
                                    .reverse();
    CHECK(eig[0] == doctest::Approx(30.0).epsilon(1e-10));
    CHECK(eig[1] == doctest::Approx(3.0).epsilon(1e-10));
    // beta scaled so the signal matches the target R^2
    const double signal = d.beta.dot(d.X.transpose() * (d.X * d.beta));
    CHECK(signal == doctest::Approx(39.0 * 0.6 / 0.4).epsilon(1e-10));
    // major-axis orientation: beta is an eigenvector for the largest eigenvalue
    const Eigen::VectorXd img = d.X.transpose() * (d.X * d.beta);
    CHECK((img - 30.0 * d.beta).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("minor-axis orientation aligns beta with the smallest eigenvalue") {
    auto s = base_scenario();
    s.orientation = Scenario::Orientation::minor_axis;
    const auto d = make_design(s);
    const Eigen::VectorXd img = d.X.transpose() * (d.X * d.beta);
    CHECK((img - 3.0 * d.beta).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("generate accepts the published two-coefficient demo parameters") {
    Scenario s;
    s.p = 2;
    s.n = 500;
    s.orientation = Scenario::Orientation::explicit_vector;
    s.beta_explicit = Eigen::Vector2d{2.3382, -1.7809};
    s.spectrum = Eigen::Vector2d{1.99 * 499.0, 0.01 * 499.0};  // near-collinear pair
    s.sigma2 = 18.0;
    s.replications = 1;
    s.seed = 3;
    const auto [X, y] = generate(s, 0);
    CHECK(X.rows() == 500);
    CHECK(y.size() == 500);
    const auto d = make_design(s);
    CHECK(d.beta[0] == doctest::Approx(2.3382));
    CHECK(d.beta[1] == doctest::Approx(-1.7809));
}

TEST_CASE("sigma2 = 0 yields the noiseless fixed response") {
    auto s = base_scenario();
    s.sigma2 = 0.0;
    s.target_r2.reset();
    const auto d = make_design(s);
    const auto y0 = generate_response(d, s, 0);
    const auto y7 = generate_response(d, s, 7);
    CHECK((y0 - d.X * d.beta).cwiseAbs().maxCoeff() == 0.0);
    CHECK(y0 == y7);
}

TEST_CASE("replicate streams are keyed by seed and index") {
    const auto s = base_scenario();
    const auto d = make_design(s);
    CHECK(generate_response(d, s, 3) == generate_response(d, s, 3));
    CHECK(generate_response(d, s, 3) != generate_response(d, s, 4));
    auto s2 = s;
    s2.seed = 100;
    CHECK(generate_response(make_design(s2), s2, 3) != generate_response(d, s, 3));
}

TEST_CASE("scenario json round trip and validation") {
    const auto s = base_scenario();
    const auto j = scenario_to_json(s);
    const auto s2 = scenario_from_json(j);
    CHECK(s2.p == s.p);
    CHECK(s2.n == s.n);
    CHECK(s2.spectrum == s.spectrum);
    CHECK(s2.seed == s.seed);
    CHECK(*s2.target_r2 == doctest::Approx(0.6));

    auto bad = j;
    bad["spectrum"] = std::vector<double>{1.0};
    CHECK_THROWS_AS(scenario_from_json(bad), std::invalid_argument);
    bad = j;
    bad["orientation"] = "sideways";
    CHECK_THROWS_AS(scenario_from_json(bad), std::invalid_argument);
}

TEST_CASE("run_mc recovers the theoretical OLS risk") {
    auto s = base_scenario();
    s.replications = 600;
    const auto report = run_mc(s);
    const auto& ols = report.estimators.front();
    CHECK(ols.name == "ols");
    CHECK(ols.ratio_to_ols == 1.0);
    CHECK(report.ols_theoretical == doctest::Approx(1.0 / 30.0 + 1.0 / 3.0).epsilon(1e-12));
    CHECK(std::abs(ols.mean_sse - report.ols_theoretical) < 3.0 * ols.mc_se);
}

TEST_CASE("oracle deltas lower-bound OLS risk") {
    auto s = base_scenario();
    s.replications = 600;
    const auto report = run_mc(s);
    const auto& oracle = report.estimators.back();
    REQUIRE(oracle.name == "oracle");
    CHECK(oracle.ratio_to_ols <= 1.0 + 3.0 * oracle.ratio_se);
}

TEST_CASE("oracle deltas lower-bound arbitrary nonstochastic shrinkage") {
    // risk of a fixed delta is a positively weighted sum of component risks,
    // each of which the oracle minimizes
    const auto s = base_scenario();
    const auto design = make_design(s);
    const auto base = standardize_matrix(design.X, generate_response(design, s, 0), false);
    const auto dec = spectral(base);
    const Eigen::VectorXd gamma_true =
        dec.G.transpose() * (design.beta.array() * base.x_scales.array()).matrix();
    Eigen::VectorXd od(s.p);
    for (Eigen::Index i = 0; i < s.p; ++i)
        od[i] = delta_mse_oracle(gamma_true[i], dec.lambdas[i], std::sqrt(s.sigma2));
    const auto oracle = make_delta_vector(od);
    const auto fixed = make_delta_vector(Eigen::Vector2d{0.5, 0.9});

    const int reps = 800;
    double sum_oracle = 0.0, sum_fixed = 0.0, sum_d2 = 0.0;
    for (int r = 0; r < reps; ++r) {
        const auto d = with_response(base, generate_response(design, s, r));
        const auto comps = components(dec, d);
        const double a =
            (back_transform(grr_estimate(dec, comps, oracle), d).beta - design.beta)
                .squaredNorm();
        const double b =
            (back_transform(grr_estimate(dec, comps, fixed), d).beta - design.beta)
                .squaredNorm();
        sum_oracle += a;
        sum_fixed += b;
        sum_d2 += (a - b) * (a - b);
    }
    const double diff = (sum_oracle - sum_fixed) / reps;
    const double se =
        std::sqrt((sum_d2 / reps - diff * diff) / reps);
    CHECK(diff <= 3.0 * se);  // oracle no worse, within MC error
}

TEST_CASE("favorable scenario: qm search beats OLS decisively") {
    Scenario s;
    s.p = 4;
    s.n = 50;
    s.orientation = Scenario::Orientation::major_axis;
    s.spectrum = Eigen::Vector4d{8.0, 2.0, 0.5, 0.05} * 49.0;
    s.sigma2 = 1.0;
    s.target_r2 = 0.7;
    s.replications = 300;
    s.seed = 2024;
    const auto report = run_mc(s);
    const auto& qm = report.estimators[2];
    REQUIRE(qm.name == "qm_ml");
    CHECK(qm.ratio_to_ols < 0.5);
    // the favorable case selects negative shapes
    int negative = 0, total = 0;
    for (const auto& [q, count] : report.q_selection) {
        total += count;
        if (q < 0.0) negative += count;
    }
    CHECK(total == 300);
    CHECK(negative > total / 2);
}

TEST_CASE("unfavorable scenario with q capped at +1 concentrates there") {
    Scenario s;
    s.p = 3;
    s.n = 60;
    s.orientation = Scenario::Orientation::minor_axis;
    s.spectrum = Eigen::Vector3d{10.0, 2.0, 0.1} * 59.0;
    s.sigma2 = 1.0;
    s.target_r2 = 0.6;
    s.replications = 150;
    s.seed = 515;
    s.qmax = 1.0;  // cap the search at uniform shrinkage
    const auto report = run_mc(s);
    CHECK(report.q_selection.count(1.0) == 1);
    CHECK(report.q_selection.at(1.0) > 100);  // dominant choice
}

TEST_CASE("run_mc reports are deterministic") {
    auto s = base_scenario();
    s.replications = 50;
    const auto a = run_mc(s);
    const auto b = run_mc(s);
    REQUIRE(a.estimators.size() == b.estimators.size());
    for (std::size_t i = 0; i < a.estimators.size(); ++i) {
        CHECK(a.estimators[i].mean_sse == b.estimators[i].mean_sse);
        CHECK(a.estimators[i].mc_se == b.estimators[i].mc_se);
    }
    CHECK(a.q_selection == b.q_selection);
}

TEST_CASE("report serialization") {
    auto s = base_scenario();
    s.replications = 40;
    const auto report = run_mc(s);
    const auto j = report_to_json(report);
    CHECK(j["estimators"].size() == 5);
    CHECK(j["replications"] == 40);

    const auto tmp = std::filesystem::temp_directory_path() / "grr_report.csv";
    write_report_csv(report, tmp);
    std::ifstream f(tmp);
    std::string header;
    std::getline(f, header);
    CHECK(header == "estimator,mean_sse,mc_se,ratio_to_ols,ratio_se");
    int lines = 0;
    for (std::string line; std::getline(f, line);) ++lines;
    CHECK(lines == 5);

    // scatter carries one row per replicate with the estimate clouds
    const auto tmp2 = std::filesystem::temp_directory_path() / "grr_scatter.csv";
    write_scatter_csv(report, tmp2);
    std::ifstream f2(tmp2);
    std::getline(f2, header);
    CHECK(header.find("sse_oracle") != std::string::npos);
    CHECK(header.find("beta_qm_2") != std::string::npos);
    lines = 0;
    for (std::string line; std::getline(f2, line);) ++lines;
    CHECK(lines == 40);
    REQUIRE(report.scatter.size() == 40);
    CHECK(report.scatter.front().beta_ols.size() == 2);
    // the scatter rows reproduce the summary means
    double sum = 0.0;
    for (const auto& row : report.scatter) sum += row.sse[0];
    CHECK(sum / 40.0 == doctest::Approx(report.estimators[0].mean_sse).epsilon(1e-12));
}
