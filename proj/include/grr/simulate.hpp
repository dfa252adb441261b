#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace grr {

/// A known-truth regression scenario. X is built once per scenario with the
/// exact requested X'X spectrum; the true beta either points along a chosen
/// principal axis or is given explicitly, optionally rescaled so the
/// signal-to-total ratio beta'X'X beta / (beta'X'X beta + (n-1) sigma2)
/// matches target_r2.
struct Scenario {
    enum class Orientation { explicit_vector, major_axis, minor_axis };

    Eigen::Index p = 2;
    Eigen::Index n = 100;
    Orientation orientation = Orientation::major_axis;
    Eigen::VectorXd beta_explicit;  // used when orientation = explicit_vector
    Eigen::VectorXd spectrum;       // eigenvalues of the raw X'X, all > 0
    double sigma2 = 1.0;
    std::optional<double> target_r2;
    int replications = 1000;
    std::uint64_t seed = 0;
    double qmin = -5.0;
    double qmax = 5.0;
    double qstep = 0.5;

    void validate() const;
};

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::ordered_json scenario_to_json(const Scenario& s);

/// The fixed part of a scenario: centered X with the requested spectrum and
/// the realized true coefficient vector. Deterministic given the seed.
struct ScenarioDesign {
    Eigen::MatrixXd X;
    Eigen::VectorXd beta;
    Eigen::VectorXd spectrum;  // sorted non-increasing
};

ScenarioDesign make_design(const Scenario& s);

/// y = X beta + eps with eps i.i.d. normal(0, sigma2), drawn from a stream
/// keyed by (seed, replicate_index) so replicates are independent of
/// evaluation order.
Eigen::VectorXd generate_response(const ScenarioDesign& design, const Scenario& s,
                                  int replicate_index);

/// Convenience form returning the scenario X together with one replicate y.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> generate(const Scenario& s, int replicate_index);

struct EstimatorRisk {
    std::string name;
    double mean_sse = 0.0;  // empirical summed MSE of beta_hat, raw units
    double mc_se = 0.0;
    double ratio_to_ols = 1.0;
    double ratio_se = 0.0;
};

/// Per-replicate raw material behind the report: squared errors for every
/// estimator, the selected shape, and the coefficient estimates whose
/// distributions the scatter file captures (OLS against the two ML points).
struct ReplicateScatter {
    double q_selected = 0.0;
    Eigen::VectorXd sse;       // one entry per estimator
    Eigen::VectorXd beta_ols;  // raw units
    Eigen::VectorXd beta_efficient;
    Eigen::VectorXd beta_qm;
};

struct RiskReport {
    std::vector<EstimatorRisk> estimators;  // ols, efficient_ml, qm_ml, uniform_ml, oracle
    std::map<double, int> q_selection;      // qm-search histogram over replicates
    double ols_theoretical = 0.0;           // sigma2 * sum 1/lambda_i
    int replications = 0;
    std::uint64_t seed = 0;
    std::vector<ReplicateScatter> scatter;
};

/// Fits OLS, the efficient-path ML point, the qm-search ML point, the
/// uniform-shrinkage ML point, and the known-truth oracle on every
/// replicate, and reports empirical summed MSE against the true beta.
/// A replicate fit failure aborts with the replicate index.
RiskReport run_mc(const Scenario& s);

nlohmann::ordered_json report_to_json(const RiskReport& report);
void write_report_csv(const RiskReport& report, const std::filesystem::path& out);

/// One row per replicate: selected q, per-estimator squared errors, and the
/// OLS / efficient / qm coefficient estimates in raw units.
void write_scatter_csv(const RiskReport& report, const std::filesystem::path& out);

}  // namespace grr
