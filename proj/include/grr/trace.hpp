#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "grr/design.hpp"
#include "grr/risk.hpp"
#include "grr/shrinkage.hpp"

namespace grr {

enum class TraceKind { coef, rmse, spat, exev, infd };

const char* trace_kind_name(TraceKind kind);
TraceKind trace_kind_from_name(const std::string& name);

/// A shrinkage path resolved against a fitted model: the effective q-shape
/// (for the two-parameter family), the componentwise ML fit, and the extent
/// m_ml most likely to be MSE-optimal along this path.
struct ResolvedPath {
    PathKind kind = PathKind::efficient;
    double q_eff = 0.0;  // meaningful for the qm family only
    MLComponentFit ml;
    std::optional<QMSolution> qm;
    double m_ml = 0.0;
};

ResolvedPath resolve_path(const ComponentSummary& comps, const SpectralDecomposition& decomp,
                          Eigen::Index n, const PathSpec& spec);

/// Delta factors of the resolved path at extent m (endpoints exact: all ones
/// at m = 0, all zeros at m = p).
DeltaVector path_deltas_at(const ResolvedPath& path, double m, const Eigen::VectorXd& lambdas);

/// One row per grid extent. coef/rmse/spat/exev/infd are grid x p; rmse is
/// the clamped component risk mapped to beta coordinates (diagonal of
/// G diag(risk) G'), exev_i = 1/lambda_i minus the clamped component risk,
/// infd rows are inferior-direction cosines (zero when absent), lrt is the
/// -2 log likelihood-ratio profile. When p > n-4 the risk-based columns are
/// NaN and risk_status says why.
struct TraceTable {
    PathSpec path;
    ResolvedPath resolved;
    std::vector<double> m_grid;
    Eigen::MatrixXd coef, rmse, spat, exev, infd;
    std::vector<double> lrt;
    double m_ml = 0.0;
    bool risk_available = true;
    std::string risk_status = "ok";
    Eigen::Index p = 0;
};

TraceTable build_trace(const FittedModel& model, const PathSpec& spec);

/// -2 log likelihood-ratio of "the path point at extent m is MSE-optimal"
/// against the unrestricted maximum, profiled over sigma, for each m in the
/// grid. Zero at m = 0 by convention (the OLS point is the reference).
std::vector<std::pair<double, double>> likelihood_profile(const ComponentSummary& comps,
                                                          const SpectralDecomposition& decomp,
                                                          Eigen::Index n, const PathSpec& spec,
                                                          const std::vector<double>& m_grid);

/// Deterministic CSV: m, coef_1.., rmse_1.., spat_1.., exev_1.., infd_1..,
/// lrt with 12 significant digits.
void emit_csv(const TraceTable& table, const std::filesystem::path& out);

/// Static SVG 1.1 panel: one polyline per coefficient, a dashed vertical
/// line at m_ml, axis labels. Byte-identical across runs on identical input.
void emit_svg(const TraceTable& table, TraceKind which, const std::filesystem::path& out);

}  // namespace grr
