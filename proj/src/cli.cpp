#include "grr/cli.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <fstream>
#include <stdexcept>

#include "grr/dataset.hpp"
#include "grr/design.hpp"
#include "grr/risk.hpp"
#include "grr/simulate.hpp"
#include "grr/trace.hpp"
#include "json.hpp"

namespace grr {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<double> to_vec(const Eigen::VectorXd& v) {
    return std::vector<double>(v.begin(), v.end());
}

double chisq_99(int df) { return boost::math::quantile(boost::math::chi_squared(df), 0.99); }

void write_json(const ordered_json& j, const std::filesystem::path& out) {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + out.string());
    f << j.dump(2) << '\n';
    if (!f) throw std::runtime_error("write failed: " + out.string());
}

const char* path_kind_name(PathKind kind) {
    switch (kind) {
        case PathKind::efficient: return "efficient";
        case PathKind::qm: return "qm";
        case PathKind::hoerl_kennard: return "hoerl_kennard";
        case PathKind::uniform: return "uniform";
    }
    return "?";
}

ordered_json ml_json(const MLComponentFit& ml) {
    ordered_json j;
    j["delta_ml"] = to_vec(ml.delta_ml);
    j["gamma_ml"] = to_vec(ml.gamma_ml);
    j["m_knot"] = ml.m_knot;
    return j;
}

ordered_json qm_json(const QMSolution& qm) {
    ordered_json j;
    j["q_star"] = qm.q_star;
    j["k_star"] = qm.k_star;
    j["m_star"] = qm.m_star;
    j["crl_star"] = qm.crl_star;
    j["chisq"] = qm.chisq;
    j["df"] = qm.df;
    j["chisq_reference_99"] = qm.df >= 1 ? ordered_json(chisq_99(qm.df)) : ordered_json(nullptr);
    j["sigma2_hat"] = qm.sigma2_hat;
    j["nu_hat"] = qm.nu_hat;
    ordered_json grid = ordered_json::array();
    for (const auto& g : qm.qgrid_evals) {
        ordered_json p;
        p["q"] = g.q;
        p["crl"] = g.crl;
        p["k_hat"] = g.k_hat;
        p["m_hat"] = g.m_hat;
        p["chisq"] = g.chisq;
        grid.push_back(std::move(p));
    }
    j["qgrid"] = std::move(grid);
    return j;
}

ordered_json dataset_json(const RawDataset& raw, const FittedModel& model) {
    ordered_json j;
    j["n"] = model.design.n;
    j["p"] = model.design.p;
    j["response"] = raw.response_name;
    std::vector<std::string> predictors;
    for (std::size_t i = 0; i < raw.column_names.size(); ++i)
        if (i != raw.response_index()) predictors.push_back(raw.column_names[i]);
    j["predictors"] = predictors;
    j["standardize_y"] = model.design.standardize_y;
    return j;
}

int run_fit(const RunConfig& config) {
    const RawDataset raw = load_csv(config.data, config.response);
    const FittedModel model = fit_model(raw, config.standardize_y);
    const MLComponentFit ml = ml_components(model.comps, model.design.n);

    ordered_json j;
    j["command"] = "fit";
    j["dataset"] = dataset_json(raw, model);

    const Eigen::VectorXd beta_ols =
        grr_estimate(model.decomp, model.comps,
                     make_delta_vector(Eigen::VectorXd::Ones(model.design.p)));
    const RawCoefficients raw_ols = back_transform(beta_ols, model.design);
    ordered_json ols;
    ols["beta_std"] = to_vec(beta_ols);
    ols["beta_raw"] = to_vec(raw_ols.beta);
    ols["intercept"] = raw_ols.intercept;
    ols["R2"] = model.comps.R2;
    ols["s2"] = model.comps.s2;
    ols["dfe"] = model.comps.dfe;
    j["ols"] = std::move(ols);

    j["eigenvalues"] = to_vec(model.decomp.lambdas);
    j["principal_correlations"] = to_vec(model.comps.rho);
    j["components"] = to_vec(model.comps.c);
    j["t_statistics"] = to_vec(model.comps.tau);
    j["ml"] = ml_json(ml);
    j["qm"] = qm_json(qm_search(model.comps, model.decomp, model.design.n, config.path.qmin,
                                config.path.qmax, config.path.qstep));

    write_json(j, config.out_dir / "fit.json");
    return 0;
}

ordered_json trace_summary_json(const RunConfig& config, const RawDataset& raw,
                                const FittedModel& model, const TraceTable& table) {
    ordered_json j;
    j["command"] = "trace";
    j["dataset"] = dataset_json(raw, model);
    j["path"] = path_kind_name(config.path.kind);
    j["m_ml"] = table.m_ml;
    j["m_knot"] = table.resolved.ml.m_knot;
    if (table.resolved.qm) {
        const QMSolution& qm = *table.resolved.qm;
        j["q_star"] = qm.q_star;
        j["k_star"] = qm.k_star;
        j["chisq"] = qm.chisq;
        j["df"] = qm.df;
        j["chisq_reference_99"] =
            qm.df >= 1 ? ordered_json(chisq_99(qm.df)) : ordered_json(nullptr);
        j["crl_star"] = qm.crl_star;
    } else {
        j["q_star"] = nullptr;
        j["k_star"] = nullptr;
        j["chisq"] = nullptr;
    }

    const DeltaVector at_ml = path_deltas_at(table.resolved, table.m_ml, model.decomp.lambdas);
    const Eigen::VectorXd coef_std = grr_estimate(model.decomp, model.comps, at_ml);
    const RawCoefficients coef_raw = back_transform(coef_std, model.design);
    j["deltas_at_m_ml"] = to_vec(at_ml.deltas);
    j["coef_std_at_m_ml"] = to_vec(coef_std);
    j["coef_raw_at_m_ml"] = to_vec(coef_raw.beta);
    j["intercept_at_m_ml"] = coef_raw.intercept;
    j["ml"] = ml_json(table.resolved.ml);
    j["risk_status"] = table.risk_status;
    return j;
}

int run_trace(const RunConfig& config) {
    const RawDataset raw = load_csv(config.data, config.response);
    const FittedModel model = fit_model(raw, config.standardize_y);
    const TraceTable table = build_trace(model, config.path);

    auto wants = [&](const char* f) {
        return std::find(config.formats.begin(), config.formats.end(), f) !=
               config.formats.end();
    };
    if (wants("csv")) emit_csv(table, config.out_dir / "trace.csv");
    if (wants("svg")) {
        const TraceKind kinds[] = {TraceKind::coef, TraceKind::rmse, TraceKind::spat,
                                   TraceKind::exev, TraceKind::infd};
        for (TraceKind k : kinds) {
            if (!table.risk_available && k != TraceKind::coef && k != TraceKind::spat) continue;
            emit_svg(table, k,
                     config.out_dir / (std::string("trace_") + trace_kind_name(k) + ".svg"));
        }
    }
    if (wants("json"))
        write_json(trace_summary_json(config, raw, model, table),
                   config.out_dir / "summary.json");
    return 0;
}

int run_simulate(const RunConfig& config) {
    std::ifstream f(config.data);
    if (!f) throw std::runtime_error("cannot open scenario file: " + config.data.string());
    nlohmann::json sj = nlohmann::json::parse(f);
    Scenario scenario = scenario_from_json(sj);
    if (config.seed) scenario.seed = *config.seed;

    const RiskReport report = run_mc(scenario);

    auto wants = [&](const char* fmt) {
        return std::find(config.formats.begin(), config.formats.end(), fmt) !=
               config.formats.end();
    };
    if (wants("csv")) {
        write_report_csv(report, config.out_dir / "risk_report.csv");
        write_scatter_csv(report, config.out_dir / "risk_scatter.csv");
    }
    if (wants("json")) {
        ordered_json j;
        j["command"] = "simulate";
        j["scenario"] = scenario_to_json(scenario);
        j["report"] = report_to_json(report);
        write_json(j, config.out_dir / "risk_report.json");
    }
    return 0;
}

}  // namespace

void RunConfig::validate() const {
    std::vector<std::string> problems;
    if (data.empty()) problems.push_back("--data is required");
    if (command != Command::simulate && response.empty())
        problems.push_back("--response is required for fit and trace");
    if (!(path.qmin < path.qmax)) problems.push_back("--qmin must be less than --qmax");
    if (!(path.qstep > 0.0)) problems.push_back("--qstep must be positive");
    if (path.grid_steps_per_unit_m < 1) problems.push_back("--steps must be >= 1");
    if (path.fixed_q && path.kind != PathKind::qm)
        problems.push_back("--q applies to the qm path only");
    if (command == Command::simulate) {
        // the scenario file may also carry a seed; the flag takes precedence
    } else if (seed) {
        problems.push_back("--seed applies to the simulate command only");
    }
    for (const std::string& f : formats)
        if (f != "csv" && f != "json" && f != "svg")
            problems.push_back("unknown format '" + f + "' (expected csv, json or svg)");
    if (command == Command::fit)
        for (const std::string& f : formats)
            if (f != "json") problems.push_back("fit emits json only; format '" + f +
                                                "' is not supported");
    if (command == Command::simulate)
        for (const std::string& f : formats)
            if (f == "svg") problems.push_back("simulate emits csv/json only");

    if (!problems.empty()) {
        std::string msg = "invalid configuration:";
        for (const std::string& p : problems) msg += "\n  - " + p;
        throw std::invalid_argument(msg);
    }
}

int run(const RunConfig& config) {
    config.validate();
    std::filesystem::create_directories(config.out_dir);
    switch (config.command) {
        case Command::fit: return run_fit(config);
        case Command::trace: return run_trace(config);
        case Command::simulate: return run_simulate(config);
    }
    throw std::logic_error("unreachable command");
}

}  // namespace grr
