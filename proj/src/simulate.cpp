#include "grr/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

#include "grr/design.hpp"
#include "grr/shrinkage.hpp"

namespace grr {

namespace {

// distinct substreams per purpose so replicate draws never overlap the
// design construction
enum StreamTag : std::uint32_t { kTagDesign = 1, kTagRotation = 2, kTagReplicate = 3 };

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint32_t tag, std::uint32_t index = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      tag, index};
    return std::mt19937_64(seq);
}

Eigen::MatrixXd random_normal_matrix(Eigen::Index rows, Eigen::Index cols,
                                     std::mt19937_64& eng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = nd(eng);
    return M;
}

Eigen::MatrixXd thin_q(const Eigen::MatrixXd& M) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
    return qr.householderQ() * Eigen::MatrixXd::Identity(M.rows(), M.cols());
}

}  // namespace

void Scenario::validate() const {
    if (p < 1) throw std::invalid_argument("scenario: p must be >= 1");
    if (n < p + 2) throw std::invalid_argument("scenario: need n >= p + 2");
    if (spectrum.size() != p) throw std::invalid_argument("scenario: spectrum must have p entries");
    if ((spectrum.array() <= 0.0).any())
        throw std::invalid_argument("scenario: spectrum must be positive");
    if (sigma2 < 0.0) throw std::invalid_argument("scenario: sigma2 must be >= 0");
    if (replications < 1) throw std::invalid_argument("scenario: replications must be >= 1");
    if (orientation == Orientation::explicit_vector && beta_explicit.size() != p)
        throw std::invalid_argument("scenario: explicit beta must have p entries");
    if (target_r2) {
        if (!(*target_r2 > 0.0 && *target_r2 < 1.0))
            throw std::invalid_argument("scenario: target_r2 must lie in (0, 1)");
        if (sigma2 <= 0.0)
            throw std::invalid_argument("scenario: target_r2 requires sigma2 > 0");
    }
    if (!(qmin < qmax)) throw std::invalid_argument("scenario: need qmin < qmax");
    if (!(qstep > 0.0)) throw std::invalid_argument("scenario: need qstep > 0");
}

Scenario scenario_from_json(const nlohmann::json& j) {
    Scenario s;
    s.p = j.at("p").get<Eigen::Index>();
    s.n = j.at("n").get<Eigen::Index>();
    const std::string orient = j.value("orientation", "major_axis");
    if (orient == "major_axis")
        s.orientation = Scenario::Orientation::major_axis;
    else if (orient == "minor_axis")
        s.orientation = Scenario::Orientation::minor_axis;
    else if (orient == "explicit")
        s.orientation = Scenario::Orientation::explicit_vector;
    else
        throw std::invalid_argument("scenario: unknown orientation '" + orient + "'");
    if (j.contains("beta")) {
        const auto v = j.at("beta").get<std::vector<double>>();
        s.beta_explicit = Eigen::Map<const Eigen::VectorXd>(v.data(),
                                                            static_cast<Eigen::Index>(v.size()));
    }
    const auto spec = j.at("spectrum").get<std::vector<double>>();
    s.spectrum =
        Eigen::Map<const Eigen::VectorXd>(spec.data(), static_cast<Eigen::Index>(spec.size()));
    s.sigma2 = j.value("sigma2", 1.0);
    if (j.contains("target_r2")) s.target_r2 = j.at("target_r2").get<double>();
    s.replications = j.value("replications", 1000);
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    s.qmin = j.value("qmin", -5.0);
    s.qmax = j.value("qmax", 5.0);
    s.qstep = j.value("qstep", 0.5);
    s.validate();
    return s;
}

nlohmann::ordered_json scenario_to_json(const Scenario& s) {
    nlohmann::ordered_json j;
    j["p"] = s.p;
    j["n"] = s.n;
    switch (s.orientation) {
        case Scenario::Orientation::major_axis: j["orientation"] = "major_axis"; break;
        case Scenario::Orientation::minor_axis: j["orientation"] = "minor_axis"; break;
        case Scenario::Orientation::explicit_vector: j["orientation"] = "explicit"; break;
    }
    if (s.beta_explicit.size() > 0)
        j["beta"] = std::vector<double>(s.beta_explicit.begin(), s.beta_explicit.end());
    j["spectrum"] = std::vector<double>(s.spectrum.begin(), s.spectrum.end());
    j["sigma2"] = s.sigma2;
    if (s.target_r2) j["target_r2"] = *s.target_r2;
    j["replications"] = s.replications;
    j["seed"] = s.seed;
    j["qmin"] = s.qmin;
    j["qmax"] = s.qmax;
    j["qstep"] = s.qstep;
    return j;
}

ScenarioDesign make_design(const Scenario& s) {
    s.validate();
    ScenarioDesign d;
    d.spectrum = s.spectrum;
    std::sort(d.spectrum.begin(), d.spectrum.end(), std::greater<double>());

    // orthonormal H in the centered subspace: center the columns before QR
    auto eng_h = seeded_engine(s.seed, kTagDesign);
    Eigen::MatrixXd Z = random_normal_matrix(s.n, s.p, eng_h);
    Z.rowwise() -= Z.colwise().mean();
    const Eigen::MatrixXd H = thin_q(Z);

    auto eng_g = seeded_engine(s.seed, kTagRotation);
    const Eigen::MatrixXd G = thin_q(random_normal_matrix(s.p, s.p, eng_g));

    d.X = H * d.spectrum.array().sqrt().matrix().asDiagonal() * G.transpose();

    switch (s.orientation) {
        case Scenario::Orientation::major_axis: d.beta = G.col(0); break;
        case Scenario::Orientation::minor_axis: d.beta = G.col(s.p - 1); break;
        case Scenario::Orientation::explicit_vector: d.beta = s.beta_explicit; break;
    }
    if (s.target_r2) {
        const double t = *s.target_r2;
        const double signal = d.beta.dot(d.X.transpose() * (d.X * d.beta));
        if (signal <= 0.0) throw std::invalid_argument("scenario: beta carries no signal");
        const double want = static_cast<double>(s.n - 1) * s.sigma2 * t / (1.0 - t);
        d.beta *= std::sqrt(want / signal);
    }
    return d;
}

Eigen::VectorXd generate_response(const ScenarioDesign& design, const Scenario& s,
                                  int replicate_index) {
    auto eng = seeded_engine(s.seed, kTagReplicate, static_cast<std::uint32_t>(replicate_index));
    std::normal_distribution<double> nd(0.0, 1.0);
    const double sd = std::sqrt(s.sigma2);
    Eigen::VectorXd y = design.X * design.beta;
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += sd * nd(eng);
    return y;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> generate(const Scenario& s, int replicate_index) {
    const ScenarioDesign d = make_design(s);
    return {d.X, generate_response(d, s, replicate_index)};
}

RiskReport run_mc(const Scenario& s) {
    s.validate();
    if (s.sigma2 <= 0.0)
        throw std::invalid_argument("run_mc: sigma2 must be > 0 (noiseless fits are exact)");
    const ScenarioDesign design = make_design(s);
    const Eigen::Index n = s.n;

    // the X part of the standardized design and its decomposition are fixed
    // across replicates; only the response block changes
    const StandardizedDesign base =
        standardize_matrix(design.X, generate_response(design, s, 0), false);
    const SpectralDecomposition decomp = spectral(base);

    // oracle deltas: nonstochastic given X (the gamma/sigma ratio does not
    // depend on the response scaling)
    const Eigen::VectorXd gamma_true =
        decomp.G.transpose() * (design.beta.array() * base.x_scales.array()).matrix();
    Eigen::VectorXd oracle_deltas(s.p);
    for (Eigen::Index i = 0; i < s.p; ++i)
        oracle_deltas[i] =
            delta_mse_oracle(gamma_true[i], decomp.lambdas[i], std::sqrt(s.sigma2));
    const DeltaVector oracle_delta = make_delta_vector(oracle_deltas);

    const int n_est = 5;
    const char* names[n_est] = {"ols", "efficient_ml", "qm_ml", "uniform_ml", "oracle"};
    std::vector<std::vector<double>> sse(n_est,
                                         std::vector<double>(static_cast<std::size_t>(s.replications)));
    std::map<double, int> q_hist;

    RiskReport report;
    report.scatter.resize(static_cast<std::size_t>(s.replications));

    for (int r = 0; r < s.replications; ++r) {
        try {
            const Eigen::VectorXd y = generate_response(design, s, r);
            const StandardizedDesign d = with_response(base, y);
            const ComponentSummary comps = components(decomp, d);

            const DeltaVector ols = make_delta_vector(Eigen::VectorXd::Ones(s.p));
            const MLComponentFit ml = ml_components(comps, n);
            const QMSolution qm = qm_search(comps, decomp, n, s.qmin, s.qmax, s.qstep);
            const RestrictedMLFit uni = restricted_ml(1.0, comps, decomp.lambdas, n);
            q_hist[qm.q_star] += 1;

            const DeltaVector points[n_est] = {
                ols, make_delta_vector(ml.delta_ml),
                two_param_deltas(qm.k_star, qm.q_star, decomp.lambdas),
                two_param_deltas(uni.k_hat, 1.0, decomp.lambdas), oracle_delta};
            ReplicateScatter& row = report.scatter[static_cast<std::size_t>(r)];
            row.q_selected = qm.q_star;
            row.sse.resize(n_est);
            for (int e = 0; e < n_est; ++e) {
                const Eigen::VectorXd beta_hat =
                    back_transform(grr_estimate(decomp, comps, points[e]), d).beta;
                row.sse[e] = (beta_hat - design.beta).squaredNorm();
                sse[static_cast<std::size_t>(e)][static_cast<std::size_t>(r)] = row.sse[e];
                if (e == 0) row.beta_ols = beta_hat;
                if (e == 1) row.beta_efficient = beta_hat;
                if (e == 2) row.beta_qm = beta_hat;
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("replicate " + std::to_string(r) + ": " + e.what());
        }
    }

    report.replications = s.replications;
    report.seed = s.seed;
    report.q_selection = std::move(q_hist);
    report.ols_theoretical = s.sigma2 * design.spectrum.cwiseInverse().sum();

    const double N = static_cast<double>(s.replications);
    auto mean_of = [&](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        return m / N;
    };
    auto cov_of = [&](const std::vector<double>& a, double ma, const std::vector<double>& b,
                      double mb) {
        double c = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) c += (a[i] - ma) * (b[i] - mb);
        return s.replications > 1 ? c / (N - 1.0) : 0.0;
    };

    const double ols_mean = mean_of(sse[0]);
    for (int e = 0; e < n_est; ++e) {
        EstimatorRisk er;
        er.name = names[e];
        er.mean_sse = mean_of(sse[static_cast<std::size_t>(e)]);
        const double var = cov_of(sse[static_cast<std::size_t>(e)], er.mean_sse,
                                  sse[static_cast<std::size_t>(e)], er.mean_sse);
        er.mc_se = std::sqrt(var / N);
        er.ratio_to_ols = er.mean_sse / ols_mean;
        if (e == 0) {
            er.ratio_se = 0.0;  // ratio is 1 by definition
        } else {
            // delta method for the paired ratio of means
            const double r = er.ratio_to_ols;
            const double saa = var;
            const double sbb = cov_of(sse[0], ols_mean, sse[0], ols_mean);
            const double sab = cov_of(sse[static_cast<std::size_t>(e)], er.mean_sse, sse[0],
                                      ols_mean);
            const double v = (saa - 2.0 * r * sab + r * r * sbb) / (N * ols_mean * ols_mean);
            er.ratio_se = std::sqrt(std::max(0.0, v));
        }
        report.estimators.push_back(std::move(er));
    }
    return report;
}

nlohmann::ordered_json report_to_json(const RiskReport& report) {
    nlohmann::ordered_json j;
    j["replications"] = report.replications;
    j["seed"] = report.seed;
    j["ols_theoretical_summed_mse"] = report.ols_theoretical;
    nlohmann::ordered_json est = nlohmann::ordered_json::array();
    for (const auto& e : report.estimators) {
        nlohmann::ordered_json je;
        je["name"] = e.name;
        je["mean_sse"] = e.mean_sse;
        je["mc_se"] = e.mc_se;
        je["ratio_to_ols"] = e.ratio_to_ols;
        je["ratio_se"] = e.ratio_se;
        est.push_back(std::move(je));
    }
    j["estimators"] = std::move(est);
    nlohmann::ordered_json qs = nlohmann::ordered_json::array();
    for (const auto& [q, count] : report.q_selection) {
        nlohmann::ordered_json jq;
        jq["q"] = q;
        jq["count"] = count;
        qs.push_back(std::move(jq));
    }
    j["q_selection"] = std::move(qs);
    return j;
}

void write_report_csv(const RiskReport& report, const std::filesystem::path& out) {
    std::string buf = "estimator,mean_sse,mc_se,ratio_to_ols,ratio_se\n";
    char line[256];
    for (const auto& e : report.estimators) {
        std::snprintf(line, sizeof(line), "%s,%.12g,%.12g,%.12g,%.12g\n", e.name.c_str(),
                      e.mean_sse, e.mc_se, e.ratio_to_ols, e.ratio_se);
        buf += line;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + out.string());
    f << buf;
    if (!f) throw std::runtime_error("write failed: " + out.string());
}

void write_scatter_csv(const RiskReport& report, const std::filesystem::path& out) {
    std::string buf = "replicate,q_selected";
    for (const auto& e : report.estimators) buf += ",sse_" + e.name;
    const Eigen::Index p =
        report.scatter.empty() ? 0 : report.scatter.front().beta_ols.size();
    for (const char* est : {"ols", "efficient", "qm"})
        for (Eigen::Index j = 0; j < p; ++j)
            buf += std::string(",beta_") + est + "_" + std::to_string(j + 1);
    buf += '\n';

    char num[40];
    auto append = [&](double v) {
        std::snprintf(num, sizeof(num), ",%.12g", v);
        buf += num;
    };
    for (std::size_t r = 0; r < report.scatter.size(); ++r) {
        const ReplicateScatter& row = report.scatter[r];
        buf += std::to_string(r);
        append(row.q_selected);
        for (Eigen::Index e = 0; e < row.sse.size(); ++e) append(row.sse[e]);
        for (const Eigen::VectorXd* b : {&row.beta_ols, &row.beta_efficient, &row.beta_qm})
            for (Eigen::Index j = 0; j < p; ++j) append((*b)[j]);
        buf += '\n';
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + out.string());
    f << buf;
    if (!f) throw std::runtime_error("write failed: " + out.string());
}

}  // namespace grr
